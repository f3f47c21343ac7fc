//! RIFF/WAVE reader and writer, restricted to 16-bit PCM mono.

use std::fs;
use std::path::Path;

use super::Recording;
use crate::{Error, Result};

const PCM_SCALE: f64 = 32768.0;

fn u16_at(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

/// Decodes a WAV byte buffer. Samples are scaled to `[-1, 1)` by dividing
/// the signed 16-bit values by 32768.
pub fn decode_wav(bytes: &[u8]) -> Result<Recording> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::Format("missing RIFF/WAVE header".into()));
    }
    let mut pos = 12;
    let mut fmt: Option<(u16, u16, u32, u16)> = None;
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&end| end <= bytes.len())
            .ok_or_else(|| {
                Error::Format(format!(
                    "chunk `{}` declares {size} bytes past end of file",
                    String::from_utf8_lossy(id)
                ))
            })?;
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(Error::Format("fmt chunk shorter than 16 bytes".into()));
                }
                fmt = Some((
                    u16_at(body, 0),
                    u16_at(body, 2),
                    u32_at(body, 4),
                    u16_at(body, 14),
                ));
            }
            b"data" => {
                data = Some(body);
                break;
            }
            _ => {}
        }
        // chunks are word aligned
        pos = body_end + (size & 1);
    }

    let (audio_format, channels, sample_rate, bits) =
        fmt.ok_or_else(|| Error::Format("no fmt chunk".into()))?;
    let data = data.ok_or_else(|| Error::Format("no data chunk".into()))?;
    if audio_format != 1 {
        return Err(Error::UnsupportedFormat {
            field: "audio_format",
            found: audio_format.to_string(),
            expected: "1 (PCM)",
        });
    }
    if channels != 1 {
        return Err(Error::UnsupportedFormat {
            field: "channels",
            found: channels.to_string(),
            expected: "1 (mono)",
        });
    }
    if bits != 16 {
        return Err(Error::UnsupportedFormat {
            field: "bits_per_sample",
            found: bits.to_string(),
            expected: "16",
        });
    }
    if sample_rate == 0 {
        return Err(Error::Format("sample rate is zero".into()));
    }
    if data.len() % 2 != 0 {
        return Err(Error::Format("data chunk has odd length".into()));
    }
    let samples = data
        .chunks_exact(2)
        .map(|c| f64::from(i16::from_le_bytes([c[0], c[1]])) / PCM_SCALE)
        .collect();
    Ok(Recording {
        samples,
        sample_rate,
    })
}

/// Encodes a recording as a canonical 44-byte-header PCM 16-bit mono file.
/// Samples are rounded to the nearest PCM step and clamped to the i16 range.
pub fn encode_wav(rec: &Recording) -> Vec<u8> {
    let data_len = (rec.samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&rec.sample_rate.to_le_bytes());
    out.extend_from_slice(&(rec.sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &rec.samples {
        let v = (s * PCM_SCALE).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<Recording> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_wav(&bytes)
}

pub fn write_wav(path: impl AsRef<Path>, rec: &Recording) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_wav(rec)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Header bytes written out field by field, independent of `encode_wav`.
    fn hand_built(rate: u32, pcm: &[i16]) -> Vec<u8> {
        let data_len = pcm.len() as u32 * 2;
        let mut b = Vec::new();
        b.extend(b"RIFF");
        b.extend((36 + data_len).to_le_bytes());
        b.extend(b"WAVEfmt ");
        b.extend([16, 0, 0, 0, 1, 0, 1, 0]);
        b.extend(rate.to_le_bytes());
        b.extend((rate * 2).to_le_bytes());
        b.extend([2, 0, 16, 0]);
        b.extend(b"data");
        b.extend(data_len.to_le_bytes());
        for s in pcm {
            b.extend(s.to_le_bytes());
        }
        b
    }

    #[test]
    fn silence_reads_as_zeros() {
        let rec = decode_wav(&hand_built(16000, &vec![0; 16000])).unwrap();
        assert_eq!(rec.sample_rate, 16000);
        assert_eq!(rec.samples.len(), 16000);
        assert!(rec.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn max_sample_normalizes_by_32768() {
        let rec = decode_wav(&hand_built(8000, &[32767])).unwrap();
        assert_eq!(rec.samples, vec![32767.0 / 32768.0]);
    }

    #[test]
    fn canonical_file_round_trips_byte_identical() {
        let bytes = hand_built(16000, &[0, 1, -1, 32767, -32768, 1234, -4321]);
        assert_eq!(bytes.len(), 44 + 14);
        let rec = decode_wav(&bytes).unwrap();
        assert_eq!(encode_wav(&rec), bytes);
    }

    #[test]
    fn stereo_is_rejected_naming_channels() {
        let mut bytes = hand_built(16000, &[0, 0]);
        bytes[22] = 2;
        let err = decode_wav(&bytes).unwrap_err();
        assert!(matches!(err, Error::UnsupportedFormat { field: "channels", .. }));
        assert!(err.to_string().contains("channels"));
    }

    #[test]
    fn eight_bit_is_rejected_naming_bits() {
        let mut bytes = hand_built(16000, &[0]);
        bytes[34] = 8;
        let err = decode_wav(&bytes).unwrap_err();
        assert!(err.to_string().contains("bits_per_sample"));
    }

    #[test]
    fn malformed_headers() {
        assert!(matches!(decode_wav(b"RIFX"), Err(Error::Format(_))));
        let mut bytes = hand_built(16000, &[0; 4]);
        bytes.truncate(44 + 3);
        assert!(matches!(decode_wav(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn extra_chunks_are_skipped() {
        let base = hand_built(16000, &[5, -5]);
        let mut bytes = base[..36].to_vec();
        bytes.extend(b"LIST");
        bytes.extend(3u32.to_le_bytes());
        bytes.extend([1, 2, 3, 0]); // padded to even
        bytes.extend(&base[36..]);
        let rec = decode_wav(&bytes).unwrap();
        assert_eq!(rec.samples, vec![5.0 / 32768.0, -5.0 / 32768.0]);
    }
}
