use crate::ingest::{PhoneSegment, Recording};

/// How much audio around a segment is analysed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowMode {
    /// Exactly `[start, end)`.
    Exact,
    /// `[c − dt, c + dt)` around the segment center `c`, `dt` in seconds.
    FixedCenter { half_width: f64 },
    /// `[start − m, end + m)`, `m` in seconds.
    Margins { margin: f64 },
}

fn seconds_to_samples(secs: f64, rate: u32) -> usize {
    (secs * f64::from(rate)).round().max(0.0) as usize
}

/// Copies `[from, to)` out of the recording, reading zeros outside it.
fn padded_slice(samples: &[f64], from: isize, to: isize) -> Vec<f64> {
    (from..to)
        .map(|i| {
            if i >= 0 && (i as usize) < samples.len() {
                samples[i as usize]
            } else {
                0.0
            }
        })
        .collect()
}

pub fn extract_segment_window(rec: &Recording, seg: &PhoneSegment, mode: WindowMode) -> Vec<f64> {
    let (start, end) = (seg.start as isize, seg.end as isize);
    match mode {
        WindowMode::Exact => padded_slice(&rec.samples, start, end),
        WindowMode::FixedCenter { half_width } => {
            let dt = seconds_to_samples(half_width, rec.sample_rate) as isize;
            let c = (start + end) / 2;
            padded_slice(&rec.samples, c - dt, c + dt)
        }
        WindowMode::Margins { margin } => {
            let m = seconds_to_samples(margin, rec.sample_rate) as isize;
            padded_slice(&rec.samples, start - m, end + m)
        }
    }
}
