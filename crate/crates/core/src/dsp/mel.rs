use super::{Spectrogram, Stage};
use crate::{Error, Result};

/// Added to mel energies before the logarithm.
pub const LOG_EPSILON: f64 = 1e-10;

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters over the FFT bins of a power spectrogram.
///
/// Filter peaks are equally spaced on the mel scale, the first at `f_min`
/// and the last at `f_max`; each triangle reaches 1 at its own peak and 0 at
/// its neighbors' peaks. Bins outside `[f_min, f_max]` carry no weight.
#[derive(Debug, Clone, PartialEq)]
pub struct MelBank {
    n_fft_bins: usize,
    sample_rate: u32,
    f_min: f64,
    f_max: f64,
    /// Mel positions of every triangle corner: left edge of filter 0, the
    /// `n_mel` peaks, right edge of the last filter.
    corners_mel: Vec<f64>,
    weights: Vec<f64>,
}

pub fn build_mel_bank(
    n_mel: usize,
    n_fft_bins: usize,
    sample_rate: u32,
    f_min: f64,
    f_max: f64,
) -> Result<MelBank> {
    if n_mel == 0 {
        return Err(Error::InvalidArgument("mel bank needs at least one band".into()));
    }
    if n_fft_bins < 2 {
        return Err(Error::InvalidArgument("mel bank needs at least two FFT bins".into()));
    }
    let nyquist = f64::from(sample_rate) / 2.0;
    if !(f_min >= 0.0 && f_min < f_max && f_max <= nyquist) {
        return Err(Error::InvalidArgument(format!(
            "mel frequency range [{f_min}, {f_max}] must satisfy 0 <= f_min < f_max <= {nyquist}"
        )));
    }
    let (lo, hi) = (hz_to_mel(f_min), hz_to_mel(f_max));
    let (first_peak, spacing) = if n_mel == 1 {
        ((lo + hi) / 2.0, hi - lo)
    } else {
        (lo, (hi - lo) / (n_mel - 1) as f64)
    };
    let corners_mel: Vec<f64> = (0..n_mel + 2)
        .map(|j| first_peak + (j as f64 - 1.0) * spacing)
        .collect();

    let mut bank = MelBank {
        n_fft_bins,
        sample_rate,
        f_min,
        f_max,
        corners_mel,
        weights: vec![0.0; n_mel * n_fft_bins],
    };
    let bin_hz = nyquist / (n_fft_bins - 1) as f64;
    for k in 0..n_mel {
        for bin in 0..n_fft_bins {
            let f = bin as f64 * bin_hz;
            if f >= f_min && f <= f_max {
                bank.weights[k * n_fft_bins + bin] = bank.response(k, f);
            }
        }
    }
    Ok(bank)
}

impl MelBank {
    pub fn bands(&self) -> usize {
        self.corners_mel.len() - 2
    }

    pub fn fft_bins(&self) -> usize {
        self.n_fft_bins
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn range(&self) -> (f64, f64) {
        (self.f_min, self.f_max)
    }

    pub fn peak_mels(&self) -> &[f64] {
        &self.corners_mel[1..self.corners_mel.len() - 1]
    }

    pub fn peak_frequencies(&self) -> Vec<f64> {
        self.peak_mels().iter().map(|&m| mel_to_hz(m)).collect()
    }

    /// Weight of filter `k` at bin `bin`.
    pub fn weight(&self, k: usize, bin: usize) -> f64 {
        self.weights[k * self.n_fft_bins + bin]
    }

    pub fn filter(&self, k: usize) -> &[f64] {
        &self.weights[k * self.n_fft_bins..(k + 1) * self.n_fft_bins]
    }

    /// Triangle of filter `k` evaluated at an arbitrary frequency, linear in Hz
    /// between its corners.
    pub fn response(&self, k: usize, hz: f64) -> f64 {
        let left = mel_to_hz(self.corners_mel[k]);
        let peak = mel_to_hz(self.corners_mel[k + 1]);
        let right = mel_to_hz(self.corners_mel[k + 2]);
        if hz == peak {
            1.0
        } else if hz > left && hz < peak {
            (hz - left) / (peak - left)
        } else if hz > peak && hz < right {
            (right - hz) / (right - peak)
        } else {
            0.0
        }
    }

    /// Applies the bank to every column of a power spectrogram.
    pub fn apply(&self, power: &Spectrogram) -> Result<Spectrogram> {
        power.require_stage(Stage::Power, "mel filtering")?;
        if power.bands() != self.n_fft_bins {
            return Err(Error::InvalidArgument(format!(
                "mel bank expects {} FFT bins, spectrogram has {}",
                self.n_fft_bins,
                power.bands()
            )));
        }
        let mut out = Spectrogram::zeros(self.bands(), power.columns(), Stage::Mel);
        for k in 0..self.bands() {
            let filter = self.filter(k);
            for (bin, &w) in filter.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for c in 0..power.columns() {
                    let v = out.get(k, c) + w * power.get(bin, c);
                    out.set(k, c, v);
                }
            }
        }
        Ok(out)
    }
}

/// `log10(value + ε)` of a mel spectrogram.
pub fn log_spectrogram(mel: &Spectrogram) -> Result<Spectrogram> {
    mel.require_stage(Stage::Mel, "log compression")?;
    let values = mel.values().iter().map(|&v| (v + LOG_EPSILON).log10()).collect();
    Spectrogram::new(mel.bands(), mel.columns(), values, Stage::Log)
}

/// Clip interval in log10 units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipRange {
    pub low: f64,
    pub high: f64,
}

impl ClipRange {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(Error::InvalidArgument(format!(
                "clip range [{low}, {high}] must be finite with low < high"
            )));
        }
        Ok(ClipRange { low, high })
    }

    /// `[reference − span, reference]`.
    pub fn below(reference: f64, span: f64) -> Result<Self> {
        ClipRange::new(reference - span, reference)
    }
}

/// Clips a log spectrogram to `clip` and maps that interval affinely onto
/// `[0, 1]`.
pub fn normalize(log: &Spectrogram, clip: ClipRange) -> Result<Spectrogram> {
    log.require_stage(Stage::Log, "normalization")?;
    let scale = clip.high - clip.low;
    let values = log
        .values()
        .iter()
        .map(|&v| (v.clamp(clip.low, clip.high) - clip.low) / scale)
        .collect();
    Spectrogram::new(log.bands(), log.columns(), values, Stage::Normalized)
}

/// Mel filtering, `log10(· + ε)`, clipping and rescaling to `[0, 1]`.
pub fn process_spectrogram(power: &Spectrogram, bank: &MelBank, clip: ClipRange) -> Result<Spectrogram> {
    normalize(&log_spectrogram(&bank.apply(power)?)?, clip)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bank14() -> MelBank {
        build_mel_bank(14, 65, 16000, 0.0, 8000.0).unwrap()
    }

    #[test]
    fn filters_peak_at_one_and_vanish_at_neighbor_peaks() {
        let bank = bank14();
        let peaks = bank.peak_frequencies();
        for k in 0..bank.bands() {
            assert_eq!(bank.response(k, peaks[k]), 1.0);
            if k + 1 < peaks.len() {
                assert_eq!(bank.response(k, peaks[k + 1]), 0.0);
                assert_eq!(bank.response(k + 1, peaks[k]), 0.0);
            }
        }
    }

    #[test]
    fn peaks_uniform_in_mel() {
        let bank = bank14();
        // independent recomputation of the mel positions
        let lo = 2595.0 * (1.0f64).log10();
        let hi = 2595.0 * (1.0 + 8000.0 / 700.0f64).log10();
        let step = (hi - lo) / 13.0;
        for (k, m) in bank.peak_mels().iter().enumerate() {
            let expect = lo + k as f64 * step;
            assert!((m - expect).abs() <= 1e-9 * expect.abs().max(1.0));
        }
        let peaks = bank.peak_frequencies();
        let mels: Vec<f64> = peaks.iter().map(|&f| hz_to_mel(f)).collect();
        for w in mels.windows(3) {
            let (d1, d2) = (w[1] - w[0], w[2] - w[1]);
            assert!(((d1 - d2) / d1).abs() < 1e-9);
        }
    }

    #[test]
    fn every_bin_in_range_is_covered() {
        for (n_mel, f_min, f_max) in [(14, 0.0, 8000.0), (40, 100.0, 7600.0), (1, 0.0, 8000.0)] {
            let bank = build_mel_bank(n_mel, 65, 16000, f_min, f_max).unwrap();
            for bin in 0..65 {
                let f = bin as f64 * 125.0;
                let total: f64 = (0..n_mel).map(|k| bank.weight(k, bin)).sum();
                if f >= f_min && f <= f_max {
                    assert!(total > 0.0, "bin {bin} uncovered");
                } else {
                    assert_eq!(total, 0.0);
                }
            }
        }
    }

    #[test]
    fn each_filter_single_peak_and_overlaps_neighbor() {
        let bank = build_mel_bank(20, 257, 16000, 0.0, 8000.0).unwrap();
        for k in 0..20 {
            let f = bank.filter(k);
            let argmax = f
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            // rising then falling
            assert!(f[..=argmax].windows(2).all(|w| w[0] <= w[1]));
            assert!(f[argmax..].windows(2).all(|w| w[0] >= w[1]));
            if k + 1 < 20 {
                let next = bank.filter(k + 1);
                assert!(f.iter().zip(next).any(|(a, b)| *a > 0.0 && *b > 0.0));
            }
        }
    }

    #[test]
    fn invalid_ranges() {
        assert!(build_mel_bank(14, 65, 16000, 0.0, 9000.0).is_err());
        assert!(build_mel_bank(14, 65, 16000, 500.0, 500.0).is_err());
        assert!(build_mel_bank(0, 65, 16000, 0.0, 8000.0).is_err());
    }

    #[test]
    fn constant_power_maps_inside_unit_interval() {
        let bank = bank14();
        let power = Spectrogram::from_fn(65, 4, Stage::Power, |_, _| 1.0);
        let clip = ClipRange::new(-3.0, 3.0).unwrap();
        let out = process_spectrogram(&power, &bank, clip).unwrap();
        for b in 0..out.bands() {
            let first = out.get(b, 0);
            assert!(first > 0.0 && first < 1.0);
            assert!(out.row(b).iter().all(|&v| v == first));
        }
    }

    #[test]
    fn below_floor_maps_to_zero() {
        let bank = bank14();
        let power = Spectrogram::from_fn(65, 2, Stage::Power, |_, _| 1e-9);
        let out = process_spectrogram(&power, &bank, ClipRange::new(-2.0, 2.0).unwrap()).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stage_mismatch_rejected() {
        let bank = bank14();
        let s = Spectrogram::zeros(65, 2, Stage::Mel);
        assert!(process_spectrogram(&s, &bank, ClipRange::new(0.0, 1.0).unwrap()).is_err());
    }
}
