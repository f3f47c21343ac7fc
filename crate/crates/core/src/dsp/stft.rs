use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};

use super::{Spectrogram, Stage};
use crate::{Error, Result};

/// Frame length and hop of the short-time Fourier transform. The analysis
/// window is always Hamming.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftConfig {
    pub frame_length: usize,
    pub increment: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig {
            frame_length: 128,
            increment: 64,
        }
    }
}

impl StftConfig {
    pub fn new(frame_length: usize, increment: usize) -> Result<Self> {
        let cfg = StftConfig {
            frame_length,
            increment,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_length < 2 || !self.frame_length.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "frame length must be even and at least 2, got {}",
                self.frame_length
            )));
        }
        if self.increment == 0 || self.increment > self.frame_length {
            return Err(Error::InvalidArgument(format!(
                "increment must be in 1..={}, got {}",
                self.frame_length, self.increment
            )));
        }
        Ok(())
    }

    /// Number of nonnegative-frequency bins, `N/2 + 1`.
    pub fn bins(&self) -> usize {
        self.frame_length / 2 + 1
    }

    /// Columns produced for an input of `len` samples.
    pub fn columns_for(&self, len: usize) -> usize {
        if len < self.frame_length {
            0
        } else {
            (len - self.frame_length) / self.increment + 1
        }
    }
}

/// `w[n] = 0.54 − 0.46·cos(2πn/(N−1))`.
pub fn hamming(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "Hamming window needs at least 2 points, got {n}"
        )));
    }
    let denom = (n - 1) as f64;
    Ok((0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / denom).cos())
        .collect())
}

/// Power spectrogram: column `m` holds `|X_m[k]|²` for `k = 0..=N/2`, where
/// `X_m` is the DFT of the Hamming-windowed frame `x[i·m .. i·m + N)`, i.e.
/// the frame centered at `N/2 + i·m`.
pub fn stft_power(signal: &[f64], cfg: &StftConfig) -> Result<Spectrogram> {
    cfg.validate()?;
    let n = cfg.frame_length;
    if signal.len() < n {
        return Err(Error::InvalidArgument(format!(
            "signal of {} samples is shorter than the {n}-sample frame",
            signal.len()
        )));
    }
    let window = hamming(n)?;
    let columns = cfg.columns_for(signal.len());
    let bins = cfg.bins();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut out = Spectrogram::zeros(bins, columns, Stage::Power);
    for m in 0..columns {
        let frame = &signal[m * cfg.increment..m * cfg.increment + n];
        for ((b, &x), &w) in buf.iter_mut().zip(frame).zip(&window) {
            *b = Complex::new(x * w, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (k, c) in buf.iter().take(bins).enumerate() {
            out.set(k, m, c.norm_sqr());
        }
    }
    Ok(out)
}
