//! Mel-frequency cepstral coefficients and their time derivatives.

use std::f64::consts::PI;

use super::{Spectrogram, Stage};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MfccFrame {
    pub coefficients: Vec<f64>,
    pub delta: Vec<f64>,
    pub delta_delta: Vec<f64>,
}

impl MfccFrame {
    fn new(coefficients: Vec<f64>) -> Self {
        let n = coefficients.len();
        MfccFrame {
            coefficients,
            delta: vec![0.0; n],
            delta_delta: vec![0.0; n],
        }
    }

    /// Coefficients, deltas and delta-deltas concatenated.
    pub fn flatten(&self) -> impl Iterator<Item = f64> + '_ {
        self.coefficients
            .iter()
            .chain(&self.delta)
            .chain(&self.delta_delta)
            .copied()
    }
}

fn dct_scale(k: usize, n: usize) -> f64 {
    if k == 0 {
        (1.0 / n as f64).sqrt()
    } else {
        (2.0 / n as f64).sqrt()
    }
}

/// Orthonormal DCT-II.
pub fn dct_ortho(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let sum: f64 = x
                .iter()
                .enumerate()
                .map(|(i, &v)| v * (PI * (i as f64 + 0.5) * k as f64 / n as f64).cos())
                .sum();
            dct_scale(k, n) * sum
        })
        .collect()
}

/// Inverse of [`dct_ortho`] (orthonormal DCT-III).
pub fn idct_ortho(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    (0..n)
        .map(|i| {
            c.iter()
                .enumerate()
                .map(|(k, &v)| dct_scale(k, n) * v * (PI * (i as f64 + 0.5) * k as f64 / n as f64).cos())
                .sum()
        })
        .collect()
}

/// First `n_coeffs` DCT coefficients of every column of a log-mel
/// spectrogram.
pub fn mfcc(log_mel: &Spectrogram, n_coeffs: usize) -> Result<Vec<MfccFrame>> {
    log_mel.require_stage(Stage::Log, "MFCC")?;
    if n_coeffs == 0 || n_coeffs > log_mel.bands() {
        return Err(Error::InvalidArgument(format!(
            "MFCC count must be in 1..={}, got {n_coeffs}",
            log_mel.bands()
        )));
    }
    Ok((0..log_mel.columns())
        .map(|c| {
            let mut coeffs = dct_ortho(&log_mel.column(c));
            coeffs.truncate(n_coeffs);
            MfccFrame::new(coeffs)
        })
        .collect())
}

/// Regression-style central difference with half-width `k`, replicating
/// the first and last frames past the ends.
fn regression(series: &[Vec<f64>], half_width: usize) -> Vec<Vec<f64>> {
    let t_max = series.len() as isize - 1;
    let denom = 2.0 * (1..=half_width).map(|k| (k * k) as f64).sum::<f64>();
    let dim = series[0].len();
    (0..series.len() as isize)
        .map(|t| {
            (0..dim)
                .map(|d| {
                    (1..=half_width as isize)
                        .map(|k| {
                            let ahead = series[(t + k).clamp(0, t_max) as usize][d];
                            let behind = series[(t - k).clamp(0, t_max) as usize][d];
                            k as f64 * (ahead - behind)
                        })
                        .sum::<f64>()
                        / denom
                })
                .collect()
        })
        .collect()
}

/// Fills `delta` from the coefficients and `delta_delta` from the deltas.
pub fn deltas(frames: &[MfccFrame], half_width: usize) -> Result<Vec<MfccFrame>> {
    if frames.is_empty() {
        return Err(Error::InvalidArgument("deltas of an empty frame sequence".into()));
    }
    if half_width == 0 {
        return Err(Error::InvalidArgument("delta half-width must be at least 1".into()));
    }
    let coeffs: Vec<Vec<f64>> = frames.iter().map(|f| f.coefficients.clone()).collect();
    let d1 = regression(&coeffs, half_width);
    let d2 = regression(&d1, half_width);
    Ok(coeffs
        .into_iter()
        .zip(d1)
        .zip(d2)
        .map(|((coefficients, delta), delta_delta)| MfccFrame {
            coefficients,
            delta,
            delta_delta,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames(values: impl IntoIterator<Item = f64>) -> Vec<MfccFrame> {
        values.into_iter().map(|v| MfccFrame::new(vec![v])).collect()
    }

    #[test]
    fn constant_column_has_only_dc() {
        let log = Spectrogram::from_fn(40, 3, Stage::Log, |_, _| -2.5);
        let out = mfcc(&log, 16).unwrap();
        assert_eq!(out.len(), 3);
        for f in &out {
            assert_eq!(f.coefficients.len(), 16);
            assert!((f.coefficients[0] - (-2.5 * 40f64.sqrt())).abs() < 1e-12);
            assert!(f.coefficients[1..].iter().all(|c| c.abs() < 1e-12));
        }
    }

    #[test]
    fn dct_round_trip() {
        let x: Vec<f64> = (0..23).map(|i| ((i * 37) % 11) as f64 - 4.2).collect();
        let back = idct_ortho(&dct_ortho(&x));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn coefficient_count_checked() {
        let log = Spectrogram::zeros(14, 2, Stage::Log);
        assert!(mfcc(&log, 15).is_err());
        assert!(mfcc(&log, 0).is_err());
        assert!(mfcc(&Spectrogram::zeros(14, 2, Stage::Mel), 4).is_err());
    }

    #[test]
    fn constant_sequence_has_zero_deltas() {
        let out = deltas(&frames([3.0; 7]), 2).unwrap();
        assert!(out.iter().all(|f| f.delta[0] == 0.0 && f.delta_delta[0] == 0.0));
    }

    #[test]
    fn linear_sequence_interior_delta_is_slope() {
        let out = deltas(&frames((0..10).map(|t| 1.5 * t as f64 - 2.0)), 2).unwrap();
        for f in &out[2..8] {
            assert!((f.delta[0] - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_at_five() {
        // Σ k(c[5+k] − c[5−k]) / (2Σk²) = (1·20 + 2·40) / 10
        let out = deltas(&frames((0..12).map(|t| (t * t) as f64)), 2).unwrap();
        assert!((out[5].delta[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn empty_and_zero_width_rejected() {
        assert!(deltas(&[], 2).is_err());
        assert!(deltas(&frames([1.0]), 0).is_err());
    }
}
