//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the library's own arithmetic.

#![allow(dead_code)]

use std::f64::consts::PI;

use phoneboost::dsp::Stage;
use phoneboost::{HaarFeature, HogPatch, Spectrogram};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, bands: usize, cols: usize) -> Spectrogram {
    Spectrogram::from_fn(bands, cols, Stage::Normalized, |_, _| rng.random::<f64>())
}

/// Block weight of pixel `(b, c)` inside a Haar feature, found by asking
/// which strip of the pattern the pixel falls in.
fn haar_pixel_weight(kind: &str, rel_b: usize, rel_c: usize, h: usize, w: usize) -> f64 {
    let third = |x: usize, n: usize| 3 * x / n;
    let half = |x: usize, n: usize| 2 * x / n;
    match kind {
        "edge_horizontal" => [1.0, -1.0][half(rel_b, h)],
        "edge_vertical" => [1.0, -1.0][half(rel_c, w)],
        "line_horizontal" => [-1.0, 2.0, -1.0][third(rel_b, h)],
        "line_vertical" => [-1.0, 2.0, -1.0][third(rel_c, w)],
        "center_surround" => {
            if third(rel_b, h) == 1 && third(rel_c, w) == 1 {
                8.0
            } else {
                -1.0
            }
        }
        "diagonal" => {
            if half(rel_b, h) == half(rel_c, w) {
                1.0
            } else {
                -1.0
            }
        }
        other => panic!("unknown kind {other}"),
    }
}

/// Direct weighted sum over every pixel the feature covers.
pub fn haar_direct(f: &HaarFeature, s: &Spectrogram) -> f64 {
    let kind = f.kind.name();
    let mut sum = 0.0;
    for b in f.band..f.band + f.height {
        for c in f.column..f.column + f.width {
            sum += haar_pixel_weight(kind, b - f.band, c - f.column, f.height, f.width) * s.get(b, c);
        }
    }
    sum
}

/// Max-normalized HoG histogram computed pixel by pixel from the raw image.
pub fn hog_naive(s: &Spectrogram, p: &HogPatch) -> [f64; 9] {
    let mut h = [0.0; 9];
    let cb = p.band as f64 + (p.height as f64 - 1.0) / 2.0;
    let cc = p.column as f64 + (p.width as f64 - 1.0) / 2.0;
    for b in p.band..p.band + p.height {
        for c in p.column..p.column + p.width {
            if b == 0 || c == 0 || b + 1 >= s.bands() || c + 1 >= s.columns() {
                continue;
            }
            let dx = s.get(b, c + 1) - s.get(b, c - 1);
            let dy = s.get(b + 1, c) - s.get(b - 1, c);
            let mut angle = dy.atan2(dx);
            if angle < 0.0 {
                angle += 2.0 * PI;
            }
            let bin = ((angle * 9.0 / (2.0 * PI)).floor() as usize).min(8);
            let dist = ((b as f64 - cb).powi(2) + (c as f64 - cc).powi(2)).sqrt();
            h[bin] += (dx * dx + dy * dy).sqrt() / (dist + 0.5);
        }
    }
    let max = h.iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        h.iter_mut().for_each(|v| *v /= max);
    }
    h
}

/// `|DFT|²` of a Hamming-windowed frame, bins `0..=N/2`, by the definition.
pub fn dft_power(frame: &[f64]) -> Vec<f64> {
    let n = frame.len();
    let windowed: Vec<f64> = frame
        .iter()
        .enumerate()
        .map(|(i, &x)| x * (0.54 - 0.46 * (2.0 * PI * i as f64 / (n as f64 - 1.0)).cos()))
        .collect();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &x) in windowed.iter().enumerate() {
                let a = -2.0 * PI * (k * i % n) as f64 / n as f64;
                re += x * a.cos();
                im += x * a.sin();
            }
            re * re + im * im
        })
        .collect()
}

pub fn random_signal(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Random feature matrix with labels that depend on a few of the features
/// plus label noise, as feature-major columns.
pub fn random_dataset(rng: &mut ChaCha8Rng, samples: usize, features: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
    let rows: Vec<Vec<f64>> = (0..samples)
        .map(|_| (0..features).map(|_| rng.random::<f64>()).collect())
        .collect();
    let labels: Vec<bool> = rows
        .iter()
        .map(|r| {
            let clean = r[0] + 0.5 * r[1 % features] > 0.75;
            if rng.random::<f64>() < 0.1 {
                !clean
            } else {
                clean
            }
        })
        .collect();
    let columns = (0..features).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    (columns, labels)
}

/// A random tournament over `n` phones: `table[i][j]` for `i < j` says
/// whether `i` beats `j`.
pub fn random_outcomes(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<bool>> {
    (0..n).map(|_| (0..n).map(|_| rng.random::<bool>()).collect()).collect()
}

pub fn winner(table: &[Vec<bool>], i: usize, j: usize) -> usize {
    let (lo, hi) = (i.min(j), i.max(j));
    if table[lo][hi] {
        lo
    } else {
        hi
    }
}
