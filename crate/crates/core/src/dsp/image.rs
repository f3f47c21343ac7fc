//! Image-level transforms on spectrograms.

use super::{Spectrogram, Stage};
use crate::{Error, Result};

/// Duration boundaries (seconds) of the three stacked frames:
/// `[0, 0.075)`, `[0.075, 0.150)`, `[0.150, ∞)`.
pub const STACK_BOUNDARIES: [f64; 2] = [0.075, 0.150];

/// Source coordinate of target index `i` when resampling `from` points onto
/// `to` points with the end points aligned.
fn source_coord(i: usize, from: usize, to: usize) -> f64 {
    if from == 1 {
        0.0
    } else if to == 1 {
        (from - 1) as f64 / 2.0
    } else {
        (i * (from - 1)) as f64 / (to - 1) as f64
    }
}

fn lerp_index(x: f64, len: usize) -> (usize, usize, f64) {
    let i0 = (x.floor() as usize).min(len - 1);
    let i1 = (i0 + 1).min(len - 1);
    (i0, i1, x - i0 as f64)
}

/// Bilinear resampling onto a `bands × columns` grid, corners aligned. The
/// output is a convex combination of input values, so `[0, 1]` is preserved.
pub fn warp(s: &Spectrogram, bands: usize, columns: usize) -> Result<Spectrogram> {
    if bands == 0 || columns == 0 {
        return Err(Error::InvalidArgument(format!(
            "warp target must be at least 1x1, got {bands}x{columns}"
        )));
    }
    if s.bands() == bands && s.columns() == columns {
        return Ok(s.clone());
    }
    let cols: Vec<_> = (0..columns)
        .map(|j| lerp_index(source_coord(j, s.columns(), columns), s.columns()))
        .collect();
    Ok(Spectrogram::from_fn(bands, columns, s.stage(), |i, j| {
        let (b0, b1, fb) = lerp_index(source_coord(i, s.bands(), bands), s.bands());
        let (c0, c1, fc) = cols[j];
        let top = s.get(b0, c0) * (1.0 - fc) + s.get(b0, c1) * fc;
        let bottom = s.get(b1, c0) * (1.0 - fc) + s.get(b1, c1) * fc;
        top * (1.0 - fb) + bottom * fb
    }))
}

/// Three stacked frames of `bands_per_frame` bands each. The spectrogram is
/// warped to one frame and placed in the frame whose duration range holds
/// `duration`; the other two frames stay zero.
pub fn stack_frames(
    s: &Spectrogram,
    duration: f64,
    bands_per_frame: usize,
    columns_per_frame: usize,
) -> Result<Spectrogram> {
    if !(duration > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "stacked frames need a positive duration, got {duration}"
        )));
    }
    let frame = STACK_BOUNDARIES
        .iter()
        .position(|&b| duration < b)
        .unwrap_or(STACK_BOUNDARIES.len());
    let warped = warp(s, bands_per_frame, columns_per_frame)?;
    let mut out = Spectrogram::zeros(3 * bands_per_frame, columns_per_frame, s.stage());
    for b in 0..bands_per_frame {
        for c in 0..columns_per_frame {
            out.set(frame * bands_per_frame + b, c, warped.get(b, c));
        }
    }
    Ok(out)
}

/// Same-size convolution of one row with a unit-sum kernel, replicating the
/// edge values.
fn convolve_row(row: &[f64], kernel: &[f64], out: &mut [f64]) {
    let half = (kernel.len() / 2) as isize;
    let last = row.len() as isize - 1;
    for (c, o) in out.iter_mut().enumerate() {
        *o = kernel
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let idx = (c as isize + k as isize - half).clamp(0, last);
                w * row[idx as usize]
            })
            .sum();
    }
}

/// Original, rows smoothed with `[1,2,1]/4`, rows smoothed with
/// `[1,2,5,2,1]/11`, stacked vertically in that order.
pub fn smooth_stack(s: &Spectrogram) -> Spectrogram {
    const K1: [f64; 3] = [1.0 / 4.0, 2.0 / 4.0, 1.0 / 4.0];
    const K2: [f64; 5] = [1.0 / 11.0, 2.0 / 11.0, 5.0 / 11.0, 2.0 / 11.0, 1.0 / 11.0];
    let (bands, columns) = (s.bands(), s.columns());
    let mut out = Spectrogram::zeros(3 * bands, columns, s.stage());
    let mut buf = vec![0.0; columns];
    for b in 0..bands {
        let row = s.row(b);
        for (c, &v) in row.iter().enumerate() {
            out.set(b, c, v);
        }
        for (copy, kernel) in [(1, &K1[..]), (2, &K2[..])] {
            convolve_row(row, kernel, &mut buf);
            for (c, &v) in buf.iter().enumerate() {
                // unit-sum kernels can drift a hair past 1 in floating point
                let v = if s.stage() == Stage::Normalized { v.clamp(0.0, 1.0) } else { v };
                out.set(copy * bands + b, c, v);
            }
        }
    }
    out
}
