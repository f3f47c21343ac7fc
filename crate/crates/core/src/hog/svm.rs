//! Linear SVM on 9-bin histograms: dual coordinate descent on the hinge
//! loss with a regularized bias term.

use rand::seq::SliceRandom;

use super::{HogHistogram, HOG_BINS};
use crate::{seed, Error, Result};

const DIM: usize = HOG_BINS + 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    /// Hinge-loss weight.
    pub c: f64,
    pub max_epochs: usize,
    /// Stop once the projected-gradient spread drops below this.
    pub tolerance: f64,
    /// Seeds the per-epoch visiting order. The order never depends on the
    /// labels, so swapping the classes negates the solution exactly.
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            max_epochs: 200,
            tolerance: 1e-3,
            seed: 0,
        }
    }
}

/// Weights and bias of `g(h) = <w, h> + b`, positive for the first class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmFit {
    pub weights: [f64; HOG_BINS],
    pub bias: f64,
    pub epochs: usize,
}

pub fn train_patch_svm(pos: &[HogHistogram], neg: &[HogHistogram]) -> Result<SvmFit> {
    train_patch_svm_with(pos, neg, &SvmParams::default())
}

pub fn train_patch_svm_with(
    pos: &[HogHistogram],
    neg: &[HogHistogram],
    params: &SvmParams,
) -> Result<SvmFit> {
    let samples: Vec<HogHistogram> = pos.iter().chain(neg).copied().collect();
    let labels: Vec<bool> = (0..samples.len()).map(|i| i < pos.len()).collect();
    train_linear_svm(&samples, &labels, params)
}

/// Trains on `samples` with `labels[i] == true` meaning the positive class.
/// Samples are visited in a seeded order that depends only on their count.
pub fn train_linear_svm(
    samples: &[HogHistogram],
    labels: &[bool],
    params: &SvmParams,
) -> Result<SvmFit> {
    if samples.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} samples but {} labels",
            samples.len(),
            labels.len()
        )));
    }
    if !labels.iter().any(|&l| l) || labels.iter().all(|&l| l) {
        return Err(Error::InvalidArgument(
            "SVM training needs samples of both classes".into(),
        ));
    }
    if !(params.c > 0.0) {
        return Err(Error::InvalidArgument("SVM C must be positive".into()));
    }
    let xs: Vec<[f64; DIM]> = samples
        .iter()
        .map(|h| {
            let mut x = [1.0; DIM];
            x[..HOG_BINS].copy_from_slice(&h.bins);
            x
        })
        .collect();
    let ys: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let qd: Vec<f64> = xs.iter().map(|x| dot(x, x)).collect();
    let c = params.c;

    let mut alpha = vec![0.0; xs.len()];
    let mut w = [0.0; DIM];
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut rng = seed::rng(params.seed);
    let mut epochs = 0;
    while epochs < params.max_epochs {
        epochs += 1;
        order.shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for &i in &order {
            let g = ys[i] * dot(&w, &xs[i]) - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).clamp(0.0, c);
                let step = (alpha[i] - old) * ys[i];
                for (wk, xk) in w.iter_mut().zip(&xs[i]) {
                    *wk += step * xk;
                }
            }
        }
        if pg_max - pg_min < params.tolerance {
            break;
        }
    }
    let mut weights = [0.0; HOG_BINS];
    weights.copy_from_slice(&w[..HOG_BINS]);
    Ok(SvmFit {
        weights,
        bias: w[HOG_BINS],
        epochs,
    })
}

fn dot(a: &[f64; DIM], b: &[f64; DIM]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
