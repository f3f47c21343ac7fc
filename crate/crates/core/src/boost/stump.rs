use super::{SampleMatrix, Stump};
use crate::{Error, Result};

/// A fitted stump and its weighted error: 0/1 error for discrete stumps,
/// squared error for gentle ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StumpFit {
    pub stump: Stump,
    pub error: f64,
}

/// Threshold strictly between `a < b`, falling back to `a` when the
/// midpoint rounds up to `b`.
#[inline]
fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m < b {
        m
    } else {
        a
    }
}

#[inline]
fn sentinel(min: f64) -> f64 {
    min - (1.0 + min.abs())
}

/// Candidate thresholds for a feature: one below the minimum, then the
/// midpoints between consecutive distinct values, ascending.
pub fn candidate_thresholds(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let mut out = Vec::with_capacity(v.len());
    if let Some(&min) = v.first() {
        out.push(sentinel(min));
    }
    out.extend(v.windows(2).map(|w| midpoint(w[0], w[1])));
    out
}

/// Best split of one feature found by a cumulative scan: `(error estimate,
/// threshold, polarity)`. Polarity is unused by gentle scans.
pub(crate) type Split = (f64, f64, f64);

/// Cumulative scan for the discrete 0/1 error. `wpos[i]`/`wneg[i]` hold the
/// sample weight on the sample's own class and 0 on the other.
pub(crate) fn scan_discrete(
    m: &SampleMatrix,
    j: usize,
    wpos: &[f64],
    wneg: &[f64],
    total_pos: f64,
    total_neg: f64,
) -> Split {
    let col = m.column(j);
    let ord = m.sorted(j);
    // everything above the sentinel: +1 errs on negatives, −1 on positives
    let mut best = (total_neg, sentinel(col[ord[0] as usize]), 1.0);
    if total_pos < best.0 {
        best = (total_pos, best.1, -1.0);
    }
    let (mut lpos, mut lneg) = (0.0, 0.0);
    for k in 1..ord.len() {
        let i = ord[k - 1] as usize;
        lpos += wpos[i];
        lneg += wneg[i];
        let (a, b) = (col[i], col[ord[k] as usize]);
        if a == b {
            continue;
        }
        let err_plus = lpos + (total_neg - lneg);
        let err_minus = lneg + (total_pos - lpos);
        if err_plus < best.0 {
            best = (err_plus, midpoint(a, b), 1.0);
        }
        if err_minus < best.0 {
            best = (err_minus, midpoint(a, b), -1.0);
        }
    }
    best
}

#[inline]
fn explained(s: f64, w: f64) -> f64 {
    if w > 0.0 {
        s * s / w
    } else {
        0.0
    }
}

/// Cumulative scan for the gentle weighted squared error
/// `W − S_above²/W_above − S_below²/W_below`.
pub(crate) fn scan_gentle(m: &SampleMatrix, j: usize, w: &[f64], wy: &[f64], total_w: f64, total_wy: f64) -> Split {
    let col = m.column(j);
    let ord = m.sorted(j);
    let mut best = (
        total_w - explained(total_wy, total_w),
        sentinel(col[ord[0] as usize]),
        1.0,
    );
    let (mut lw, mut ls) = (0.0, 0.0);
    for k in 1..ord.len() {
        let i = ord[k - 1] as usize;
        lw += w[i];
        ls += wy[i];
        let (a, b) = (col[i], col[ord[k] as usize]);
        if a == b {
            continue;
        }
        let err = total_w - explained(total_wy - ls, total_w - lw) - explained(ls, lw);
        if err < best.0 {
            best = (err, midpoint(a, b), 1.0);
        }
    }
    best
}

fn check(m: &SampleMatrix, weights: &[f64], j: usize) -> Result<()> {
    if weights.len() != m.samples() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} samples",
            weights.len(),
            m.samples()
        )));
    }
    if j >= m.features() {
        return Err(Error::InvalidArgument(format!(
            "feature {j} out of range for {} features",
            m.features()
        )));
    }
    Ok(())
}

/// Weighted 0/1 error of a discrete stump, summed in sample order.
pub(crate) fn discrete_error(m: &SampleMatrix, weights: &[f64], stump: &Stump) -> f64 {
    let col = m.column(stump.feature);
    let y = m.labels();
    (0..m.samples())
        .filter(|&i| stump.eval(col[i]) != y[i])
        .map(|i| weights[i])
        .sum()
}

/// Gentle stump with closed-form branch means at `threshold`, and its
/// weighted squared error.
pub(crate) fn gentle_at(m: &SampleMatrix, weights: &[f64], j: usize, threshold: f64) -> StumpFit {
    let col = m.column(j);
    let y = m.labels();
    let (mut wa, mut sa, mut wb, mut sb) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..m.samples() {
        if col[i] > threshold {
            wa += weights[i];
            sa += weights[i] * y[i];
        } else {
            wb += weights[i];
            sb += weights[i] * y[i];
        }
    }
    let mean = |s: f64, w: f64| if w > 0.0 { s / w } else { 0.0 };
    let stump = Stump {
        feature: j,
        threshold,
        above: mean(sa, wa),
        below: mean(sb, wb),
    };
    let error = (0..m.samples())
        .map(|i| {
            let r = y[i] - stump.eval(col[i]);
            weights[i] * r * r
        })
        .sum();
    StumpFit { stump, error }
}

/// Threshold and polarity minimizing the weighted 0/1 error of feature `j`.
/// Ties go to the lower threshold, then to polarity +1.
pub fn fit_stump_discrete(m: &SampleMatrix, weights: &[f64], j: usize) -> Result<StumpFit> {
    check(m, weights, j)?;
    let y = m.labels();
    let wpos: Vec<f64> = weights.iter().zip(y).map(|(&w, &l)| if l > 0.0 { w } else { 0.0 }).collect();
    let wneg: Vec<f64> = weights.iter().zip(y).map(|(&w, &l)| if l < 0.0 { w } else { 0.0 }).collect();
    let (_, t, p) = scan_discrete(m, j, &wpos, &wneg, wpos.iter().sum(), wneg.iter().sum());
    let stump = Stump::discrete(j, t, p);
    Ok(StumpFit {
        error: discrete_error(m, weights, &stump),
        stump,
    })
}

/// Threshold minimizing the weighted squared error of feature `j`, with
/// branch outputs set to the weighted label means (0 for an empty branch).
pub fn fit_stump_gentle(m: &SampleMatrix, weights: &[f64], j: usize) -> Result<StumpFit> {
    check(m, weights, j)?;
    let wy: Vec<f64> = weights.iter().zip(m.labels()).map(|(w, y)| w * y).collect();
    let (_, t, _) = scan_gentle(m, j, weights, &wy, weights.iter().sum(), wy.iter().sum());
    Ok(gentle_at(m, weights, j, t))
}
