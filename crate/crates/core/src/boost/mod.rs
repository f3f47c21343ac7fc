//! Boosted decision stumps: Discrete AdaBoost and Gentle AdaBoost over a
//! precomputed sample-by-feature matrix.

mod stump;
mod train;

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

pub use stump::{candidate_thresholds, fit_stump_discrete, fit_stump_gentle, StumpFit};
pub use train::{train, train_discrete, train_gentle, RoundStats, TrainingTrace, ERROR_CLAMP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BoostMode {
    Discrete,
    #[default]
    Gentle,
}

impl fmt::Display for BoostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoostMode::Discrete => "discrete",
            BoostMode::Gentle => "gentle",
        })
    }
}

impl FromStr for BoostMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete" => Ok(BoostMode::Discrete),
            "gentle" => Ok(BoostMode::Gentle),
            _ => Err(Error::Config(format!(
                "boosting must be discrete or gentle, got `{s}`"
            ))),
        }
    }
}

/// Feature values of a labeled training set, stored feature-major with each
/// feature's sample indices presorted by value.
#[derive(Debug, Clone)]
pub struct SampleMatrix {
    samples: usize,
    features: usize,
    values: Vec<f64>,
    order: Vec<u32>,
    labels: Vec<f64>,
}

impl SampleMatrix {
    /// `columns[j][i]` is feature `j` of sample `i`; labels are `true` for
    /// the +1 class.
    pub fn from_columns(columns: Vec<Vec<f64>>, labels: &[bool]) -> Result<Self> {
        let samples = labels.len();
        if samples == 0 {
            return Err(Error::InvalidArgument("sample matrix has no samples".into()));
        }
        if samples > u32::MAX as usize {
            return Err(Error::InvalidArgument("too many samples".into()));
        }
        let features = columns.len();
        let mut values = Vec::with_capacity(features * samples);
        for (j, col) in columns.into_iter().enumerate() {
            if col.len() != samples {
                return Err(Error::InvalidArgument(format!(
                    "feature {j} has {} values for {samples} samples",
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "feature {j} of sample {i} is not finite"
                )));
            }
            values.extend(col);
        }
        Ok(Self::build(samples, features, values, labels))
    }

    /// `rows[i][j]` is feature `j` of sample `i`.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[bool]) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let features = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != features) {
            return Err(Error::InvalidArgument(format!(
                "row {i} has {} features, expected {features}",
                rows[i].len()
            )));
        }
        let columns = (0..features)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        Self::from_columns(columns, labels)
    }

    fn build(samples: usize, features: usize, values: Vec<f64>, labels: &[bool]) -> Self {
        use rayon::prelude::*;
        let mut order = vec![0u32; features * samples];
        order
            .par_chunks_mut(samples)
            .zip(values.par_chunks(samples))
            .for_each(|(ord, col)| {
                for (k, o) in ord.iter_mut().enumerate() {
                    *o = k as u32;
                }
                ord.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
            });
        SampleMatrix {
            samples,
            features,
            values,
            order,
            labels: labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect(),
        }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn features(&self) -> usize {
        self.features
    }

    /// Labels as ±1.
    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn value(&self, sample: usize, feature: usize) -> f64 {
        self.values[feature * self.samples + sample]
    }

    /// All samples' values of one feature.
    pub fn column(&self, feature: usize) -> &[f64] {
        &self.values[feature * self.samples..(feature + 1) * self.samples]
    }

    /// Sample indices of one feature in ascending value order.
    pub fn sorted(&self, feature: usize) -> &[u32] {
        &self.order[feature * self.samples..(feature + 1) * self.samples]
    }

    /// Feature values of one sample.
    pub fn row(&self, sample: usize) -> Vec<f64> {
        (0..self.features).map(|j| self.value(sample, j)).collect()
    }
}

/// A single-feature threshold rule: `above` when `x[feature] > threshold`,
/// otherwise `below`. Discrete stumps output `±polarity`; gentle stumps
/// output the weighted branch means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub above: f64,
    pub below: f64,
}

impl Stump {
    pub fn discrete(feature: usize, threshold: f64, polarity: f64) -> Self {
        Stump {
            feature,
            threshold,
            above: polarity,
            below: -polarity,
        }
    }

    pub fn polarity(&self) -> f64 {
        self.above.signum()
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x > self.threshold {
            self.above
        } else {
            self.below
        }
    }
}

/// Ordered boosting rounds; the score is the weighted sum of stump outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongClassifier {
    pub mode: BoostMode,
    /// `(stump, weight)`; gentle rounds carry weight 1.
    pub rounds: Vec<(Stump, f64)>,
}

impl StrongClassifier {
    pub fn new(mode: BoostMode) -> Self {
        StrongClassifier {
            mode,
            rounds: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// Score over all rounds. Errors if `x` lacks a feature a stump uses.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        self.score_prefix(x, self.rounds.len())
    }

    /// Score over the first `k` rounds only.
    pub fn score_prefix(&self, x: &[f64], k: usize) -> Result<f64> {
        self.score_with(k, |j| {
            x.get(j).copied().ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "stump uses feature {j} but only {} values were given",
                    x.len()
                ))
            })
        })
    }

    /// Score over the first `k` rounds, fetching feature values on demand.
    pub fn score_with(&self, k: usize, mut value: impl FnMut(usize) -> Result<f64>) -> Result<f64> {
        let mut s = 0.0;
        for (stump, c) in self.rounds.iter().take(k) {
            s += c * stump.eval(value(stump.feature)?);
        }
        Ok(s)
    }

    /// +1 or −1; a zero score maps to −1.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(sign(self.score(x)?))
    }

    /// Sorted distinct feature indices used by any round.
    pub fn features_used(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self.rounds.iter().map(|(s, _)| s.feature).collect();
        f.sort_unstable();
        f.dedup();
        f
    }

    /// Rewrites every stump's feature index.
    pub fn remap(&self, mut f: impl FnMut(usize) -> usize) -> Self {
        StrongClassifier {
            mode: self.mode,
            rounds: self
                .rounds
                .iter()
                .map(|&(s, c)| {
                    (
                        Stump {
                            feature: f(s.feature),
                            ..s
                        },
                        c,
                    )
                })
                .collect(),
        }
    }
}

/// Sign with 0 mapped to −1.
pub fn sign(score: f64) -> f64 {
    if score > 0.0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_classifier_scores_zero_and_predicts_negative() {
        let c = StrongClassifier::new(BoostMode::Discrete);
        assert_eq!(c.score(&[]).unwrap(), 0.0);
        assert_eq!(c.predict(&[]).unwrap(), -1.0);
    }

    #[test]
    fn single_stump_above_threshold() {
        let mut c = StrongClassifier::new(BoostMode::Discrete);
        c.rounds.push((Stump::discrete(1, 0.5, 1.0), 1.0));
        assert_eq!(c.score(&[0.0, 0.7]).unwrap(), 1.0);
        assert_eq!(c.score(&[0.0, 0.5]).unwrap(), -1.0);
        assert!(c.score(&[0.0]).is_err());
    }

    #[test]
    fn prefix_scores_are_partial_sums() {
        let mut c = StrongClassifier::new(BoostMode::Gentle);
        c.rounds.push((Stump { feature: 0, threshold: 0.0, above: 0.5, below: -0.5 }, 1.0));
        c.rounds.push((Stump { feature: 1, threshold: 0.0, above: 0.25, below: -0.75 }, 1.0));
        let x = [1.0, -1.0];
        assert_eq!(c.score_prefix(&x, 0).unwrap(), 0.0);
        assert_eq!(c.score_prefix(&x, 1).unwrap(), 0.5);
        assert_eq!(c.score_prefix(&x, 2).unwrap(), -0.25);
        assert_eq!(c.score_prefix(&x, 9).unwrap(), -0.25);
    }

    #[test]
    fn matrix_presorts_each_feature() {
        let rows = vec![vec![3.0, 0.0], vec![1.0, 0.0], vec![2.0, -1.0]];
        let m = SampleMatrix::from_rows(&rows, &[true, false, true]).unwrap();
        assert_eq!(m.sorted(0), &[1, 2, 0]);
        assert_eq!(m.sorted(1)[0], 2);
        assert_eq!(m.labels(), &[1.0, -1.0, 1.0]);
        assert_eq!(m.row(2), vec![2.0, -1.0]);
        assert!(SampleMatrix::from_rows(&[vec![f64::NAN]], &[true]).is_err());
        assert!(SampleMatrix::from_rows(&[vec![1.0], vec![]], &[true, false]).is_err());
    }
}
