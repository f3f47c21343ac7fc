use rayon::prelude::*;

use super::stump::{discrete_error, gentle_at, scan_discrete, scan_gentle, Split};
use super::{BoostMode, SampleMatrix, StrongClassifier, Stump};
use crate::{Error, Result};

/// Discrete round errors are clamped to `[ERROR_CLAMP, 1 − ERROR_CLAMP]`
/// before computing the round weight.
pub const ERROR_CLAMP: f64 = 1e-10;

/// Diagnostics recorded after each round's reweighting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundStats {
    /// Weighted 0/1 error (discrete) or weighted squared error (gentle) of
    /// the chosen stump, before reweighting.
    pub error: f64,
    pub weight_sum: f64,
    /// Discrete only: new weight of the samples this round misclassified.
    pub misclassified_mass: Option<f64>,
    /// Mean of `exp(−y·F(x))` over the training set.
    pub exp_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingTrace {
    pub rounds: Vec<RoundStats>,
    /// Discrete training ended because no stump beat an error of 0.5.
    pub stopped_early: bool,
}

pub fn train(m: &SampleMatrix, mode: BoostMode, rounds: usize) -> Result<(StrongClassifier, TrainingTrace)> {
    match mode {
        BoostMode::Discrete => train_discrete(m, rounds),
        BoostMode::Gentle => train_gentle(m, rounds),
    }
}

fn validate(m: &SampleMatrix, rounds: usize) -> Result<()> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("boosting needs at least one round".into()));
    }
    if m.features() == 0 {
        return Err(Error::InvalidArgument("sample matrix has no features".into()));
    }
    let y = m.labels();
    if !y.iter().any(|&l| l > 0.0) || !y.iter().any(|&l| l < 0.0) {
        return Err(Error::InvalidArgument(
            "boosting needs samples of both labels".into(),
        ));
    }
    Ok(())
}

/// Lowest error over all features; equal errors go to the lower index.
fn best_split(m: &SampleMatrix, scan: impl Fn(usize) -> Split + Sync) -> (usize, Split) {
    (0..m.features())
        .into_par_iter()
        .map(|j| (j, scan(j)))
        .reduce_with(|a, b| match a.1 .0.total_cmp(&b.1 .0) {
            std::cmp::Ordering::Less => a,
            std::cmp::Ordering::Greater => b,
            std::cmp::Ordering::Equal => {
                if a.0 <= b.0 {
                    a
                } else {
                    b
                }
            }
        })
        .expect("at least one feature")
}

fn normalize(w: &mut [f64]) -> f64 {
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w.iter().sum()
}

fn exp_loss(y: &[f64], f: &[f64]) -> f64 {
    y.iter().zip(f).map(|(y, f)| (-y * f).exp()).sum::<f64>() / y.len() as f64
}

/// Discrete AdaBoost for up to `rounds` rounds. Stops early, without adding
/// the round, when the best stump's error is 0.5 or more.
pub fn train_discrete(m: &SampleMatrix, rounds: usize) -> Result<(StrongClassifier, TrainingTrace)> {
    validate(m, rounds)?;
    let n = m.samples();
    let y = m.labels();
    let mut w = vec![1.0 / n as f64; n];
    let mut score = vec![0.0; n];
    let mut clf = StrongClassifier::new(BoostMode::Discrete);
    let mut trace = TrainingTrace::default();
    for _ in 0..rounds {
        let wpos: Vec<f64> = w.iter().zip(y).map(|(&w, &l)| if l > 0.0 { w } else { 0.0 }).collect();
        let wneg: Vec<f64> = w.iter().zip(y).map(|(&w, &l)| if l < 0.0 { w } else { 0.0 }).collect();
        let (tp, tn) = (wpos.iter().sum(), wneg.iter().sum());
        let (j, (_, t, p)) = best_split(m, |j| scan_discrete(m, j, &wpos, &wneg, tp, tn));
        let stump = Stump::discrete(j, t, p);
        let e = discrete_error(m, &w, &stump);
        if e >= 0.5 {
            trace.stopped_early = true;
            break;
        }
        let ec = e.clamp(ERROR_CLAMP, 1.0 - ERROR_CLAMP);
        let c = ((1.0 - ec) / ec).ln();
        let boost = c.exp();
        let col = m.column(j);
        let wrong: Vec<bool> = (0..n).map(|i| stump.eval(col[i]) != y[i]).collect();
        for (wi, &bad) in w.iter_mut().zip(&wrong) {
            if bad {
                *wi *= boost;
            }
        }
        let weight_sum = normalize(&mut w);
        let mass = w.iter().zip(&wrong).filter(|(_, &b)| b).map(|(w, _)| w).sum();
        for (s, &x) in score.iter_mut().zip(col) {
            *s += c * stump.eval(x);
        }
        clf.rounds.push((stump, c));
        trace.rounds.push(RoundStats {
            error: e,
            weight_sum,
            misclassified_mass: Some(mass),
            exp_loss: exp_loss(y, &score),
        });
    }
    Ok((clf, trace))
}

/// Gentle AdaBoost for exactly `rounds` rounds.
pub fn train_gentle(m: &SampleMatrix, rounds: usize) -> Result<(StrongClassifier, TrainingTrace)> {
    validate(m, rounds)?;
    let n = m.samples();
    let y = m.labels();
    let mut w = vec![1.0 / n as f64; n];
    let mut score = vec![0.0; n];
    let mut clf = StrongClassifier::new(BoostMode::Gentle);
    let mut trace = TrainingTrace::default();
    for _ in 0..rounds {
        let wy: Vec<f64> = w.iter().zip(y).map(|(w, y)| w * y).collect();
        let (tw, twy) = (w.iter().sum(), wy.iter().sum());
        let (j, (_, t, _)) = best_split(m, |j| scan_gentle(m, j, &w, &wy, tw, twy));
        let fit = gentle_at(m, &w, j, t);
        let col = m.column(j);
        for i in 0..n {
            let f = fit.stump.eval(col[i]);
            w[i] *= (-y[i] * f).exp();
            score[i] += f;
        }
        let weight_sum = normalize(&mut w);
        clf.rounds.push((fit.stump, 1.0));
        trace.rounds.push(RoundStats {
            error: fit.error,
            weight_sum,
            misclassified_mass: None,
            exp_loss: exp_loss(y, &score),
        });
    }
    Ok((clf, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> SampleMatrix {
        // feature 0 separates except one sample; feature 1 fixes it
        let rows = vec![
            vec![0.1, 0.0],
            vec![0.2, 0.0],
            vec![0.3, 1.0],
            vec![0.7, 0.0],
            vec![0.8, 0.0],
            vec![0.9, 0.0],
        ];
        SampleMatrix::from_rows(&rows, &[false, false, true, true, true, true]).unwrap()
    }

    #[test]
    fn discrete_reaches_zero_training_error() {
        let m = toy();
        let (c, t) = train_discrete(&m, 10).unwrap();
        assert!(!c.is_empty());
        for i in 0..m.samples() {
            assert_eq!(c.predict(&m.row(i)).unwrap(), m.labels()[i]);
        }
        for r in &t.rounds {
            assert!((r.weight_sum - 1.0).abs() < 1e-12);
            if r.error > ERROR_CLAMP {
                assert!((r.misclassified_mass.unwrap() - 0.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn round_weight_for_quarter_error() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let m = SampleMatrix::from_rows(&rows, &[false, true, false, true]).unwrap();
        let (c, _) = train_discrete(&m, 1).unwrap();
        assert!((c.rounds[0].1 - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn no_useful_stump_stops_immediately() {
        let rows = vec![vec![1.0]; 4];
        let m = SampleMatrix::from_rows(&rows, &[true, false, true, false]).unwrap();
        let (c, t) = train_discrete(&m, 5).unwrap();
        assert!(c.is_empty());
        assert!(t.stopped_early);
    }

    #[test]
    fn gentle_loss_decreases_on_separable_toy() {
        let m = toy();
        let (c, t) = train_gentle(&m, 8).unwrap();
        assert_eq!(c.len(), 8);
        let mut prev = 1.0;
        for r in &t.rounds {
            assert!(r.exp_loss < prev);
            prev = r.exp_loss;
        }
    }

    #[test]
    fn single_label_and_zero_rounds_rejected() {
        let m = SampleMatrix::from_rows(&[vec![0.0], vec![1.0]], &[true, true]).unwrap();
        assert!(train_gentle(&m, 3).is_err());
        assert!(train_discrete(&toy(), 0).is_err());
    }
}
