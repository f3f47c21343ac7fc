//! Scoring, confusion tables, and the diagnostic experiments: learning
//! curves, error against boosting rounds, and context-margin sweeps.

mod report;

use rand::seq::SliceRandom;

use crate::boost::sign;
use crate::ingest::{Corpus, PhoneSet};
use crate::multiclass::{pair_seed, train_on_representations, MulticlassModel, PairClassifier, Voting};
use crate::pipeline::{resolve, FeatureExtractor, LengthMode, PipelineConfig, Representation};
use crate::{seed, Error, Result};

pub use report::{ExperimentReport, Series, Table};

/// Fraction of `(true, predicted)` index pairs that match or fall in the
/// same scoring-equivalence group.
pub fn accuracy(preds: &[(usize, usize)], set: &PhoneSet) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::InvalidArgument("no predictions to score".into()));
    }
    check_indices(preds, set)?;
    let ok = preds.iter().filter(|&&(t, p)| set.equivalent_index(t, p)).count();
    Ok(ok as f64 / preds.len() as f64)
}

/// Fraction of exact matches, ignoring equivalence groups.
pub fn raw_accuracy(preds: &[(usize, usize)]) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::InvalidArgument("no predictions to score".into()));
    }
    Ok(preds.iter().filter(|(t, p)| t == p).count() as f64 / preds.len() as f64)
}

/// `1 − accuracy`, computed by counting errors.
pub fn error_rate(preds: &[(usize, usize)], set: &PhoneSet) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::InvalidArgument("no predictions to score".into()));
    }
    check_indices(preds, set)?;
    let bad = preds.iter().filter(|&&(t, p)| !set.equivalent_index(t, p)).count();
    Ok(bad as f64 / preds.len() as f64)
}

fn check_indices(preds: &[(usize, usize)], set: &PhoneSet) -> Result<()> {
    match preds.iter().find(|&&(t, p)| t >= set.len() || p >= set.len()) {
        Some(&(t, p)) => Err(Error::InvalidArgument(format!(
            "prediction ({t}, {p}) outside a set of {} phones",
            set.len()
        ))),
        None => Ok(()),
    }
}

/// Raw counts of (true phone, predicted phone), without merging groups.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(preds: &[(usize, usize)], set: &PhoneSet) -> Result<Self> {
        check_indices(preds, set)?;
        let n = set.len();
        let mut counts = vec![vec![0; n]; n];
        for &(t, p) in preds {
            counts[t][p] += 1;
        }
        Ok(ConfusionMatrix {
            labels: set.labels().to_vec(),
            counts,
        })
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Rows scaled to sum to 1; empty rows stay zero.
    pub fn row_normalized(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|r| {
                let s: usize = r.iter().sum();
                r.iter()
                    .map(|&c| if s == 0 { 0.0 } else { c as f64 / s as f64 })
                    .collect()
            })
            .collect()
    }

    /// Up to `k` most frequent predicted labels for true phone `t`, with
    /// their frequencies, most frequent first.
    pub fn top_predictions(&self, t: usize, k: usize) -> Vec<(usize, f64)> {
        let row = &self.row_normalized()[t];
        let mut idx: Vec<usize> = (0..row.len()).filter(|&p| row[p] > 0.0).collect();
        idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        idx.into_iter().take(k).map(|p| (p, row[p])).collect()
    }

    /// Off-diagonal confusion counts split into those within the same
    /// category and those across categories.
    pub fn block_masses(&self, category: &[usize]) -> (usize, usize) {
        let (mut within, mut across) = (0, 0);
        for (t, row) in self.counts.iter().enumerate() {
            for (p, &c) in row.iter().enumerate() {
                if t == p {
                    continue;
                }
                if category[t] == category[p] {
                    within += c;
                } else {
                    across += c;
                }
            }
        }
        (within, across)
    }
}

/// Disjoint training and test sample indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    /// The first `train_per_class` samples of each phone (corpus order) for
    /// training and the next `test_per_class` for testing.
    pub fn per_class(corpus: &Corpus, train_per_class: usize, test_per_class: usize) -> Result<Self> {
        let mut seen = vec![0usize; corpus.phone_set.len()];
        let (mut train, mut test) = (Vec::new(), Vec::new());
        for (i, s) in corpus.samples.iter().enumerate() {
            let c = corpus.phone_set.require(&s.segment.label)?;
            if seen[c] < train_per_class {
                train.push(i);
            } else if seen[c] < train_per_class + test_per_class {
                test.push(i);
            }
            seen[c] += 1;
        }
        let short: Vec<String> = seen
            .iter()
            .enumerate()
            .filter(|&(_, &n)| n > 0 && n < train_per_class + test_per_class)
            .map(|(c, &n)| {
                format!(
                    "{} has {n} of {}",
                    corpus.phone_set.label(c),
                    train_per_class + test_per_class
                )
            })
            .collect();
        if !short.is_empty() {
            return Err(Error::Validation(format!("not enough samples: {}", short.join(", "))));
        }
        Ok(Split { train, test })
    }

    /// Seeded per-phone shuffle; `test_fraction` of each phone's samples
    /// (rounded) go to the test side.
    pub fn stratified(corpus: &Corpus, test_fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&test_fraction) {
            return Err(Error::InvalidArgument("test fraction must be in [0, 1)".into()));
        }
        let mut by_class = vec![Vec::new(); corpus.phone_set.len()];
        for (i, s) in corpus.samples.iter().enumerate() {
            by_class[corpus.phone_set.require(&s.segment.label)?].push(i);
        }
        let (mut train, mut test) = (Vec::new(), Vec::new());
        for (c, mut idx) in by_class.into_iter().enumerate() {
            idx.shuffle(&mut seed::rng(seed::derive(seed, c as u64)));
            let n_test = (idx.len() as f64 * test_fraction).round() as usize;
            test.extend_from_slice(&idx[..n_test]);
            train.extend_from_slice(&idx[n_test..]);
        }
        train.sort_unstable();
        test.sort_unstable();
        Ok(Split { train, test })
    }
}

fn indices_of(corpus: &Corpus, samples: &[usize], labels: &[&str]) -> Vec<usize> {
    samples
        .iter()
        .copied()
        .filter(|&i| labels.contains(&corpus.samples[i].segment.label.as_str()))
        .collect()
}

/// Outcome of training and testing one pair classifier.
#[derive(Debug, Clone)]
pub struct PairResult {
    pub classifier: PairClassifier,
    pub extractor: FeatureExtractor,
    pub train_error: f64,
    pub test_error: f64,
    /// Train and test representations with `true` for the first phone.
    pub train_set: (Vec<Representation>, Vec<bool>),
    pub test_set: (Vec<Representation>, Vec<bool>),
}

fn pair_error(c: &PairClassifier, x: &FeatureExtractor, reps: &[Representation], labels: &[bool]) -> Result<f64> {
    if reps.is_empty() {
        return Err(Error::InvalidArgument("no samples to score".into()));
    }
    let mut wrong = 0;
    for (r, &l) in reps.iter().zip(labels) {
        if (sign(c.score(x, r)?) > 0.0) != l {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / reps.len() as f64)
}

/// Trains `a` against `b` on the training side of `split` and measures
/// the error on both sides. The configuration is resolved on the pair's
/// training samples.
pub fn evaluate_pair(config: &PipelineConfig, corpus: &Corpus, split: &Split, a: &str, b: &str) -> Result<PairResult> {
    let train = indices_of(corpus, &split.train, &[a, b]);
    let test = indices_of(corpus, &split.test, &[a, b]);
    for (side, idx) in [("training", &train), ("test", &test)] {
        for phone in [a, b] {
            if !idx.iter().any(|&i| corpus.samples[i].segment.label == phone) {
                return Err(Error::Validation(format!("no {side} samples of phone `{phone}`")));
            }
        }
    }
    let resolved = resolve(config, corpus, &train)?;
    let x = FeatureExtractor::new(&resolved, corpus.recording(&corpus.samples[train[0]]).sample_rate)?;
    let label = |idx: &[usize]| -> Vec<bool> { idx.iter().map(|&i| corpus.samples[i].segment.label == a).collect() };
    let train_reps = x.represent_all(corpus, &train)?;
    let test_reps = x.represent_all(corpus, &test)?;
    let (train_labels, test_labels) = (label(&train), label(&test));
    let refs: Vec<&Representation> = train_reps.iter().collect();
    let t = train_on_representations(&x, &refs, &train_labels, a, b, pair_seed(resolved.seed, a, b))?;
    let test_error = pair_error(&t.classifier, &x, &test_reps, &test_labels)?;
    Ok(PairResult {
        classifier: t.classifier,
        extractor: x,
        train_error: t.train_error,
        test_error,
        train_set: (train_reps, train_labels),
        test_set: (test_reps, test_labels),
    })
}

/// Mean train and test error of `a` versus `b` when training on `sizes`
/// samples per phone. Each trial draws its own training subset from the
/// training side of `split` (disjoint across trials when the pool is large
/// enough); the test side is fixed.
pub fn learning_curve(
    config: &PipelineConfig,
    corpus: &Corpus,
    split: &Split,
    a: &str,
    b: &str,
    sizes: &[usize],
    trials: usize,
) -> Result<ExperimentReport> {
    if sizes.is_empty() || trials == 0 || sizes.contains(&0) {
        return Err(Error::InvalidArgument("need positive sizes and at least one trial".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("sizes must be strictly ascending".into()));
    }
    let pools: Vec<Vec<usize>> = [a, b].iter().map(|p| indices_of(corpus, &split.train, &[p])).collect();
    let max = *sizes.last().unwrap();
    let short: Vec<String> = [a, b]
        .iter()
        .zip(&pools)
        .filter(|(_, p)| p.len() < max)
        .map(|(l, p)| format!("{l} has {} of {max}", p.len()))
        .collect();
    if !short.is_empty() {
        return Err(Error::Validation(format!(
            "not enough training samples: {}",
            short.join(", ")
        )));
    }
    let mut report = ExperimentReport::new(&format!("learning_curve {a}/{b}"));
    let (mut xs, mut train_y, mut test_y, mut test_se) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for &size in sizes {
        let size_seed = seed::derive(config.seed, size as u64);
        let mut shuffled = pools.clone();
        for (c, p) in shuffled.iter_mut().enumerate() {
            p.shuffle(&mut seed::rng(seed::derive(size_seed, c as u64)));
        }
        let (mut tr, mut te) = (Vec::new(), Vec::new());
        for t in 0..trials {
            let mut train = Vec::new();
            for (c, p) in shuffled.iter().enumerate() {
                if p.len() >= trials * size {
                    train.extend_from_slice(&p[t * size..(t + 1) * size]);
                } else {
                    let mut q = pools[c].clone();
                    q.shuffle(&mut seed::rng(seed::derive(seed::derive(size_seed, c as u64), t as u64 + 1)));
                    train.extend_from_slice(&q[..size]);
                }
            }
            train.sort_unstable();
            let s = Split {
                train,
                test: split.test.clone(),
            };
            let r = evaluate_pair(config, corpus, &s, a, b)?;
            tr.push(r.train_error);
            te.push(r.test_error);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let m = mean(&te);
        let se = if te.len() > 1 {
            (te.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (te.len() - 1) as f64 / te.len() as f64).sqrt()
        } else {
            0.0
        };
        xs.push(size as f64);
        train_y.push(mean(&tr));
        test_y.push(m);
        test_se.push(se);
    }
    report.push_series("train", xs.clone(), train_y)?;
    report.push_series("test", xs.clone(), test_y)?;
    report.push_series("test_stderr", xs, test_se)?;
    Ok(report)
}

/// Train and test error when only the first k rounds are used, for k from
/// 1 to the classifier's length.
pub fn rounds_curve(
    c: &PairClassifier,
    x: &FeatureExtractor,
    train: (&[Representation], &[bool]),
    test: (&[Representation], &[bool]),
) -> Result<ExperimentReport> {
    let m = c.classifier.len();
    if m == 0 {
        return Err(Error::InvalidArgument("classifier has no rounds".into()));
    }
    let curve = |reps: &[Representation], labels: &[bool]| -> Result<Vec<f64>> {
        let mut wrong = vec![0usize; m];
        for (r, &l) in reps.iter().zip(labels) {
            let mut s = 0.0;
            for (k, (stump, w)) in c.classifier.rounds.iter().enumerate() {
                s += w * stump.eval(x.evaluate(&c.features[stump.feature], r)?);
                if (sign(s) > 0.0) != l {
                    wrong[k] += 1;
                }
            }
        }
        Ok(wrong.iter().map(|&w| w as f64 / reps.len().max(1) as f64).collect())
    };
    let xs: Vec<f64> = (1..=m).map(|k| k as f64).collect();
    let mut r = ExperimentReport::new(&format!("rounds_curve {}/{}", c.positive, c.negative));
    r.push_series("train", xs.clone(), curve(train.0, train.1)?)?;
    r.push_series("test", xs, curve(test.0, test.1)?)?;
    Ok(r)
}

/// Train and test error of `a` versus `b` with `margins` seconds of context
/// on each side, one table row per margin.
pub fn margin_sweep(
    config: &PipelineConfig,
    corpus: &Corpus,
    split: &Split,
    a: &str,
    b: &str,
    margins: &[f64],
) -> Result<ExperimentReport> {
    let mut table = Table {
        columns: vec!["train_error".into(), "test_error".into()],
        rows: Vec::new(),
    };
    for &m in margins {
        let cfg = PipelineConfig {
            mode: LengthMode::Margins,
            margin: m,
            margin_columns: None,
            clip_reference: config.clip_reference,
            ..config.clone()
        };
        let r = evaluate_pair(&cfg, corpus, split, a, b)?;
        table.rows.push((m.to_string(), vec![r.train_error, r.test_error]));
    }
    let mut report = ExperimentReport::new(&format!("margin_sweep {a}/{b}"));
    report.table = Some(table);
    Ok(report)
}

/// `(true, predicted)` label indices of the model on corpus samples.
/// True labels are looked up in the model's phone set.
pub fn predictions(model: &MulticlassModel, corpus: &Corpus, samples: &[usize], voting: Voting) -> Result<Vec<(usize, usize)>> {
    let truth = samples
        .iter()
        .map(|&i| model.phone_set.require(&corpus.samples[i].segment.label))
        .collect::<Result<Vec<_>>>()?;
    let pred = model.classify_samples(corpus, samples, voting)?;
    Ok(truth.into_iter().zip(pred).collect())
}

/// Equivalence-aware and raw accuracy.
pub fn accuracy_report(preds: &[(usize, usize)], set: &PhoneSet) -> Result<ExperimentReport> {
    let mut r = ExperimentReport::new("accuracy");
    r.push_scalar("accuracy", accuracy(preds, set)?);
    r.push_scalar("raw_accuracy", raw_accuracy(preds)?);
    Ok(r)
}

/// Row-normalized confusion frequencies, one row per phone.
pub fn confusion_report(preds: &[(usize, usize)], set: &PhoneSet) -> Result<ExperimentReport> {
    let cm = ConfusionMatrix::new(preds, set)?;
    let mut r = ExperimentReport::new("confusion");
    r.table = Some(Table {
        columns: cm.labels.clone(),
        rows: cm
            .labels
            .iter()
            .cloned()
            .zip(cm.row_normalized())
            .collect(),
    });
    Ok(r)
}
