//! Pairwise boosted classifiers and their combination into N-way phone
//! decisions, plus on-disk model directories.

mod voting;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::boost::{sign, train, BoostMode, SampleMatrix, StrongClassifier, Stump, TrainingTrace};
use crate::ingest::{Corpus, PhoneSegment, PhoneSet, Recording};
use crate::pipeline::{resolve, FeatureDescriptor, FeatureExtractor, PipelineConfig, Representation};
use crate::{seed, Error, Result};

pub use voting::{vote_all_vs_all, vote_hierarchical, vote_one_vs_all, Elimination, VoteTally, Voting};

const CLASSIFIER_MAGIC: &str = "phoneboost-classifier 1";
const MODEL_MAGIC: &str = "phoneboost-model 1";
pub const MANIFEST_FILE: &str = "manifest.txt";

/// A boosted classifier separating `positive` (+1) from `negative` (−1).
/// Stump feature indices point into `features`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairClassifier {
    pub positive: String,
    pub negative: String,
    pub features: Vec<FeatureDescriptor>,
    pub classifier: StrongClassifier,
}

impl PairClassifier {
    pub fn score_prefix(&self, x: &FeatureExtractor, rep: &Representation, k: usize) -> Result<f64> {
        self.classifier
            .score_with(k, |j| x.evaluate(&self.features[j], rep))
    }

    pub fn score(&self, x: &FeatureExtractor, rep: &Representation) -> Result<f64> {
        self.score_prefix(x, rep, self.classifier.len())
    }

    /// Versioned text record: header lines, then one `r` line per round
    /// with the threshold, outputs, weight and feature descriptor.
    pub fn to_text(&self) -> String {
        let c = &self.classifier;
        let mut s = format!(
            "{CLASSIFIER_MAGIC}\nmode {}\npositive {}\nnegative {}\nrounds {}\n",
            c.mode,
            self.positive,
            self.negative,
            c.len()
        );
        for (st, w) in &c.rounds {
            let d = &self.features[st.feature];
            let _ = match c.mode {
                BoostMode::Discrete => writeln!(s, "r {} {} {} {d}", st.threshold, st.polarity(), w),
                BoostMode::Gentle => writeln!(s, "r {} {} {} {} {d}", st.threshold, st.above, st.below, w),
            };
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Format(format!("classifier file: {m}"));
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(CLASSIFIER_MAGIC) {
            return Err(bad(format!("missing `{CLASSIFIER_MAGIC}` header")));
        }
        let mut field = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad(format!("missing `{name}` line")))?;
            line.strip_prefix(name)
                .and_then(|r| r.strip_prefix(' '))
                .map(|r| r.trim().to_string())
                .ok_or_else(|| bad(format!("expected `{name} ...`, got `{line}`")))
        };
        let mode: BoostMode = field("mode")?.parse()?;
        let positive = field("positive")?;
        let negative = field("negative")?;
        let count: usize = field("rounds")?
            .parse()
            .map_err(|_| bad("bad round count".into()))?;
        let mut features: Vec<FeatureDescriptor> = Vec::new();
        let mut keys: Vec<String> = Vec::new();
        let mut rounds = Vec::with_capacity(count);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let t: Vec<&str> = line.split_whitespace().collect();
            let nums = if mode == BoostMode::Discrete { 3 } else { 4 };
            if t.len() < 1 + nums + 1 || t[0] != "r" {
                return Err(bad(format!("bad round line `{line}`")));
            }
            let v: Vec<f64> = t[1..=nums]
                .iter()
                .map(|x| x.parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect::<Option<_>>()
                .ok_or_else(|| bad(format!("bad number in `{line}`")))?;
            let key = t[1 + nums..].join(" ");
            let idx = match keys.iter().position(|k| *k == key) {
                Some(i) => i,
                None => {
                    features.push(key.parse()?);
                    keys.push(key);
                    features.len() - 1
                }
            };
            let (stump, w) = match mode {
                BoostMode::Discrete => (Stump::discrete(idx, v[0], v[1]), v[2]),
                BoostMode::Gentle => (
                    Stump {
                        feature: idx,
                        threshold: v[0],
                        above: v[1],
                        below: v[2],
                    },
                    v[3],
                ),
            };
            rounds.push((stump, w));
        }
        if rounds.len() != count {
            return Err(bad(format!("header promises {count} rounds, found {}", rounds.len())));
        }
        Ok(PairClassifier {
            positive,
            negative,
            features,
            classifier: StrongClassifier { mode, rounds },
        })
    }
}

/// A trained pair classifier and its boosting diagnostics.
#[derive(Debug, Clone)]
pub struct PairTraining {
    pub classifier: PairClassifier,
    pub trace: TrainingTrace,
    /// Training error of the final classifier.
    pub train_error: f64,
}

/// Trains one classifier on representations labeled `true` for `positive`.
/// Only the features the boosted classifier selects are kept.
pub fn train_on_representations(
    x: &FeatureExtractor,
    reps: &[&Representation],
    labels: &[bool],
    positive: &str,
    negative: &str,
    seed: u64,
) -> Result<PairTraining> {
    let (descs, columns) = x.pair_columns(reps, labels, seed)?;
    let m = SampleMatrix::from_columns(columns, labels)?;
    let (clf, trace) = train(&m, x.config().boosting, x.config().rounds)?;
    let wrong = (0..m.samples())
        .filter(|&i| {
            let s = clf.score_with(clf.len(), |j| Ok(m.value(i, j))).unwrap_or(0.0);
            sign(s) != m.labels()[i]
        })
        .count();
    let used = clf.features_used();
    let compact = clf.remap(|j| used.binary_search(&j).expect("used feature"));
    Ok(PairTraining {
        classifier: PairClassifier {
            positive: positive.to_string(),
            negative: negative.to_string(),
            features: used.iter().map(|&j| descs[j].clone()).collect(),
            classifier: compact,
        },
        trace,
        train_error: wrong as f64 / m.samples() as f64,
    })
}

/// Seed for the pair `{a, b}`, independent of the order the two are given.
pub fn pair_seed(master: u64, a: &str, b: &str) -> u64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    seed::derive_str(master, &format!("{lo}__{hi}"))
}

/// Trains `positive` against `negative` on those of `samples` carrying
/// either label. Samples keep their corpus order, so swapping the two
/// labels yields the mirrored classifier.
pub fn train_pairwise(
    x: &FeatureExtractor,
    corpus: &Corpus,
    samples: &[usize],
    positive: &str,
    negative: &str,
) -> Result<PairTraining> {
    let picked: Vec<usize> = samples
        .iter()
        .copied()
        .filter(|&i| {
            let l = &corpus.samples[i].segment.label;
            l == positive || l == negative
        })
        .collect();
    for phone in [positive, negative] {
        if !picked.iter().any(|&i| corpus.samples[i].segment.label == phone) {
            return Err(Error::Validation(format!("no training samples of phone `{phone}`")));
        }
    }
    let reps = x.represent_all(corpus, &picked)?;
    let refs: Vec<&Representation> = reps.iter().collect();
    let labels: Vec<bool> = picked
        .iter()
        .map(|&i| corpus.samples[i].segment.label == positive)
        .collect();
    let seed = pair_seed(x.config().seed, positive, negative);
    train_on_representations(x, &refs, &labels, positive, negative, seed)
}

/// Per-pair line of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSummary {
    pub positive: String,
    pub negative: String,
    pub rounds: usize,
    pub train_error: f64,
    pub stopped_early: bool,
}

/// All pairwise classifiers for a phone set plus everything needed to
/// classify new audio.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassModel {
    pub phone_set: PhoneSet,
    /// Fully resolved.
    pub config: PipelineConfig,
    pub sample_rate: u32,
    /// Pairs `(i, j)`, `i < j`, in row-major order; `i` is the positive
    /// side.
    pub pairs: Vec<PairClassifier>,
    /// Phone-vs-rest classifiers in label order, if trained.
    pub one_vs_all: Vec<PairClassifier>,
}

/// Index of pair `(i, j)`, `i < j`, among `n` phones in row-major order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

fn restrict(set: &PhoneSet, present: &[bool]) -> Result<PhoneSet> {
    let labels: Vec<String> = set
        .labels()
        .iter()
        .zip(present)
        .filter(|(_, &p)| p)
        .map(|(l, _)| l.clone())
        .collect();
    let groups = set
        .groups()
        .iter()
        .map(|g| g.iter().filter(|l| labels.contains(l)).cloned().collect::<Vec<_>>())
        .filter(|g| g.len() > 1)
        .collect();
    PhoneSet::new(labels, groups)
}

impl MulticlassModel {
    /// Resolves `config` on the training samples and trains every pair of
    /// phones present among them.
    pub fn train(corpus: &Corpus, samples: &[usize], config: &PipelineConfig) -> Result<(Self, Vec<PairSummary>)> {
        let resolved = resolve(config, corpus, samples)?;
        let rate = corpus.recording(&corpus.samples[samples[0]]).sample_rate;
        let x = FeatureExtractor::new(&resolved, rate)?;
        let mut present = vec![false; corpus.phone_set.len()];
        for &i in samples {
            present[corpus.phone_set.require(&corpus.samples[i].segment.label)?] = true;
        }
        let phone_set = restrict(&corpus.phone_set, &present)?;
        if phone_set.len() < 2 {
            return Err(Error::Validation("training needs at least two phones".into()));
        }
        let reps = x.represent_all(corpus, samples)?;
        let class: Vec<usize> = samples
            .iter()
            .map(|&i| phone_set.require(&corpus.samples[i].segment.label))
            .collect::<Result<_>>()?;
        let n = phone_set.len();
        let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
        let mut summaries = Vec::new();
        let record = |t: PairTraining, summaries: &mut Vec<PairSummary>| {
            summaries.push(PairSummary {
                positive: t.classifier.positive.clone(),
                negative: t.classifier.negative.clone(),
                rounds: t.classifier.classifier.len(),
                train_error: t.train_error,
                stopped_early: t.trace.stopped_early,
            });
            t.classifier
        };
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (phone_set.label(i), phone_set.label(j));
                let pick: Vec<usize> = (0..samples.len()).filter(|&k| class[k] == i || class[k] == j).collect();
                let refs: Vec<&Representation> = pick.iter().map(|&k| &reps[k]).collect();
                let labels: Vec<bool> = pick.iter().map(|&k| class[k] == i).collect();
                let t = train_on_representations(&x, &refs, &labels, a, b, pair_seed(resolved.seed, a, b))?;
                pairs.push(record(t, &mut summaries));
            }
        }
        let mut one_vs_all = Vec::new();
        if resolved.train_one_vs_all {
            let refs: Vec<&Representation> = reps.iter().collect();
            for i in 0..n {
                let labels: Vec<bool> = class.iter().map(|&c| c == i).collect();
                let a = phone_set.label(i);
                let s = seed::derive_str(resolved.seed, &format!("ova_{a}"));
                let t = train_on_representations(&x, &refs, &labels, a, "rest", s)?;
                one_vs_all.push(record(t, &mut summaries));
            }
        }
        Ok((
            MulticlassModel {
                phone_set,
                config: resolved,
                sample_rate: rate,
                pairs,
                one_vs_all,
            },
            summaries,
        ))
    }

    pub fn extractor(&self) -> Result<FeatureExtractor> {
        FeatureExtractor::new(&self.config, self.sample_rate)
    }

    pub fn pair(&self, i: usize, j: usize) -> &PairClassifier {
        &self.pairs[pair_index(self.phone_set.len(), i, j)]
    }

    fn check_complete(&self) -> Result<()> {
        let n = self.phone_set.len();
        if self.pairs.len() != n * (n - 1) / 2 {
            return Err(Error::Model(format!(
                "model has {} pair classifiers, {} phones need {}",
                self.pairs.len(),
                n,
                n * (n - 1) / 2
            )));
        }
        Ok(())
    }

    /// Winner of pair `(i, j)` on one sample: `i` when the score is
    /// positive.
    pub fn pair_winner(&self, x: &FeatureExtractor, rep: &Representation, i: usize, j: usize) -> Result<usize> {
        Ok(if self.pair(i, j).score(x, rep)? > 0.0 { i } else { j })
    }

    /// Label index and, for all-vs-all or hierarchical voting, the final
    /// tally.
    pub fn classify_representation(
        &self,
        x: &FeatureExtractor,
        rep: &Representation,
        voting: Voting,
    ) -> Result<(usize, Option<VoteTally>)> {
        let n = self.phone_set.len();
        match voting {
            Voting::AllVsAll => {
                self.check_complete()?;
                let all: Vec<usize> = (0..n).collect();
                let (w, t) = vote_all_vs_all(n, &all, |i, j| self.pair_winner(x, rep, i, j))?;
                Ok((w, Some(t)))
            }
            Voting::Hierarchical(n1) => {
                self.check_complete()?;
                let e = vote_hierarchical(n, n1, |i, j| self.pair_winner(x, rep, i, j))?;
                Ok((e.winner, Some(e.tally)))
            }
            Voting::OneVsAll => {
                if self.one_vs_all.len() != n {
                    return Err(Error::Model(
                        "model has no one-vs-all classifiers; train with train_one_vs_all = true".into(),
                    ));
                }
                let scores = self
                    .one_vs_all
                    .iter()
                    .map(|c| c.score(x, rep))
                    .collect::<Result<Vec<_>>>()?;
                Ok((vote_one_vs_all(&scores)?, None))
            }
        }
    }

    pub fn classify(&self, rec: &Recording, seg: &PhoneSegment, voting: Voting) -> Result<String> {
        let x = self.extractor()?;
        let rep = x.represent(rec, seg)?;
        let (w, _) = self.classify_representation(&x, &rep, voting)?;
        Ok(self.phone_set.label(w).to_string())
    }

    /// Predicted label indices for corpus samples, in order.
    pub fn classify_samples(&self, corpus: &Corpus, samples: &[usize], voting: Voting) -> Result<Vec<usize>> {
        let x = self.extractor()?;
        samples
            .par_iter()
            .map(|&i| {
                let s = &corpus.samples[i];
                let rep = x.represent(corpus.recording(s), &s.segment)?;
                Ok(self.classify_representation(&x, &rep, voting)?.0)
            })
            .collect()
    }

    fn pair_file(a: &str, b: &str) -> String {
        format!("{a}__{b}.clf")
    }

    fn ova_file(a: &str) -> String {
        format!("ova_{a}.clf")
    }

    fn manifest(&self) -> String {
        let mut s = format!("format = {MODEL_MAGIC}\nsample_rate = {}\n", self.sample_rate);
        let _ = writeln!(s, "phones = {}", self.phone_set.labels().join(" "));
        for g in self.phone_set.groups() {
            let _ = writeln!(s, "group = {}", g.join(" "));
        }
        let _ = writeln!(s, "one_vs_all = {}", !self.one_vs_all.is_empty());
        s.push_str(&self.config.to_text());
        s
    }

    /// Writes the manifest and one file per classifier into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        for l in self.phone_set.labels() {
            if l.contains(['/', '\\']) || l.contains("__") || l.starts_with('.') {
                return Err(Error::Validation(format!("phone label `{l}` cannot name a model file")));
            }
        }
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, text: String| {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| Error::io(p, e))
        };
        for c in &self.pairs {
            write(&Self::pair_file(&c.positive, &c.negative), c.to_text())?;
        }
        for c in &self.one_vs_all {
            write(&Self::ova_file(&c.positive), c.to_text())?;
        }
        write(MANIFEST_FILE, self.manifest())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let read = |name: &str| {
            let p = dir.join(name);
            fs::read_to_string(&p).map_err(|e| Error::io(p, e))
        };
        let manifest = read(MANIFEST_FILE)?;
        let mut config = PipelineConfig::default();
        let (mut format, mut rate, mut phones, mut groups, mut ova) = (None, None, None, Vec::new(), false);
        for line in manifest.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Format(format!("manifest line `{line}`")))?;
            match k {
                "format" => format = Some(v.to_string()),
                "sample_rate" => {
                    rate = Some(v.parse::<u32>().map_err(|_| Error::Format(format!("sample_rate `{v}`")))?)
                }
                "phones" => phones = Some(v.split_whitespace().map(String::from).collect::<Vec<_>>()),
                "group" => groups.push(v.split_whitespace().map(String::from).collect()),
                "one_vs_all" => ova = v == "true",
                _ => config.set(k, v)?,
            }
        }
        if format.as_deref() != Some(MODEL_MAGIC) {
            return Err(Error::Format(format!("manifest is not a `{MODEL_MAGIC}` file")));
        }
        config.validate()?;
        if !config.is_resolved() {
            return Err(Error::Format("manifest configuration is not resolved".into()));
        }
        let phone_set = PhoneSet::new(
            phones.ok_or_else(|| Error::Format("manifest lacks `phones`".into()))?,
            groups,
        )?;
        let sample_rate = rate.ok_or_else(|| Error::Format("manifest lacks `sample_rate`".into()))?;
        let n = phone_set.len();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (phone_set.label(i), phone_set.label(j));
                let c = PairClassifier::parse(&read(&Self::pair_file(a, b))?)?;
                if c.positive != a || c.negative != b {
                    return Err(Error::Format(format!(
                        "{} holds the pair {}/{}",
                        Self::pair_file(a, b),
                        c.positive,
                        c.negative
                    )));
                }
                pairs.push(c);
            }
        }
        let mut one_vs_all = Vec::new();
        if ova {
            for a in phone_set.labels() {
                one_vs_all.push(PairClassifier::parse(&read(&Self::ova_file(a))?)?);
            }
        }
        let model = MulticlassModel {
            phone_set,
            config,
            sample_rate,
            pairs,
            one_vs_all,
        };
        model.extractor()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::FeatureFamily;
    use crate::ingest::SynthSpec;

    #[test]
    fn pair_index_is_row_major() {
        let n = 5;
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                assert_eq!(pair_index(n, i, j), k);
                k += 1;
            }
        }
    }

    #[test]
    fn classifier_text_round_trip() {
        let mut clf = StrongClassifier::new(BoostMode::Gentle);
        clf.rounds.push((Stump { feature: 0, threshold: 0.1, above: 0.8, below: -0.3 }, 1.0));
        clf.rounds.push((Stump { feature: 1, threshold: -2.5, above: -1.0 / 3.0, below: 0.25 }, 1.0));
        clf.rounds.push((Stump { feature: 0, threshold: 0.7, above: 0.5, below: -0.5 }, 1.0));
        let p = PairClassifier {
            positive: "aa".into(),
            negative: "iy".into(),
            features: vec![
                "haar edge_vertical 0 0 2 1".parse().unwrap(),
                "mfcc 12".parse().unwrap(),
            ],
            classifier: clf,
        };
        assert_eq!(PairClassifier::parse(&p.to_text()).unwrap(), p);

        let mut d = StrongClassifier::new(BoostMode::Discrete);
        d.rounds.push((Stump::discrete(0, 0.5, -1.0), 1.25));
        let q = PairClassifier {
            features: vec!["mfcc 3".parse().unwrap()],
            classifier: d,
            ..p
        };
        assert_eq!(PairClassifier::parse(&q.to_text()).unwrap(), q);
        assert!(PairClassifier::parse("junk").is_err());
    }

    #[test]
    fn small_model_trains_saves_and_loads() {
        let corpus = Corpus::synthetic(&SynthSpec::four_class().with_seed(11), 6).unwrap();
        let samples: Vec<usize> = (0..corpus.samples.len()).collect();
        let cfg = PipelineConfig {
            family: FeatureFamily::Haar,
            haar_scales: Some(vec![2, 4]),
            rounds: 5,
            train_one_vs_all: true,
            ..PipelineConfig::default()
        };
        let (model, summaries) = MulticlassModel::train(&corpus, &samples, &cfg).unwrap();
        assert_eq!(model.pairs.len(), 6);
        assert_eq!(summaries.len(), 6 + 4);
        let dir = tempfile::tempdir().unwrap();
        model.save(dir.path()).unwrap();
        let back = MulticlassModel::load(dir.path()).unwrap();
        assert_eq!(back, model);
        let a = model.classify_samples(&corpus, &samples, Voting::AllVsAll).unwrap();
        let h = back.classify_samples(&corpus, &samples, Voting::Hierarchical(4)).unwrap();
        assert_eq!(a, h);
        assert!(back.classify_samples(&corpus, &samples, Voting::OneVsAll).is_ok());

        std::fs::remove_file(dir.path().join("iy__s.clf")).unwrap();
        let e = MulticlassModel::load(dir.path()).unwrap_err();
        assert!(e.to_string().contains("iy__s.clf"));
    }

    #[test]
    fn missing_phone_is_named() {
        let corpus = Corpus::synthetic(&SynthSpec::four_class(), 2).unwrap();
        let cfg = PipelineConfig {
            haar_scales: Some(vec![3]),
            rounds: 2,
            ..PipelineConfig::default()
        };
        let samples: Vec<usize> = (0..corpus.samples.len()).collect();
        let r = resolve(&cfg, &corpus, &samples).unwrap();
        let x = FeatureExtractor::new(&r, 16000).unwrap();
        let e = train_pairwise(&x, &corpus, &samples, "aa", "zz").unwrap_err();
        assert!(e.to_string().contains("zz"));
    }
}
