use phoneboost::eval::{
    accuracy, confusion_report, evaluate_pair, learning_curve, margin_sweep, predictions, rounds_curve, ConfusionMatrix,
    Split,
};
use phoneboost::ingest::{Formant, NoiseBurst};
use phoneboost::multiclass::{train_pairwise, Voting};
use phoneboost::pipeline::{resolve, FeatureExtractor, FeatureFamily, LengthMode};
use phoneboost::{BoostMode, Corpus, ExperimentReport, MulticlassModel, PipelineConfig, SynthSpec};

fn quick() -> PipelineConfig {
    PipelineConfig {
        rounds: 30,
        haar_scales: Some(vec![1, 2, 3]),
        ..PipelineConfig::default()
    }
}

fn four(n: usize) -> Corpus {
    Corpus::synthetic(&SynthSpec::four_class(), n).unwrap()
}

#[test]
fn saved_model_classifies_identically() {
    let corpus = four(20);
    let split = Split::per_class(&corpus, 12, 8).unwrap();
    let cfg = PipelineConfig {
        train_one_vs_all: true,
        ..quick()
    };
    let (model, summaries) = MulticlassModel::train(&corpus, &split.train, &cfg).unwrap();
    assert_eq!(summaries.len(), 6 + 4);
    let dir = tempfile::tempdir().unwrap();
    model.save(dir.path()).unwrap();
    let back = MulticlassModel::load(dir.path()).unwrap();
    assert_eq!(back, model);
    for voting in [Voting::AllVsAll, Voting::Hierarchical(2), Voting::OneVsAll] {
        assert_eq!(
            model.classify_samples(&corpus, &split.test, voting).unwrap(),
            back.classify_samples(&corpus, &split.test, voting).unwrap()
        );
    }
    let s = &corpus.samples[split.test[0]];
    let one = back.classify(corpus.recording(s), &s.segment, Voting::AllVsAll).unwrap();
    let idx = back.classify_samples(&corpus, &split.test[..1], Voting::AllVsAll).unwrap()[0];
    assert_eq!(one, back.phone_set.label(idx));
}

#[test]
fn every_length_mode_learns_the_four_class_task() {
    let corpus = four(30);
    let split = Split::per_class(&corpus, 20, 10).unwrap();
    let modes = [
        (LengthMode::ExactWarp, FeatureFamily::Haar),
        (LengthMode::FixedCenter, FeatureFamily::Haar),
        (LengthMode::Margins, FeatureFamily::Haar),
        (LengthMode::StackedFrames, FeatureFamily::Haar),
        (LengthMode::ExactWarp, FeatureFamily::HogSvm),
        (LengthMode::HogPooled, FeatureFamily::HogSvm),
        (LengthMode::ExactWarp, FeatureFamily::MfccStump),
    ];
    for (mode, family) in modes {
        let cfg = PipelineConfig { mode, family, ..quick() };
        let (model, _) = MulticlassModel::train(&corpus, &split.train, &cfg).unwrap();
        let preds = predictions(&model, &corpus, &split.test, Voting::AllVsAll).unwrap();
        let acc = accuracy(&preds, &model.phone_set).unwrap();
        assert!(acc >= 0.8, "{mode} / {family}: accuracy {acc}");
    }
}

#[test]
fn discrete_boosting_separates_two_tones() {
    let corpus = Corpus::synthetic(&SynthSpec::two_tone(500.0, 3000.0), 40).unwrap();
    let split = Split::per_class(&corpus, 25, 15).unwrap();
    for family in [FeatureFamily::Haar, FeatureFamily::MfccStump] {
        let cfg = PipelineConfig {
            boosting: BoostMode::Discrete,
            family,
            ..quick()
        };
        let r = evaluate_pair(&cfg, &corpus, &split, "lo", "hi").unwrap();
        assert!(r.test_error < 0.05, "{family}: {}", r.test_error);
    }
}

#[test]
fn swapping_the_pair_mirrors_the_classifier() {
    let corpus = four(10);
    let all: Vec<usize> = (0..corpus.samples.len()).collect();
    let cfg = resolve(&quick(), &corpus, &all).unwrap();
    let x = FeatureExtractor::new(&cfg, 16000).unwrap();
    let ab = train_pairwise(&x, &corpus, &all, "s", "sh").unwrap().classifier;
    let ba = train_pairwise(&x, &corpus, &all, "sh", "s").unwrap().classifier;
    for s in &corpus.samples {
        let rep = x.represent(corpus.recording(s), &s.segment).unwrap();
        assert_eq!(ab.score(&x, &rep).unwrap(), -ba.score(&x, &rep).unwrap());
    }
    let err = train_pairwise(&x, &corpus, &all, "s", "zz").unwrap_err();
    assert!(err.to_string().contains("zz"));
}

/// Four classes in two categories, each category holding two close
/// neighbors: formants 8% apart, noise bands offset by 500 Hz.
fn near_pairs() -> SynthSpec {
    let mut spec = SynthSpec::four_class();
    spec.classes[1].formants = spec.classes[0]
        .formants
        .iter()
        .map(|f| Formant {
            freq_hz: f.freq_hz * 1.08,
            ..f.clone()
        })
        .collect();
    spec.classes[3].noise = Some(NoiseBurst {
        low_hz: 4000.0,
        high_hz: 7000.0,
        ..spec.classes[2].noise.clone().unwrap()
    });
    spec
}

#[test]
fn confusions_stay_within_categories() {
    let corpus = Corpus::synthetic(&near_pairs(), 40).unwrap();
    let split = Split::per_class(&corpus, 10, 30).unwrap();
    let cfg = PipelineConfig {
        rounds: 10,
        ..quick()
    };
    let (model, _) = MulticlassModel::train(&corpus, &split.train, &cfg).unwrap();
    let preds = predictions(&model, &corpus, &split.test, Voting::AllVsAll).unwrap();
    let cm = ConfusionMatrix::new(&preds, &model.phone_set).unwrap();
    let (within, across) = cm.block_masses(&[0, 0, 1, 1]);
    assert!(within > across, "within {within}, across {across}");
    let r = confusion_report(&preds, &model.phone_set).unwrap();
    assert_eq!(r.table.as_ref().unwrap().rows.len(), 4);
    assert_eq!(ExperimentReport::from_text(&r.to_text()).unwrap(), r);
}

#[test]
fn learning_curve_does_not_get_worse() {
    let corpus = Corpus::synthetic(&SynthSpec::two_tone(700.0, 1100.0), 60).unwrap();
    let split = Split::per_class(&corpus, 40, 20).unwrap();
    let r = learning_curve(&quick(), &corpus, &split, "lo", "hi", &[4, 8, 16], 2).unwrap();
    let test = &r.series("test").unwrap().y;
    let se = &r.series("test_stderr").unwrap().y;
    assert_eq!(test.len(), 3);
    assert!(test[2] <= test[0] + 2.0 * se[0].max(se[2]) + 1e-12, "{test:?}");
    let err = learning_curve(&quick(), &corpus, &split, "lo", "hi", &[50], 1).unwrap_err();
    assert!(err.to_string().contains("of 50"));
}

#[test]
fn rounds_curve_train_error_ends_no_higher() {
    let corpus = four(25);
    let split = Split::per_class(&corpus, 15, 10).unwrap();
    let r = evaluate_pair(&quick(), &corpus, &split, "s", "sh").unwrap();
    let c = rounds_curve(
        &r.classifier,
        &r.extractor,
        (&r.train_set.0, &r.train_set.1),
        (&r.test_set.0, &r.test_set.1),
    )
    .unwrap();
    let train = &c.series("train").unwrap().y;
    assert_eq!(train.len(), r.classifier.classifier.len());
    assert!(train.last() <= train.first());
    assert!((train.last().unwrap() - r.train_error).abs() < 1e-12);
    assert!((c.series("test").unwrap().y.last().unwrap() - r.test_error).abs() < 1e-12);
}

#[test]
fn margin_sweep_has_one_row_per_margin() {
    let corpus = four(12);
    let split = Split::per_class(&corpus, 8, 4).unwrap();
    let margins = [0.0, 0.015, 0.03, 0.06];
    let r = margin_sweep(&quick(), &corpus, &split, "aa", "iy", &margins).unwrap();
    let t = r.table.unwrap();
    assert_eq!(t.columns, vec!["train_error", "test_error"]);
    assert_eq!(t.rows.len(), 4);
}

#[test]
fn training_is_reproducible() {
    let corpus = four(10);
    let all: Vec<usize> = (0..corpus.samples.len()).collect();
    let cfg = PipelineConfig {
        family: FeatureFamily::HogSvm,
        mode: LengthMode::HogPooled,
        ..quick()
    };
    let a = MulticlassModel::train(&corpus, &all, &cfg).unwrap().0;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let b = pool.install(|| MulticlassModel::train(&corpus, &all, &cfg).unwrap().0);
    assert_eq!(a, b);
}
