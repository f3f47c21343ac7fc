use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use phoneboost::eval::{
    accuracy_report, confusion_report, evaluate_pair, learning_curve, margin_sweep, predictions, rounds_curve, Split,
};
use phoneboost::ingest::{parse_segment_lines, read_wav};
use phoneboost::multiclass::Voting;
use phoneboost::{Corpus, ExperimentReport, MulticlassModel, PhoneSegment, PipelineConfig, SynthSpec};

const THREADS_VAR: &str = "PHONEBOOST_THREADS";

#[derive(Parser)]
#[command(name = "phoneboost", version, about = "Boosted spectro-temporal phone classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every pairwise classifier on a corpus and write a model directory.
    Train {
        corpus: PathBuf,
        model: PathBuf,
        /// Flat `key = value` pipeline config; defaults apply otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override one config key, e.g. `--set rounds=50`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Label each segment of one recording.
    Classify {
        model: PathBuf,
        audio: PathBuf,
        segmentation: PathBuf,
        /// ava, ova, or hier:N
        #[arg(long, default_value = "ava")]
        voting: String,
    },
    /// Run an experiment and write its report.
    Eval {
        model: PathBuf,
        corpus: PathBuf,
        #[arg(long, value_enum)]
        report: ReportKind,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
        #[arg(long, default_value = "ava")]
        voting: String,
        /// Pair for rounds/learning/margins as `a,b`; the model's first two
        /// phones by default.
        #[arg(long)]
        pair: Option<String>,
        /// Fraction of each phone held out for rounds/learning/margins.
        #[arg(long, default_value_t = 0.3)]
        test_fraction: f64,
        /// Training sizes per phone for the learning curve.
        #[arg(long, value_delimiter = ',', default_values_t = [10usize, 20, 40])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        /// Context margins in seconds.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.015, 0.03, 0.06])]
        margins: Vec<f64>,
        /// Override one key of the model's config for retraining experiments.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Generate a synthetic corpus.
    Synth {
        /// A TOML spec file, or builtin:four, builtin:six, builtin:duration.
        spec: String,
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        n_per_class: usize,
        /// Replace the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportKind {
    Accuracy,
    Confusion,
    Rounds,
    Learning,
    Margins,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_VAR} must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn apply_overrides(config: &mut PipelineConfig, overrides: &[String]) -> Result<()> {
    for o in overrides {
        let Some((k, v)) = o.split_once('=') else {
            bail!("override `{o}` is not KEY=VALUE");
        };
        config.set(k.trim(), v.trim())?;
    }
    Ok(())
}

fn train(corpus: &Path, model: &Path, config: Option<&Path>, overrides: &[String]) -> Result<()> {
    let mut cfg = match config {
        Some(p) => PipelineConfig::read(p)?,
        None => PipelineConfig::default(),
    };
    apply_overrides(&mut cfg, overrides)?;
    cfg.validate()?;
    let corpus = Corpus::load(corpus)?;
    let samples: Vec<usize> = (0..corpus.samples.len()).collect();
    let (m, summaries) = MulticlassModel::train(&corpus, &samples, &cfg)?;
    m.save(model)?;
    for s in &summaries {
        println!(
            "{} {} rounds={} train_error={:.4}{}",
            s.positive,
            s.negative,
            s.rounds,
            s.train_error,
            if s.stopped_early { " stopped_early" } else { "" }
        );
    }
    println!("wrote {} classifiers to {}", summaries.len(), model.display());
    Ok(())
}

fn classify(model: &Path, audio: &Path, segmentation: &Path, voting: Voting) -> Result<()> {
    let m = MulticlassModel::load(model)?;
    let rec = read_wav(audio)?;
    let text = fs::read_to_string(segmentation).with_context(|| format!("reading {}", segmentation.display()))?;
    let x = m.extractor()?;
    let mut out = String::new();
    for line in parse_segment_lines(&text).with_context(|| segmentation.display().to_string())? {
        if line.end > rec.samples.len() {
            bail!(
                "{}:{}: segment [{}, {}) runs past the {} samples of {}",
                segmentation.display(),
                line.line,
                line.start,
                line.end,
                rec.samples.len(),
                audio.display()
            );
        }
        let seg = PhoneSegment {
            start: line.start,
            end: line.end,
            label: line.label.clone().unwrap_or_default(),
        };
        let rep = x.represent(&rec, &seg)?;
        let (w, _) = m.classify_representation(&x, &rep, voting)?;
        let pred = m.phone_set.label(w);
        match &line.label {
            Some(t) => out.push_str(&format!("{} {} {t} {pred}\n", line.start, line.end)),
            None => out.push_str(&format!("{} {} {pred}\n", line.start, line.end)),
        }
    }
    print!("{out}");
    Ok(())
}

struct EvalArgs<'a> {
    report: ReportKind,
    voting: Voting,
    pair: Option<&'a str>,
    test_fraction: f64,
    sizes: &'a [usize],
    trials: usize,
    margins: &'a [f64],
    overrides: &'a [String],
}

fn eval(model: &Path, corpus: &Path, a: EvalArgs<'_>) -> Result<ExperimentReport> {
    let m = MulticlassModel::load(model)?;
    let corpus = Corpus::load(corpus)?;
    match a.report {
        ReportKind::Accuracy | ReportKind::Confusion => {
            let samples: Vec<usize> = (0..corpus.samples.len())
                .filter(|&i| m.phone_set.contains(&corpus.samples[i].segment.label))
                .collect();
            if samples.is_empty() {
                bail!("no corpus segments carry a phone known to the model");
            }
            let preds = predictions(&m, &corpus, &samples, a.voting)?;
            Ok(match a.report {
                ReportKind::Accuracy => accuracy_report(&preds, &m.phone_set)?,
                _ => confusion_report(&preds, &m.phone_set)?,
            })
        }
        kind => {
            let (pa, pb) = match a.pair {
                Some(p) => p
                    .split_once(',')
                    .map(|(x, y)| (x.trim().to_string(), y.trim().to_string()))
                    .with_context(|| format!("pair must be `a,b`, got `{p}`"))?,
                None => (m.phone_set.label(0).to_string(), m.phone_set.label(1).to_string()),
            };
            let mut cfg = m.config.clone();
            apply_overrides(&mut cfg, a.overrides)?;
            cfg.validate()?;
            let split = Split::stratified(&corpus, a.test_fraction, cfg.seed)?;
            match kind {
                ReportKind::Rounds => {
                    let r = evaluate_pair(&cfg, &corpus, &split, &pa, &pb)?;
                    Ok(rounds_curve(
                        &r.classifier,
                        &r.extractor,
                        (&r.train_set.0, &r.train_set.1),
                        (&r.test_set.0, &r.test_set.1),
                    )?)
                }
                ReportKind::Learning => Ok(learning_curve(&cfg, &corpus, &split, &pa, &pb, a.sizes, a.trials)?),
                _ => Ok(margin_sweep(&cfg, &corpus, &split, &pa, &pb, a.margins)?),
            }
        }
    }
}

fn synth(spec: &str, out: &Path, n_per_class: usize, seed: Option<u64>) -> Result<()> {
    let mut s = match spec {
        "builtin:four" => SynthSpec::four_class(),
        "builtin:six" => SynthSpec::six_class(),
        "builtin:duration" => SynthSpec::duration_pair(),
        _ if spec.starts_with("builtin:") => bail!("unknown builtin spec `{spec}`"),
        path => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            SynthSpec::from_toml(&text).with_context(|| path.to_string())?
        }
    };
    if let Some(seed) = seed {
        s = s.with_seed(seed);
    }
    s.validate()?;
    if n_per_class == 0 {
        bail!("n_per_class must be positive");
    }
    let corpus = Corpus::synthetic(&s, n_per_class)?;
    corpus.write(out)?;
    println!(
        "wrote {} segments of {} phones to {}",
        corpus.samples.len(),
        corpus.phone_set.len(),
        out.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Train {
            corpus,
            model,
            config,
            overrides,
        } => train(&corpus, &model, config.as_deref(), &overrides),
        Command::Classify {
            model,
            audio,
            segmentation,
            voting,
        } => classify(&model, &audio, &segmentation, voting.parse()?),
        Command::Eval {
            model,
            corpus,
            report,
            out,
            format,
            voting,
            pair,
            test_fraction,
            sizes,
            trials,
            margins,
            overrides,
        } => {
            let r = eval(
                &model,
                &corpus,
                EvalArgs {
                    report,
                    voting: voting.parse()?,
                    pair: pair.as_deref(),
                    test_fraction,
                    sizes: &sizes,
                    trials,
                    margins: &margins,
                    overrides: &overrides,
                },
            )?;
            let text = match format {
                OutputFormat::Text => r.to_text(),
                OutputFormat::Csv => r.to_csv(),
            };
            match out {
                Some(p) => fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Synth {
            spec,
            out,
            n_per_class,
            seed,
        } => synth(&spec, &out, n_per_class, seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
