//! Phone classification from boosted spectro-temporal image features.
//!
//! The crate turns labeled audio segments into normalized mel spectrograms,
//! extracts Haar-like rectangle features or SVM-classified histograms of
//! gradients from them, trains pairwise boosted stump classifiers
//! (Discrete or Gentle AdaBoost), and combines the pairwise decisions with
//! all-vs-all or hierarchical elimination voting.
//!
//! Module map:
//!
//! - [`ingest`]: WAV/segmentation readers, phone sets, synthetic corpora
//! - [`dsp`]: STFT, mel bank, normalization, warping, MFCC and deltas
//! - [`haar`]: integral images and Haar-like feature banks
//! - [`hog`]: 9-bin gradient histograms and per-patch linear SVMs
//! - [`boost`]: decision stumps, Discrete and Gentle AdaBoost
//! - [`pipeline`]: configuration and sample-to-feature extraction
//! - [`multiclass`]: pairwise training, voting, model persistence
//! - [`eval`]: accuracy, confusion tables, and diagnostic experiments

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boost;
pub mod dsp;
mod error;
pub mod eval;
pub mod haar;
pub mod hog;
pub mod ingest;
pub mod multiclass;
pub mod pipeline;
pub mod seed;

pub use boost::{BoostMode, SampleMatrix, Stump, StrongClassifier, TrainingTrace};
pub use dsp::{Spectrogram, Stage, StftConfig};
pub use error::{Error, Result};
pub use eval::{ConfusionMatrix, ExperimentReport};
pub use haar::{FeatureBank, HaarFeature, HaarKind, IntegralImage};
pub use hog::{HogHistogram, HogPatch, HogSvmFeature, Pooling};
pub use ingest::{Corpus, PhoneSegment, PhoneSet, Recording, SynthSpec};
pub use multiclass::{MulticlassModel, PairClassifier, VoteTally};
pub use pipeline::PipelineConfig;
