//! Pipeline configuration and the path from a labeled segment to feature
//! values: windowing, spectrogram, length handling, and the candidate
//! features of each family.

mod config;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dsp::{
    build_mel_bank, deltas, extract_segment_window, log_spectrogram, mfcc, normalize, smooth_stack,
    stack_frames, stft_power, warp, ClipRange, MelBank, Spectrogram, Stage, StftConfig, WindowMode,
};
use crate::haar::{eval_haar, FeatureBank, HaarFeature, IntegralImage};
use crate::hog::{enumerate_hog, train_linear_svm, GradientField, HogPatch, HogSvmFeature, SvmParams};
use crate::ingest::{Corpus, PhoneSegment, Recording};
use crate::{seed, Error, Result};

pub use config::{FeatureFamily, LengthMode, PipelineConfig};

/// What a sample is reduced to before individual features are read off.
#[derive(Debug, Clone)]
pub enum Representation {
    Integral(IntegralImage),
    Gradients(GradientField),
    Vector(Vec<f64>),
}

/// One scalar feature: where to look and, for HoG, the trained SVM.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureDescriptor {
    Haar(HaarFeature),
    Hog(HogSvmFeature),
    /// Index into the flattened, time-warped MFCC/delta vector.
    Coefficient(usize),
}

impl fmt::Display for FeatureDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureDescriptor::Haar(h) => write!(f, "haar {h}"),
            FeatureDescriptor::Hog(h) => write!(f, "hog {h}"),
            FeatureDescriptor::Coefficient(i) => write!(f, "mfcc {i}"),
        }
    }
}

impl FromStr for FeatureDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (tag, rest) = s.split_once(' ').unwrap_or((s, ""));
        match tag {
            "haar" => Ok(FeatureDescriptor::Haar(rest.parse()?)),
            "hog" => Ok(FeatureDescriptor::Hog(rest.parse()?)),
            "mfcc" => rest
                .trim()
                .parse()
                .map(FeatureDescriptor::Coefficient)
                .map_err(|_| Error::Format(format!("bad MFCC slot `{rest}`"))),
            _ => Err(Error::Format(format!("unknown feature descriptor `{s}`"))),
        }
    }
}

/// Turns recordings and segments into representations and feature values
/// for one configuration and sample rate.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    config: PipelineConfig,
    sample_rate: u32,
    stft: StftConfig,
    bank: MelBank,
    mfcc_bank: Option<MelBank>,
    haar: Option<FeatureBank>,
}

impl FeatureExtractor {
    /// Requires a resolved configuration (see [`resolve`]).
    pub fn new(config: &PipelineConfig, sample_rate: u32) -> Result<Self> {
        if !config.is_resolved() {
            return Err(Error::Config(
                "configuration has unresolved `auto` values; resolve it against a corpus first".into(),
            ));
        }
        Self::front_end(config, sample_rate)
    }

    fn front_end(config: &PipelineConfig, sample_rate: u32) -> Result<Self> {
        config.validate()?;
        let nyquist = f64::from(sample_rate) / 2.0;
        if config.f_max > nyquist {
            return Err(Error::Config(format!(
                "f_max {} Hz exceeds the Nyquist frequency {nyquist} Hz",
                config.f_max
            )));
        }
        let stft = config.stft()?;
        let bank = build_mel_bank(config.mel_bands, stft.bins(), sample_rate, config.f_min, config.f_max)?;
        let mfcc_bank = match config.family {
            FeatureFamily::MfccStump => Some(build_mel_bank(
                config.mfcc_mel_bands,
                stft.bins(),
                sample_rate,
                config.f_min,
                config.f_max,
            )?),
            _ => None,
        };
        let mut x = FeatureExtractor {
            config: config.clone(),
            sample_rate,
            stft,
            bank,
            mfcc_bank,
            haar: None,
        };
        if config.family == FeatureFamily::Haar && config.is_resolved() {
            let (b, c) = x.image_geometry();
            x.haar = Some(match &config.haar_scales {
                Some(s) => crate::haar::enumerate_haar(b, c, s)?,
                None => FeatureBank::exhaustive(b, c)?,
            });
        }
        Ok(x)
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    fn window_mode(&self) -> WindowMode {
        match self.config.mode {
            LengthMode::FixedCenter => WindowMode::FixedCenter {
                half_width: self.config.fixed_center_half_width,
            },
            LengthMode::Margins => WindowMode::Margins {
                margin: self.config.margin,
            },
            _ => WindowMode::Exact,
        }
    }

    /// Analysed audio for a segment, zero-padded at the end to at least one
    /// frame.
    pub fn window(&self, rec: &Recording, seg: &PhoneSegment) -> Result<Vec<f64>> {
        if rec.sample_rate != self.sample_rate {
            return Err(Error::Validation(format!(
                "recording sampled at {} Hz but the pipeline expects {} Hz",
                rec.sample_rate, self.sample_rate
            )));
        }
        let mut w = extract_segment_window(rec, seg, self.window_mode());
        if w.len() < self.stft.frame_length {
            w.resize(self.stft.frame_length, 0.0);
        }
        Ok(w)
    }

    fn log_mel_with(&self, rec: &Recording, seg: &PhoneSegment, bank: &MelBank) -> Result<Spectrogram> {
        let power = stft_power(&self.window(rec, seg)?, &self.stft)?;
        log_spectrogram(&bank.apply(&power)?)
    }

    /// Log mel spectrogram of the analysed window, before clipping.
    pub fn log_mel(&self, rec: &Recording, seg: &PhoneSegment) -> Result<Spectrogram> {
        self.log_mel_with(rec, seg, &self.bank)
    }

    fn clip(&self) -> Result<ClipRange> {
        let r = self
            .config
            .clip_reference
            .ok_or_else(|| Error::Config("clip_reference is unresolved".into()))?;
        ClipRange::below(r, self.config.clip_range)
    }

    /// Rows and columns of the images features are defined on. For pooled
    /// HoG the column count is the standard width; actual images may be
    /// wider.
    pub fn image_geometry(&self) -> (usize, usize) {
        let c = &self.config;
        let (b, cols) = match c.mode {
            LengthMode::ExactWarp | LengthMode::FixedCenter => (c.target_bands, c.target_columns),
            LengthMode::Margins => (c.target_bands, c.margin_columns.unwrap_or(c.target_columns)),
            LengthMode::StackedFrames => (3 * c.target_bands, c.target_columns),
            LengthMode::HogPooled => (c.target_bands, c.hog_standard_columns),
        };
        (if c.smooth_stack { 3 * b } else { b }, cols)
    }

    /// The normalized image for a segment after length handling.
    pub fn image(&self, rec: &Recording, seg: &PhoneSegment) -> Result<Spectrogram> {
        let c = &self.config;
        let native = normalize(&self.log_mel(rec, seg)?, self.clip()?)?;
        let img = match c.mode {
            LengthMode::ExactWarp | LengthMode::FixedCenter => warp(&native, c.target_bands, c.target_columns)?,
            LengthMode::Margins => warp(&native, c.target_bands, self.image_geometry().1)?,
            LengthMode::StackedFrames => stack_frames(
                &native,
                seg.duration(self.sample_rate),
                c.target_bands,
                c.target_columns,
            )?,
            LengthMode::HogPooled => {
                let cols = native.columns().max(c.hog_standard_columns);
                warp(&native, c.target_bands, cols)?
            }
        };
        Ok(if c.smooth_stack { smooth_stack(&img) } else { img })
    }

    /// MFCCs with deltas and delta-deltas, time-warped to the target column
    /// count and flattened slot-major (slot, then column).
    pub fn mfcc_vector(&self, rec: &Recording, seg: &PhoneSegment) -> Result<Vec<f64>> {
        let bank = self
            .mfcc_bank
            .as_ref()
            .ok_or_else(|| Error::Config("MFCC features need family = mfcc-stump".into()))?;
        let frames = deltas(
            &mfcc(&self.log_mel_with(rec, seg, bank)?, self.config.mfcc_coefficients)?,
            self.config.delta_width,
        )?;
        let slots = 3 * self.config.mfcc_coefficients;
        let mut grid = Spectrogram::zeros(slots, frames.len(), Stage::Log);
        for (t, f) in frames.iter().enumerate() {
            for (k, v) in f.flatten().enumerate() {
                grid.set(k, t, v);
            }
        }
        Ok(warp(&grid, slots, self.image_geometry().1)?.values().to_vec())
    }

    pub fn represent(&self, rec: &Recording, seg: &PhoneSegment) -> Result<Representation> {
        Ok(match self.config.family {
            FeatureFamily::Haar => Representation::Integral(IntegralImage::new(&self.image(rec, seg)?)),
            FeatureFamily::HogSvm => Representation::Gradients(GradientField::new(&self.image(rec, seg)?)),
            FeatureFamily::MfccStump => Representation::Vector(self.mfcc_vector(rec, seg)?),
        })
    }

    /// Representations of the given corpus samples, in order.
    pub fn represent_all(&self, corpus: &Corpus, samples: &[usize]) -> Result<Vec<Representation>> {
        samples
            .par_iter()
            .map(|&i| {
                let s = &corpus.samples[i];
                self.represent(corpus.recording(s), &s.segment)
            })
            .collect()
    }

    /// HoG patches of the standard geometry.
    pub fn hog_patches(&self) -> Vec<HogPatch> {
        let (b, c) = self.image_geometry();
        enumerate_hog(b, c)
    }

    pub fn haar_bank(&self) -> Option<&FeatureBank> {
        self.haar.as_ref()
    }

    fn hog_histogram(&self, g: &GradientField, patch: &HogPatch) -> Result<crate::hog::HogHistogram> {
        if self.config.mode == LengthMode::HogPooled {
            g.pooled_histogram(patch, self.config.hog_standard_columns, self.config.hog_pooling)
        } else {
            g.histogram(patch)
        }
    }

    /// Value of one feature on one sample.
    pub fn evaluate(&self, d: &FeatureDescriptor, rep: &Representation) -> Result<f64> {
        match (d, rep) {
            (FeatureDescriptor::Haar(f), Representation::Integral(img)) => eval_haar(f, img),
            (FeatureDescriptor::Hog(f), Representation::Gradients(g)) => {
                Ok(f.decision(&self.hog_histogram(g, &f.patch)?))
            }
            (FeatureDescriptor::Coefficient(i), Representation::Vector(v)) => v.get(*i).copied().ok_or_else(|| {
                Error::InvalidArgument(format!("MFCC slot {i} beyond vector of {}", v.len()))
            }),
            _ => Err(Error::Model(format!(
                "feature `{d}` does not match the {} representation",
                self.config.family
            ))),
        }
    }

    /// Every candidate feature for a two-class training set, with its
    /// values on each sample. HoG candidates train one SVM per patch here,
    /// seeded from `seed`.
    pub fn pair_columns(
        &self,
        reps: &[&Representation],
        labels: &[bool],
        seed: u64,
    ) -> Result<(Vec<FeatureDescriptor>, Vec<Vec<f64>>)> {
        match self.config.family {
            FeatureFamily::Haar => {
                let bank = self.haar.as_ref().expect("Haar bank built for resolved config");
                let imgs: Vec<&IntegralImage> = reps
                    .iter()
                    .map(|r| match r {
                        Representation::Integral(i) => Ok(i),
                        _ => Err(Error::Model("expected integral images".into())),
                    })
                    .collect::<Result<_>>()?;
                if let Some(i) = imgs.iter().find(|i| (i.bands(), i.columns()) != bank.geometry()) {
                    return Err(Error::Model(format!(
                        "image is {}x{} but the Haar bank expects {:?}",
                        i.bands(),
                        i.columns(),
                        bank.geometry()
                    )));
                }
                let columns = bank
                    .features()
                    .par_iter()
                    .map(|f| imgs.iter().map(|img| f.eval(img)).collect())
                    .collect();
                let descs = bank.features().iter().copied().map(FeatureDescriptor::Haar).collect();
                Ok((descs, columns))
            }
            FeatureFamily::HogSvm => {
                let fields: Vec<&GradientField> = reps
                    .iter()
                    .map(|r| match r {
                        Representation::Gradients(g) => Ok(g),
                        _ => Err(Error::Model("expected gradient fields".into())),
                    })
                    .collect::<Result<_>>()?;
                let trained: Vec<(FeatureDescriptor, Vec<f64>)> = self
                    .hog_patches()
                    .into_par_iter()
                    .enumerate()
                    .map(|(k, patch)| {
                        let hists = fields
                            .iter()
                            .map(|g| self.hog_histogram(g, &patch))
                            .collect::<Result<Vec<_>>>()?;
                        let params = SvmParams {
                            seed: seed::derive(seed, k as u64),
                            ..SvmParams::default()
                        };
                        let fit = train_linear_svm(&hists, labels, &params)?;
                        let f = HogSvmFeature {
                            patch,
                            weights: fit.weights,
                            bias: fit.bias,
                        };
                        let values = hists.iter().map(|h| f.decision(h)).collect();
                        Ok((FeatureDescriptor::Hog(f), values))
                    })
                    .collect::<Result<_>>()?;
                Ok(trained.into_iter().unzip())
            }
            FeatureFamily::MfccStump => {
                let vecs: Vec<&Vec<f64>> = reps
                    .iter()
                    .map(|r| match r {
                        Representation::Vector(v) => Ok(v),
                        _ => Err(Error::Model("expected MFCC vectors".into())),
                    })
                    .collect::<Result<_>>()?;
                let n = vecs.first().map_or(0, |v| v.len());
                if vecs.iter().any(|v| v.len() != n) {
                    return Err(Error::Model("MFCC vectors differ in length".into()));
                }
                let columns = (0..n).map(|j| vecs.iter().map(|v| v[j]).collect()).collect();
                Ok(((0..n).map(FeatureDescriptor::Coefficient).collect(), columns))
            }
        }
    }
}

/// Fills the `auto` values of `config` from the given training samples:
/// the clip reference becomes the largest log mel value seen, and in
/// margins mode the column count grows with the share of context in the
/// average window.
pub fn resolve(config: &PipelineConfig, corpus: &Corpus, samples: &[usize]) -> Result<PipelineConfig> {
    config.validate()?;
    if samples.is_empty() {
        return Err(Error::InvalidArgument("cannot resolve a pipeline from zero samples".into()));
    }
    let rate = corpus.recording(&corpus.samples[samples[0]]).sample_rate;
    if let Some(&i) = samples
        .iter()
        .find(|&&i| corpus.recording(&corpus.samples[i]).sample_rate != rate)
    {
        return Err(Error::Validation(format!(
            "sample {i} has a different sample rate than sample {}",
            samples[0]
        )));
    }
    let mut out = config.clone();
    if out.mode == LengthMode::Margins && out.margin_columns.is_none() {
        let mean = samples
            .iter()
            .map(|&i| corpus.samples[i].segment.len() as f64)
            .sum::<f64>()
            / samples.len() as f64;
        let m = (out.margin * f64::from(rate)).round();
        let cols = (out.target_columns as f64 * (mean + 2.0 * m) / mean).round() as usize;
        out.margin_columns = Some(cols.max(1));
    }
    if out.family != FeatureFamily::MfccStump && out.clip_reference.is_none() {
        let front = FeatureExtractor::front_end(&out, rate)?;
        let peak = samples
            .par_iter()
            .map(|&i| {
                let s = &corpus.samples[i];
                let lm = front.log_mel(corpus.recording(s), &s.segment)?;
                Ok(lm.values().iter().copied().fold(f64::NEG_INFINITY, f64::max))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        out.clip_reference = Some(peak);
    }
    Ok(out)
}
