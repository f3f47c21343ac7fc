use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use crate::boost::BoostMode;
use crate::dsp::StftConfig;
use crate::hog::Pooling;
use crate::{Error, Result};

/// How segments of different lengths are brought to a common geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LengthMode {
    /// The exact segment, warped to the target size.
    #[default]
    ExactWarp,
    /// A fixed window around the segment center, warped to the target size.
    FixedCenter,
    /// The segment plus context on both sides, warped to a widened target.
    Margins,
    /// Warped into one of three duration-keyed frames stacked vertically.
    StackedFrames,
    /// Native length kept; HoG histograms pooled across shifted positions.
    HogPooled,
}

impl LengthMode {
    pub const ALL: [LengthMode; 5] = [
        LengthMode::ExactWarp,
        LengthMode::FixedCenter,
        LengthMode::Margins,
        LengthMode::StackedFrames,
        LengthMode::HogPooled,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LengthMode::ExactWarp => "exact-warp",
            LengthMode::FixedCenter => "fixed-center",
            LengthMode::Margins => "margins",
            LengthMode::StackedFrames => "stacked-frames",
            LengthMode::HogPooled => "hog-pooled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FeatureFamily {
    #[default]
    Haar,
    HogSvm,
    MfccStump,
}

impl FeatureFamily {
    pub const ALL: [FeatureFamily; 3] = [FeatureFamily::Haar, FeatureFamily::HogSvm, FeatureFamily::MfccStump];

    pub fn name(self) -> &'static str {
        match self {
            FeatureFamily::Haar => "haar",
            FeatureFamily::HogSvm => "hog-svm",
            FeatureFamily::MfccStump => "mfcc-stump",
        }
    }
}

macro_rules! named_enum {
    ($t:ty, $what:literal) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $t {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                <$t>::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| {
                    let names: Vec<&str> = <$t>::ALL.iter().map(|v| v.name()).collect();
                    Error::Config(format!("{} must be one of {}, got `{s}`", $what, names.join(", ")))
                })
            }
        }
    };
}

named_enum!(LengthMode, "mode");
named_enum!(FeatureFamily, "family");

/// Every knob of the front end, feature family and boosting. Stored in full
/// in model manifests. `None` in `clip_reference` and `margin_columns`
/// means "derive from the training corpus".
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub frame_length: usize,
    pub increment: usize,
    pub mel_bands: usize,
    pub f_min: f64,
    pub f_max: f64,
    /// Width of the clip interval in log10 units, below the reference.
    pub clip_range: f64,
    /// Top of the clip interval (log10 mel energy).
    pub clip_reference: Option<f64>,
    pub mode: LengthMode,
    pub target_bands: usize,
    pub target_columns: usize,
    /// Seconds either side of the segment center.
    pub fixed_center_half_width: f64,
    /// Seconds of context either side.
    pub margin: f64,
    pub margin_columns: Option<usize>,
    pub hog_standard_columns: usize,
    pub hog_pooling: Pooling,
    pub smooth_stack: bool,
    pub family: FeatureFamily,
    /// Haar cell sizes; `None` uses every size that fits.
    pub haar_scales: Option<Vec<usize>>,
    pub mfcc_mel_bands: usize,
    pub mfcc_coefficients: usize,
    pub delta_width: usize,
    pub boosting: BoostMode,
    pub rounds: usize,
    pub seed: u64,
    pub train_one_vs_all: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            frame_length: 128,
            increment: 64,
            mel_bands: 14,
            f_min: 0.0,
            f_max: 8000.0,
            clip_range: 6.0,
            clip_reference: None,
            mode: LengthMode::ExactWarp,
            target_bands: 14,
            target_columns: 15,
            fixed_center_half_width: 0.12,
            margin: 0.03,
            margin_columns: None,
            hog_standard_columns: 15,
            hog_pooling: Pooling::Avg,
            smooth_stack: false,
            family: FeatureFamily::Haar,
            haar_scales: None,
            mfcc_mel_bands: 40,
            mfcc_coefficients: 16,
            delta_width: 2,
            boosting: BoostMode::Gentle,
            rounds: 100,
            seed: 0,
            train_one_vs_all: false,
        }
    }
}

fn auto<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_string(), T::to_string)
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
}

fn parse_auto<T: FromStr>(key: &str, v: &str) -> Result<Option<T>> {
    if v == "auto" {
        Ok(None)
    } else {
        parse_value(key, v).map(Some)
    }
}

impl PipelineConfig {
    /// Parses `key = value` lines; `#` starts a comment. Unset keys keep
    /// their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = PipelineConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            c.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "frame_length" => self.frame_length = parse_value(key, v)?,
            "increment" => self.increment = parse_value(key, v)?,
            "mel_bands" => self.mel_bands = parse_value(key, v)?,
            "f_min" => self.f_min = parse_value(key, v)?,
            "f_max" => self.f_max = parse_value(key, v)?,
            "clip_range" => self.clip_range = parse_value(key, v)?,
            "clip_reference" => self.clip_reference = parse_auto(key, v)?,
            "mode" => self.mode = v.parse()?,
            "target_bands" => self.target_bands = parse_value(key, v)?,
            "target_columns" => self.target_columns = parse_value(key, v)?,
            "fixed_center_half_width" => self.fixed_center_half_width = parse_value(key, v)?,
            "margin" => self.margin = parse_value(key, v)?,
            "margin_columns" => self.margin_columns = parse_auto(key, v)?,
            "hog_standard_columns" => self.hog_standard_columns = parse_value(key, v)?,
            "hog_pooling" => self.hog_pooling = v.parse()?,
            "smooth_stack" => self.smooth_stack = parse_value(key, v)?,
            "family" => self.family = v.parse()?,
            "haar_scales" => {
                self.haar_scales = if v == "all" {
                    None
                } else {
                    Some(
                        v.split(',')
                            .map(|s| parse_value(key, s.trim()))
                            .collect::<Result<_>>()?,
                    )
                }
            }
            "mfcc_mel_bands" => self.mfcc_mel_bands = parse_value(key, v)?,
            "mfcc_coefficients" => self.mfcc_coefficients = parse_value(key, v)?,
            "delta_width" => self.delta_width = parse_value(key, v)?,
            "boosting" => self.boosting = v.parse()?,
            "rounds" => self.rounds = parse_value(key, v)?,
            "seed" => self.seed = parse_value(key, v)?,
            "train_one_vs_all" => self.train_one_vs_all = parse_value(key, v)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Every key in a fixed order; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("frame_length", self.frame_length.to_string());
        put("increment", self.increment.to_string());
        put("mel_bands", self.mel_bands.to_string());
        put("f_min", self.f_min.to_string());
        put("f_max", self.f_max.to_string());
        put("clip_range", self.clip_range.to_string());
        put("clip_reference", auto(&self.clip_reference));
        put("mode", self.mode.to_string());
        put("target_bands", self.target_bands.to_string());
        put("target_columns", self.target_columns.to_string());
        put("fixed_center_half_width", self.fixed_center_half_width.to_string());
        put("margin", self.margin.to_string());
        put("margin_columns", auto(&self.margin_columns));
        put("hog_standard_columns", self.hog_standard_columns.to_string());
        put("hog_pooling", self.hog_pooling.to_string());
        put("smooth_stack", self.smooth_stack.to_string());
        put("family", self.family.to_string());
        put(
            "haar_scales",
            self.haar_scales.as_ref().map_or_else(
                || "all".to_string(),
                |v| v.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
            ),
        );
        put("mfcc_mel_bands", self.mfcc_mel_bands.to_string());
        put("mfcc_coefficients", self.mfcc_coefficients.to_string());
        put("delta_width", self.delta_width.to_string());
        put("boosting", self.boosting.to_string());
        put("rounds", self.rounds.to_string());
        put("seed", self.seed.to_string());
        put("train_one_vs_all", self.train_one_vs_all.to_string());
        s
    }

    pub fn stft(&self) -> Result<StftConfig> {
        StftConfig::new(self.frame_length, self.increment)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.stft().map_err(|e| Error::Config(e.to_string()))?;
        if self.mel_bands == 0 || self.mfcc_mel_bands == 0 {
            return bad("mel band counts must be positive".into());
        }
        if !(self.f_min >= 0.0 && self.f_min < self.f_max) {
            return bad(format!("need 0 <= f_min < f_max, got {} and {}", self.f_min, self.f_max));
        }
        if !(self.clip_range > 0.0 && self.clip_range.is_finite()) {
            return bad("clip_range must be positive".into());
        }
        if self.clip_reference.is_some_and(|r| !r.is_finite()) {
            return bad("clip_reference must be finite".into());
        }
        if self.target_bands == 0 || self.target_columns == 0 || self.hog_standard_columns == 0 {
            return bad("target dimensions must be positive".into());
        }
        if self.margin_columns == Some(0) {
            return bad("margin_columns must be positive".into());
        }
        if !(self.fixed_center_half_width > 0.0) {
            return bad("fixed_center_half_width must be positive".into());
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return bad("margin must be nonnegative".into());
        }
        if let Some(s) = &self.haar_scales {
            if s.is_empty() || s.contains(&0) {
                return bad("haar_scales must be positive cell sizes".into());
            }
        }
        if self.mfcc_coefficients == 0 || self.mfcc_coefficients > self.mfcc_mel_bands {
            return bad(format!(
                "mfcc_coefficients must be in 1..={}",
                self.mfcc_mel_bands
            ));
        }
        if self.delta_width == 0 {
            return bad("delta_width must be at least 1".into());
        }
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        use FeatureFamily as F;
        use LengthMode as M;
        let compatible = match (self.mode, self.family) {
            (M::HogPooled, f) => f == F::HogSvm,
            (M::StackedFrames, f) => f != F::MfccStump,
            _ => true,
        };
        if !compatible {
            return bad(format!(
                "mode {} cannot be used with family {}",
                self.mode, self.family
            ));
        }
        if self.smooth_stack && self.family == F::MfccStump {
            return bad("smooth_stack applies to image features only".into());
        }
        Ok(())
    }

    pub fn is_resolved(&self) -> bool {
        (self.family == FeatureFamily::MfccStump || self.clip_reference.is_some())
            && (self.mode != LengthMode::Margins || self.margin_columns.is_some())
    }
}
