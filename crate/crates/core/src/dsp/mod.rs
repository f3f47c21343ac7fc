//! Spectrogram front end: STFT power, mel rescaling, log compression,
//! clipping and normalization to `[0, 1]`, plus the image-level transforms
//! used for variable-length phones (warping, frame stacking, smoothing
//! stacks) and MFCC/delta features.

mod image;
mod mel;
mod mfcc;
mod stft;
mod window;

pub use image::{smooth_stack, stack_frames, warp, STACK_BOUNDARIES};
pub use mel::{
    build_mel_bank, hz_to_mel, log_spectrogram, mel_to_hz, normalize, process_spectrogram,
    ClipRange, MelBank, LOG_EPSILON,
};
pub use mfcc::{dct_ortho, deltas, idct_ortho, mfcc, MfccFrame};
pub use stft::{hamming, stft_power, StftConfig};
pub use window::{extract_segment_window, WindowMode};

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Processing stage of a [`Spectrogram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Power,
    Mel,
    Log,
    Normalized,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Power => "power",
            Stage::Mel => "mel",
            Stage::Log => "log",
            Stage::Normalized => "normalized",
        })
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(Stage::Power),
            "mel" => Ok(Stage::Mel),
            "log" => Ok(Stage::Log),
            "normalized" => Ok(Stage::Normalized),
            _ => Err(Error::Format(format!("unknown spectrogram stage `{s}`"))),
        }
    }
}

/// A (band × column) grid of reals, stored row-major by band. Band 0 is the
/// lowest frequency; columns run forward in time.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    bands: usize,
    columns: usize,
    values: Vec<f64>,
    stage: Stage,
}

impl Spectrogram {
    pub fn new(bands: usize, columns: usize, values: Vec<f64>, stage: Stage) -> Result<Self> {
        if bands == 0 || columns == 0 {
            return Err(Error::InvalidArgument(format!(
                "spectrogram must be at least 1x1, got {bands}x{columns}"
            )));
        }
        if values.len() != bands * columns {
            return Err(Error::InvalidArgument(format!(
                "{} values do not fill a {bands}x{columns} grid",
                values.len()
            )));
        }
        Ok(Spectrogram {
            bands,
            columns,
            values,
            stage,
        })
    }

    pub fn zeros(bands: usize, columns: usize, stage: Stage) -> Self {
        assert!(bands > 0 && columns > 0, "empty spectrogram");
        Spectrogram {
            bands,
            columns,
            values: vec![0.0; bands * columns],
            stage,
        }
    }

    /// Builds a grid by evaluating `f(band, column)`.
    pub fn from_fn(bands: usize, columns: usize, stage: Stage, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut s = Spectrogram::zeros(bands, columns, stage);
        for b in 0..bands {
            for c in 0..columns {
                s.values[b * columns + c] = f(b, c);
            }
        }
        s
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, band: usize, column: usize) -> f64 {
        self.values[band * self.columns + column]
    }

    #[inline]
    pub fn set(&mut self, band: usize, column: usize, v: f64) {
        self.values[band * self.columns + column] = v;
    }

    pub fn row(&self, band: usize) -> &[f64] {
        &self.values[band * self.columns..(band + 1) * self.columns]
    }

    pub fn column(&self, column: usize) -> Vec<f64> {
        (0..self.bands).map(|b| self.get(b, column)).collect()
    }

    pub(crate) fn require_stage(&self, stage: Stage, op: &str) -> Result<()> {
        if self.stage != stage {
            return Err(Error::InvalidArgument(format!(
                "{op} needs a {stage} spectrogram, got {}",
                self.stage
            )));
        }
        Ok(())
    }

    /// Text grid: a `# spectrogram <stage> <bands> <columns>` header, then
    /// one line per band (lowest first) of space-separated values.
    pub fn to_text_grid(&self) -> String {
        let mut out = format!("# spectrogram {} {} {}\n", self.stage, self.bands, self.columns);
        for b in 0..self.bands {
            let row: Vec<String> = self.row(b).iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text_grid(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty spectrogram grid".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 || h[0] != "#" || h[1] != "spectrogram" {
            return Err(Error::Format(format!("bad spectrogram header `{header}`")));
        }
        let stage: Stage = h[2].parse()?;
        let parse_dim = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Format(format!("bad dimension `{s}`")))
        };
        let (bands, columns) = (parse_dim(h[3])?, parse_dim(h[4])?);
        let mut values = Vec::with_capacity(bands * columns);
        for line in lines {
            for tok in line.split_whitespace() {
                values.push(
                    tok.parse::<f64>()
                        .map_err(|_| Error::Format(format!("bad value `{tok}`")))?,
                );
            }
        }
        Spectrogram::new(bands, columns, values, stage)
            .map_err(|e| Error::Format(e.to_string()))
    }
}
