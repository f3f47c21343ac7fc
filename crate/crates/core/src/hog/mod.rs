//! Histograms of oriented gradients over spectrogram patches, and linear
//! SVMs that turn one patch's histogram into a scalar feature.

mod svm;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::dsp::Spectrogram;
use crate::{Error, Result};

pub use svm::{train_linear_svm, train_patch_svm, train_patch_svm_with, SvmFit, SvmParams};

pub const HOG_BINS: usize = 9;
const BIN_WIDTH: f64 = 2.0 * PI / HOG_BINS as f64;
/// Added to the distance from the patch center before dividing.
pub const CENTER_EPSILON: f64 = 0.5;

/// A rectangular patch: origin `(band, column)`, `width` columns by
/// `height` bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HogPatch {
    pub band: usize,
    pub column: usize,
    pub width: usize,
    pub height: usize,
}

impl HogPatch {
    pub fn new(band: usize, column: usize, width: usize, height: usize) -> Result<Self> {
        let t = width.min(height);
        let shape_ok =
            t >= 2 && t.is_multiple_of(2) && [(t, t), (2 * t, t), (t, 2 * t)].contains(&(width, height));
        if !shape_ok {
            return Err(Error::InvalidArgument(format!(
                "HoG patch {width}x{height} is not (t,t), (2t,t) or (t,2t) for even t >= 2"
            )));
        }
        Ok(HogPatch {
            band,
            column,
            width,
            height,
        })
    }

    pub fn fits(&self, bands: usize, columns: usize) -> bool {
        self.band + self.height <= bands && self.column + self.width <= columns
    }

    fn at_column(self, column: usize) -> Self {
        HogPatch { column, ..self }
    }
}

impl fmt::Display for HogPatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.band, self.column, self.width, self.height)
    }
}

/// All patches strictly smaller than the image in both dimensions, ordered
/// by t, then shape `(t,t)`, `(2t,t)`, `(t,2t)`, then band, then column.
pub fn enumerate_hog(bands: usize, columns: usize) -> Vec<HogPatch> {
    let mut out = Vec::new();
    let mut t = 2;
    while t < bands && t < columns {
        for (w, h) in [(t, t), (2 * t, t), (t, 2 * t)] {
            if w >= columns || h >= bands {
                continue;
            }
            for band in 0..=bands - h {
                for column in 0..=columns - w {
                    out.push(HogPatch {
                        band,
                        column,
                        width: w,
                        height: h,
                    });
                }
            }
        }
        t += 2;
    }
    out
}

/// Nine orientation bins.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HogHistogram {
    pub bins: [f64; HOG_BINS],
}

impl HogHistogram {
    /// Divides by the largest bin. An all-zero histogram is left as is.
    pub fn normalized(mut self) -> Self {
        let max = self.bins.iter().copied().fold(0.0, f64::max);
        if max > 0.0 {
            self.bins.iter_mut().for_each(|b| *b /= max);
        }
        self
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().sum()
    }
}

/// Orientation bin of the gradient `(dx, dy)`, where `dx` runs along
/// columns and `dy` along bands.
pub fn orientation_bin(dx: f64, dy: f64) -> usize {
    let mut a = dy.atan2(dx);
    if a < 0.0 {
        a += 2.0 * PI;
    }
    ((a / BIN_WIDTH) as usize).min(HOG_BINS - 1)
}

/// Per-pixel gradient bin and magnitude for one image. Pixels on the image
/// border have no central difference and carry no gradient.
#[derive(Debug, Clone)]
pub struct GradientField {
    bands: usize,
    columns: usize,
    bin: Vec<u8>,
    magnitude: Vec<f64>,
}

impl GradientField {
    pub fn new(s: &Spectrogram) -> Self {
        let (bands, columns) = (s.bands(), s.columns());
        let mut bin = vec![0u8; bands * columns];
        let mut magnitude = vec![0.0; bands * columns];
        for b in 1..bands.saturating_sub(1) {
            for c in 1..columns.saturating_sub(1) {
                let dx = s.get(b, c + 1) - s.get(b, c - 1);
                let dy = s.get(b + 1, c) - s.get(b - 1, c);
                bin[b * columns + c] = orientation_bin(dx, dy) as u8;
                magnitude[b * columns + c] = dx.hypot(dy);
            }
        }
        GradientField {
            bands,
            columns,
            bin,
            magnitude,
        }
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    fn check(&self, patch: &HogPatch) -> Result<()> {
        if !patch.fits(self.bands, self.columns) {
            return Err(Error::InvalidArgument(format!(
                "HoG patch `{patch}` does not fit a {}x{} image",
                self.bands, self.columns
            )));
        }
        let rows = interior(patch.band, patch.height, self.bands);
        let cols = interior(patch.column, patch.width, self.columns);
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "HoG patch `{patch}` has no pixels with in-image neighbors"
            )));
        }
        Ok(())
    }

    /// Distance-weighted gradient sums before normalization.
    pub fn raw_histogram(&self, patch: &HogPatch) -> Result<HogHistogram> {
        self.check(patch)?;
        Ok(self.raw_unchecked(patch))
    }

    fn raw_unchecked(&self, patch: &HogPatch) -> HogHistogram {
        let cb = patch.band as f64 + (patch.height as f64 - 1.0) / 2.0;
        let cc = patch.column as f64 + (patch.width as f64 - 1.0) / 2.0;
        let mut h = HogHistogram::default();
        for b in interior(patch.band, patch.height, self.bands) {
            let db = b as f64 - cb;
            for c in interior(patch.column, patch.width, self.columns) {
                let i = b * self.columns + c;
                let d = db.hypot(c as f64 - cc);
                h.bins[self.bin[i] as usize] += self.magnitude[i] / (d + CENTER_EPSILON);
            }
        }
        h
    }

    pub fn histogram(&self, patch: &HogPatch) -> Result<HogHistogram> {
        Ok(self.raw_histogram(patch)?.normalized())
    }

    /// Bin-wise pooled normalized histograms of `patch` shifted across the
    /// column span that corresponds to its origin in a `standard_columns`
    /// wide image. With as many columns as the standard, this is just the
    /// patch's own histogram.
    pub fn pooled_histogram(
        &self,
        patch: &HogPatch,
        standard_columns: usize,
        pooling: Pooling,
    ) -> Result<HogHistogram> {
        let t1 = self.columns;
        let t0 = standard_columns;
        if t0 == 0 || t1 < t0 {
            return Err(Error::InvalidArgument(format!(
                "pooling needs at least {t0} columns, got {t1}"
            )));
        }
        if !patch.fits(self.bands, t0) {
            return Err(Error::InvalidArgument(format!(
                "HoG patch `{patch}` does not fit the {}x{t0} standard geometry",
                self.bands
            )));
        }
        if t1 == t0 {
            return self.histogram(patch);
        }
        let (lo, hi) = pooling_span(patch.column, patch.width, t0, t1);
        let mut acc = HogHistogram::default();
        if pooling == Pooling::Max {
            acc.bins = [f64::NEG_INFINITY; HOG_BINS];
        }
        for col in lo..=hi {
            let h = self.histogram(&patch.at_column(col))?;
            for (a, v) in acc.bins.iter_mut().zip(h.bins) {
                match pooling {
                    Pooling::Avg => *a += v,
                    Pooling::Max => *a = a.max(v),
                }
            }
        }
        if pooling == Pooling::Avg {
            let n = (hi - lo + 1) as f64;
            acc.bins.iter_mut().for_each(|a| *a /= n);
        }
        Ok(acc)
    }
}

/// Inclusive column span `[floor(t·T1/T0) − 1, ceil(t·T1/T0)]`, clamped so
/// a patch of `width` stays inside `t1` columns.
pub fn pooling_span(t: usize, width: usize, t0: usize, t1: usize) -> (usize, usize) {
    let last = t1 - width;
    let scaled = t * t1;
    let floor = scaled / t0;
    let ceil = scaled.div_ceil(t0);
    let lo = floor.saturating_sub(1).min(last);
    let hi = ceil.min(last);
    (lo, hi)
}

/// Pixels of `[start, start+len)` that have neighbors on both sides inside
/// `[0, extent)`.
fn interior(start: usize, len: usize, extent: usize) -> std::ops::Range<usize> {
    let lo = start.max(1);
    let hi = (start + len).min(extent.saturating_sub(1));
    lo..hi.max(lo)
}

/// Normalized histogram of one patch.
pub fn hog_histogram(s: &Spectrogram, patch: &HogPatch) -> Result<HogHistogram> {
    GradientField::new(s).histogram(patch)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Pooling {
    #[default]
    Avg,
    Max,
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pooling::Avg => "avg",
            Pooling::Max => "max",
        })
    }
}

impl FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "avg" => Ok(Pooling::Avg),
            "max" => Ok(Pooling::Max),
            _ => Err(Error::Config(format!("pooling must be avg or max, got `{s}`"))),
        }
    }
}

/// A patch plus the linear SVM trained on its histograms. The feature value
/// is the raw decision function, not its sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HogSvmFeature {
    pub patch: HogPatch,
    pub weights: [f64; HOG_BINS],
    pub bias: f64,
}

impl HogSvmFeature {
    pub fn decision(&self, h: &HogHistogram) -> f64 {
        self.weights.iter().zip(h.bins).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }

    pub fn eval_field(&self, g: &GradientField) -> Result<f64> {
        Ok(self.decision(&g.histogram(&self.patch)?))
    }
}

impl fmt::Display for HogSvmFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.patch)?;
        for w in self.weights {
            write!(f, " {w}")?;
        }
        write!(f, " {}", self.bias)
    }
}

impl FromStr for HogSvmFeature {
    type Err = Error;

    /// Parses `band column width height w0 .. w8 bias`.
    fn from_str(s: &str) -> Result<Self> {
        let t: Vec<&str> = s.split_whitespace().collect();
        if t.len() != 4 + HOG_BINS + 1 {
            return Err(Error::Format(format!(
                "HoG descriptor `{s}` needs {} fields",
                4 + HOG_BINS + 1
            )));
        }
        let int = |x: &str| {
            x.parse::<usize>()
                .map_err(|_| Error::Format(format!("bad HoG patch field `{x}`")))
        };
        let real = |x: &str| match x.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Format(format!("bad HoG weight `{x}`"))),
        };
        let patch = HogPatch::new(int(t[0])?, int(t[1])?, int(t[2])?, int(t[3])?)
            .map_err(|e| Error::Format(e.to_string()))?;
        let mut weights = [0.0; HOG_BINS];
        for (w, x) in weights.iter_mut().zip(&t[4..4 + HOG_BINS]) {
            *w = real(x)?;
        }
        Ok(HogSvmFeature {
            patch,
            weights,
            bias: real(t[4 + HOG_BINS])?,
        })
    }
}

/// Raw SVM output on the patch's histogram.
pub fn eval_hog_feature(f: &HogSvmFeature, s: &Spectrogram) -> Result<f64> {
    f.eval_field(&GradientField::new(s))
}

/// SVM output on the pooled histogram; `standard_columns` is the width the
/// patch origin refers to.
pub fn pooled_hog_feature(
    f: &HogSvmFeature,
    s: &Spectrogram,
    standard_columns: usize,
    pooling: Pooling,
) -> Result<f64> {
    let g = GradientField::new(s);
    Ok(f.decision(&g.pooled_histogram(&f.patch, standard_columns, pooling)?))
}
