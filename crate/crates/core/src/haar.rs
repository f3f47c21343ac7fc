//! Haar-like rectangle features evaluated through integral images.
//!
//! Rectangle sums are accumulated in 128-bit fixed point (2⁻⁵⁰ resolution)
//! rather than floating point. Sums of equal-area blocks of a constant image
//! are then bit-identical, so every feature's response on a constant image
//! is exactly zero, and adding a constant to the image leaves responses
//! exactly unchanged.

use std::fmt;
use std::str::FromStr;

use crate::dsp::Spectrogram;
use crate::{Error, Result};

const FIXED_SCALE: f64 = (1u64 << 50) as f64;

fn to_fixed(v: f64) -> i128 {
    (v * FIXED_SCALE).round() as i128
}

fn from_fixed(v: i128) -> f64 {
    v as f64 / FIXED_SCALE
}

/// Cumulative sums over a `(bands + 1) × (columns + 1)` grid: entry `(i, j)`
/// is the sum of all pixels with band `< i` and column `< j`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralImage {
    bands: usize,
    columns: usize,
    sums: Vec<i128>,
}

impl IntegralImage {
    pub fn new(s: &Spectrogram) -> Self {
        let (bands, columns) = (s.bands(), s.columns());
        let stride = columns + 1;
        let mut sums = vec![0i128; (bands + 1) * stride];
        for b in 0..bands {
            let mut row_sum = 0i128;
            for c in 0..columns {
                row_sum += to_fixed(s.get(b, c));
                sums[(b + 1) * stride + c + 1] = sums[b * stride + c + 1] + row_sum;
            }
        }
        IntegralImage {
            bands,
            columns,
            sums,
        }
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        from_fixed(self.sums[i * (self.columns + 1) + j])
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> i128 {
        self.sums[i * (self.columns + 1) + j]
    }

    #[inline]
    fn rect_fixed(&self, band: usize, column: usize, height: usize, width: usize) -> i128 {
        let (b1, c1) = (band + height, column + width);
        self.at(b1, c1) - self.at(band, c1) - self.at(b1, column) + self.at(band, column)
    }

    /// Sum of the `height × width` rectangle whose top-left pixel is
    /// `(band, column)`. Zero-area rectangles sum to 0.
    pub fn rect_sum(&self, band: usize, column: usize, height: usize, width: usize) -> f64 {
        assert!(band + height <= self.bands && column + width <= self.columns);
        from_fixed(self.rect_fixed(band, column, height, width))
    }
}

/// The six prototype shapes. Regions are laid out on a block grid; the
/// weights of each kind sum to zero over equal-area blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HaarKind {
    /// Top half +1, bottom half −1 (responds to horizontal edges).
    EdgeHorizontal,
    /// Left half +1, right half −1 (responds to vertical edges).
    EdgeVertical,
    /// Three stacked strips weighted −1, +2, −1.
    LineHorizontal,
    /// Three side-by-side strips weighted −1, +2, −1.
    LineVertical,
    /// 3×3 blocks: surround −1, center +8.
    CenterSurround,
    /// 2×2 blocks: +1 on the main diagonal, −1 off it.
    Diagonal,
}

impl HaarKind {
    pub const ALL: [HaarKind; 6] = [
        HaarKind::EdgeHorizontal,
        HaarKind::EdgeVertical,
        HaarKind::LineHorizontal,
        HaarKind::LineVertical,
        HaarKind::CenterSurround,
        HaarKind::Diagonal,
    ];

    /// `(blocks across columns, blocks across bands)`.
    pub fn blocks(self) -> (usize, usize) {
        match self {
            HaarKind::EdgeHorizontal => (1, 2),
            HaarKind::EdgeVertical => (2, 1),
            HaarKind::LineHorizontal => (1, 3),
            HaarKind::LineVertical => (3, 1),
            HaarKind::CenterSurround => (3, 3),
            HaarKind::Diagonal => (2, 2),
        }
    }

    /// Integer weight of block `(bx, by)`.
    pub fn weight(self, bx: usize, by: usize) -> i128 {
        match self {
            HaarKind::EdgeHorizontal => [1, -1][by],
            HaarKind::EdgeVertical => [1, -1][bx],
            HaarKind::LineHorizontal => [-1, 2, -1][by],
            HaarKind::LineVertical => [-1, 2, -1][bx],
            HaarKind::CenterSurround => {
                if bx == 1 && by == 1 {
                    8
                } else {
                    -1
                }
            }
            HaarKind::Diagonal => {
                if bx == by {
                    1
                } else {
                    -1
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HaarKind::EdgeHorizontal => "edge_horizontal",
            HaarKind::EdgeVertical => "edge_vertical",
            HaarKind::LineHorizontal => "line_horizontal",
            HaarKind::LineVertical => "line_vertical",
            HaarKind::CenterSurround => "center_surround",
            HaarKind::Diagonal => "diagonal",
        }
    }
}

impl FromStr for HaarKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        HaarKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown Haar kind `{s}`")))
    }
}

/// One Haar-like feature: a kind placed at `(band, column)` with a footprint
/// of `width` columns by `height` bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HaarFeature {
    pub kind: HaarKind,
    pub band: usize,
    pub column: usize,
    pub width: usize,
    pub height: usize,
}

impl HaarFeature {
    pub fn new(kind: HaarKind, band: usize, column: usize, width: usize, height: usize) -> Result<Self> {
        let (bx, by) = kind.blocks();
        if width == 0 || height == 0 || !width.is_multiple_of(bx) || !height.is_multiple_of(by) {
            return Err(Error::InvalidArgument(format!(
                "{} footprint {width}x{height} is not a multiple of its {bx}x{by} block grid",
                kind.name()
            )));
        }
        Ok(HaarFeature {
            kind,
            band,
            column,
            width,
            height,
        })
    }

    pub fn fits(&self, bands: usize, columns: usize) -> bool {
        self.band + self.height <= bands && self.column + self.width <= columns
    }

    fn eval_fixed(&self, img: &IntegralImage) -> i128 {
        let (bx, by) = self.kind.blocks();
        let (cw, ch) = (self.width / bx, self.height / by);
        let mut acc = 0i128;
        for y in 0..by {
            for x in 0..bx {
                let sum = img.rect_fixed(self.band + y * ch, self.column + x * cw, ch, cw);
                acc += self.kind.weight(x, y) * sum;
            }
        }
        acc
    }

    /// Weighted block sums. Panics if the feature does not fit `img`; use
    /// [`eval_haar`] for a checked call.
    pub fn eval(&self, img: &IntegralImage) -> f64 {
        assert!(self.fits(img.bands(), img.columns()), "Haar feature out of bounds");
        from_fixed(self.eval_fixed(img))
    }
}

impl fmt::Display for HaarFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {}",
            self.kind.name(),
            self.band,
            self.column,
            self.width,
            self.height
        )
    }
}

impl FromStr for HaarFeature {
    type Err = Error;

    /// Parses `kind band column width height`.
    fn from_str(s: &str) -> Result<Self> {
        let t: Vec<&str> = s.split_whitespace().collect();
        if t.len() != 5 {
            return Err(Error::Format(format!("Haar descriptor `{s}` needs 5 fields")));
        }
        let num = |x: &str| {
            x.parse::<usize>()
                .map_err(|_| Error::Format(format!("bad Haar field `{x}`")))
        };
        HaarFeature::new(t[0].parse()?, num(t[1])?, num(t[2])?, num(t[3])?, num(t[4])?)
            .map_err(|e| Error::Format(e.to_string()))
    }
}

/// Checked evaluation of one feature.
pub fn eval_haar(f: &HaarFeature, img: &IntegralImage) -> Result<f64> {
    if !f.fits(img.bands(), img.columns()) {
        return Err(Error::InvalidArgument(format!(
            "feature `{f}` does not fit a {}x{} image",
            img.bands(),
            img.columns()
        )));
    }
    Ok(f.eval(img))
}

/// Every feature of every kind, cell size and position for one image
/// geometry, in a fixed order: kind, cell height, cell width, band, column.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBank {
    bands: usize,
    columns: usize,
    features: Vec<HaarFeature>,
}

/// Enumerates the bank. Each entry of `scales` is a cell size in pixels,
/// used independently for cell width and cell height.
pub fn enumerate_haar(bands: usize, columns: usize, scales: &[usize]) -> Result<FeatureBank> {
    let mut scales: Vec<usize> = scales.iter().copied().filter(|&s| s > 0).collect();
    if scales.is_empty() {
        return Err(Error::InvalidArgument("Haar scale set is empty".into()));
    }
    scales.sort_unstable();
    scales.dedup();
    let mut features = Vec::new();
    for kind in HaarKind::ALL {
        let (bx, by) = kind.blocks();
        for &ch in &scales {
            for &cw in &scales {
                let (w, h) = (cw * bx, ch * by);
                if w > columns || h > bands {
                    continue;
                }
                for band in 0..=bands - h {
                    for column in 0..=columns - w {
                        features.push(HaarFeature {
                            kind,
                            band,
                            column,
                            width: w,
                            height: h,
                        });
                    }
                }
            }
        }
    }
    Ok(FeatureBank {
        bands,
        columns,
        features,
    })
}

impl FeatureBank {
    /// All cell sizes that can fit the geometry.
    pub fn exhaustive(bands: usize, columns: usize) -> Result<Self> {
        let scales: Vec<usize> = (1..=bands.max(columns)).collect();
        enumerate_haar(bands, columns, &scales)
    }

    pub fn geometry(&self) -> (usize, usize) {
        (self.bands, self.columns)
    }

    pub fn features(&self) -> &[HaarFeature] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Responses of every feature, in bank order.
    pub fn evaluate_all(&self, img: &IntegralImage) -> Result<Vec<f64>> {
        if (img.bands(), img.columns()) != (self.bands, self.columns) {
            return Err(Error::InvalidArgument(format!(
                "bank built for {}x{} images, got {}x{}",
                self.bands,
                self.columns,
                img.bands(),
                img.columns()
            )));
        }
        Ok(self.features.iter().map(|f| from_fixed(f.eval_fixed(img))).collect())
    }
}
