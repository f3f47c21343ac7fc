//! Audio and label ingestion: WAV files, segmentations, phone sets and
//! synthetic corpora.

mod corpus;
mod phones;
mod segmentation;
mod synth;
mod wav;

pub use corpus::{Corpus, Sample, GROUPS_FILE, PHONES_FILE, PHONE_MAP_FILE};
pub use phones::{PhoneMap, PhoneSet, TIMIT_48, TIMIT_61_TO_48, TIMIT_GROUPS};
pub use segmentation::{
    format_segmentation, parse_segment_lines, parse_segmentation, parse_segmentation_mapped,
    read_segmentation, SegmentLine,
};
pub use synth::{generate_corpus, ClassRecipe, Formant, Jitter, NoiseBurst, SynthSpec, Transient};
pub use wav::{decode_wav, encode_wav, read_wav, write_wav};

use crate::Result;

/// A mono recording with samples scaled to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Recording {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(crate::Error::Validation("sample rate must be positive".into()));
        }
        Ok(Recording {
            samples,
            sample_rate,
        })
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }
}

/// A labeled half-open interval `[start, end)` of sample indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhoneSegment {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

impl PhoneSegment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Duration in seconds at `sample_rate`.
    pub fn duration(&self, sample_rate: u32) -> f64 {
        self.len() as f64 / f64::from(sample_rate)
    }
}
