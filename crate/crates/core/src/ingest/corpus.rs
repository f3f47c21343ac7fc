//! Labeled corpora: recordings plus the phone segments cut from them.
//!
//! On disk a corpus is a directory holding `phones.txt` (optional, defaults
//! to the 48-phone set), `groups.txt` (optional), `phone_map.txt` (optional
//! label folding) and any number of `X.wav` / `X.phn` pairs, searched
//! recursively. TIMIT's upper-case `X.WAV` / `X.PHN` names are accepted.

use std::fs;
use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use super::segmentation::{format_segmentation, parse_segmentation_mapped};
use super::wav::{read_wav, write_wav};
use super::{generate_corpus, PhoneMap, PhoneSegment, PhoneSet, Recording, SynthSpec};
use crate::{Error, Result};

pub const PHONES_FILE: &str = "phones.txt";
pub const GROUPS_FILE: &str = "groups.txt";
pub const PHONE_MAP_FILE: &str = "phone_map.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Index into [`Corpus::recordings`].
    pub recording: usize,
    pub segment: PhoneSegment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub phone_set: PhoneSet,
    pub recordings: Vec<Recording>,
    pub samples: Vec<Sample>,
}

impl Corpus {
    pub fn new(phone_set: PhoneSet, recordings: Vec<Recording>, samples: Vec<Sample>) -> Result<Self> {
        for (i, r) in recordings.iter().enumerate() {
            if r.sample_rate == 0 {
                return Err(Error::Validation(format!("recording {i} has sample rate 0")));
            }
        }
        for s in &samples {
            let rec = recordings.get(s.recording).ok_or_else(|| {
                Error::Validation(format!("sample refers to missing recording {}", s.recording))
            })?;
            let seg = &s.segment;
            if seg.start >= seg.end || seg.end > rec.samples.len() {
                return Err(Error::Validation(format!(
                    "segment [{}, {}) does not fit recording {} of {} samples",
                    seg.start,
                    seg.end,
                    s.recording,
                    rec.samples.len()
                )));
            }
            phone_set.require(&seg.label)?;
        }
        Ok(Corpus {
            phone_set,
            recordings,
            samples,
        })
    }

    /// A corpus generated from `spec`, one recording per sample. The phone
    /// set is the spec's class labels with the default groups restricted to
    /// them.
    pub fn synthetic(spec: &SynthSpec, n_per_class: usize) -> Result<Self> {
        let phone_set = PhoneSet::with_default_groups(spec.labels())?;
        let (recordings, samples) = generate_corpus(spec, n_per_class)?
            .into_iter()
            .enumerate()
            .map(|(i, (rec, segment))| (rec, Sample { recording: i, segment }))
            .unzip();
        Corpus::new(phone_set, recordings, samples)
    }

    pub fn recording(&self, sample: &Sample) -> &Recording {
        &self.recordings[sample.recording]
    }

    /// Number of samples per phone, indexed like the phone set.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.phone_set.len()];
        for s in &self.samples {
            counts[self.phone_set.index_of(&s.segment.label).expect("validated")] += 1;
        }
        counts
    }

    pub fn samples_of<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a Sample> + 'a {
        self.samples.iter().filter(move |s| s.segment.label == label)
    }

    /// The single sample rate shared by every recording.
    pub fn sample_rate(&self) -> Result<u32> {
        let mut rates = self.recordings.iter().map(|r| r.sample_rate);
        let first = rates
            .next()
            .ok_or_else(|| Error::Validation("corpus has no recordings".into()))?;
        if rates.any(|r| r != first) {
            return Err(Error::Validation("recordings use different sample rates".into()));
        }
        Ok(first)
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(Error::Validation(format!(
                "corpus directory {} does not exist",
                dir.display()
            )));
        }
        let phones = dir.join(PHONES_FILE);
        let groups = dir.join(GROUPS_FILE);
        let phone_set = if phones.exists() {
            PhoneSet::read(&phones, groups.exists().then_some(groups.as_path()))?
        } else {
            PhoneSet::timit48()
        };
        let map_path = dir.join(PHONE_MAP_FILE);
        let map = if map_path.exists() {
            let text = fs::read_to_string(&map_path).map_err(|e| Error::io(&map_path, e))?;
            Some(PhoneMap::parse(&text)?)
        } else {
            None
        };

        let mut wavs: Vec<PathBuf> = WalkDir::new(dir)
            .sort_by_file_name()
            .into_iter()
            .filter_map(|e| e.ok())
            .map(|e| e.into_path())
            .filter(|p| {
                p.is_file()
                    && p.extension()
                        .is_some_and(|x| x.eq_ignore_ascii_case("wav"))
            })
            .collect();
        wavs.sort();

        let mut recordings = Vec::new();
        let mut samples = Vec::new();
        for wav in wavs {
            let Some(phn) = ["phn", "PHN"]
                .iter()
                .map(|ext| wav.with_extension(ext))
                .find(|p| p.exists())
            else {
                continue;
            };
            let rec = read_wav(&wav)?;
            let text = fs::read_to_string(&phn).map_err(|e| Error::io(&phn, e))?;
            let segments = parse_segmentation_mapped(&text, &phone_set, map.as_ref())
                .map_err(|e| Error::Validation(format!("{}: {e}", phn.display())))?;
            let idx = recordings.len();
            for segment in segments {
                if segment.end > rec.samples.len() {
                    return Err(Error::Validation(format!(
                        "{}: segment [{}, {}) runs past the {} samples of {}",
                        phn.display(),
                        segment.start,
                        segment.end,
                        rec.samples.len(),
                        wav.display()
                    )));
                }
                samples.push(Sample {
                    recording: idx,
                    segment,
                });
            }
            recordings.push(rec);
        }
        if samples.is_empty() {
            return Err(Error::Validation(format!(
                "no labeled segments found under {}",
                dir.display()
            )));
        }
        Corpus::new(phone_set, recordings, samples)
    }

    /// Writes `phones.txt`, `groups.txt` and one `uttNNNNN.wav`/`.phn` pair
    /// per recording.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, text: String| {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| Error::io(&p, e))
        };
        put(PHONES_FILE, self.phone_set.labels_text())?;
        put(GROUPS_FILE, self.phone_set.groups_text())?;
        let width = self.recordings.len().to_string().len().max(5);
        for (i, rec) in self.recordings.iter().enumerate() {
            let stem = format!("utt{i:0width$}");
            write_wav(dir.join(format!("{stem}.wav")), rec)?;
            let segs: Vec<PhoneSegment> = self
                .samples
                .iter()
                .filter(|s| s.recording == i)
                .map(|s| s.segment.clone())
                .collect();
            put(&format!("{stem}.phn"), format_segmentation(&segs))?;
        }
        Ok(())
    }
}
