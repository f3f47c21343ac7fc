//! Synthetic phone corpora.
//!
//! Each class is a recipe of drifting sinusoidal formants, a band-limited
//! noise burst and an optional plosive transient. Horizontal formant bands,
//! diagonal transitions and vertical onsets give the spectrograms the same
//! kinds of edges that separate vowels, approximants and plosives in speech.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PhoneSegment, Recording};
use crate::{seed, Error, Result};

const RAMP_MS: f64 = 5.0;
/// Recordings peaking above this are scaled down to it.
const PEAK_LIMIT: f64 = 0.95;
const NOISE_PARTIALS: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub sample_rate: u32,
    pub seed: u64,
    /// Low-level background audio on either side of every phone.
    #[serde(default = "default_context_ms")]
    pub context_ms: f64,
    /// Standard deviation of the uniform background noise.
    #[serde(default = "default_background")]
    pub background_noise: f64,
    #[serde(rename = "class")]
    pub classes: Vec<ClassRecipe>,
}

fn default_context_ms() -> f64 {
    150.0
}

fn default_background() -> f64 {
    0.003
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassRecipe {
    pub label: String,
    /// Free-form phonetic category, used to group confusions.
    #[serde(default)]
    pub category: String,
    /// Uniform duration range `[min, max]` in milliseconds.
    pub duration_ms: [f64; 2],
    #[serde(default)]
    pub formants: Vec<Formant>,
    #[serde(default)]
    pub noise: Option<NoiseBurst>,
    #[serde(default)]
    pub transient: Option<Transient>,
    #[serde(default)]
    pub jitter: Jitter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Formant {
    pub freq_hz: f64,
    #[serde(default)]
    pub slope_hz_per_s: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseBurst {
    pub low_hz: f64,
    pub high_hz: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub start_ms: f64,
    /// Burst length; runs to the end of the phone when absent.
    #[serde(default)]
    pub duration_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transient {
    /// Onset as a fraction of the phone duration.
    pub position: f64,
    pub amplitude: f64,
    pub duration_ms: f64,
}

/// Per-sample relative perturbations, each drawn uniformly from `±value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Jitter {
    #[serde(default)]
    pub frequency_rel: f64,
    #[serde(default)]
    pub slope_rel: f64,
    #[serde(default)]
    pub amplitude_rel: f64,
}

impl Default for Jitter {
    fn default() -> Self {
        Jitter {
            frequency_rel: 0.06,
            slope_rel: 0.3,
            amplitude_rel: 0.25,
        }
    }
}

fn formant(freq_hz: f64, amplitude: f64) -> Formant {
    Formant {
        freq_hz,
        slope_hz_per_s: 0.0,
        amplitude,
    }
}

fn vowel(label: &str, duration_ms: [f64; 2], formants: Vec<Formant>) -> ClassRecipe {
    ClassRecipe {
        label: label.into(),
        category: "vowel".into(),
        duration_ms,
        formants,
        noise: None,
        transient: None,
        jitter: Jitter::default(),
    }
}

fn fricative(label: &str, low_hz: f64, high_hz: f64) -> ClassRecipe {
    ClassRecipe {
        label: label.into(),
        category: "fricative".into(),
        duration_ms: [80.0, 170.0],
        formants: vec![],
        noise: Some(NoiseBurst {
            low_hz,
            high_hz,
            amplitude: 0.25,
            start_ms: 0.0,
            duration_ms: None,
        }),
        transient: None,
        jitter: Jitter::default(),
    }
}

impl SynthSpec {
    /// Two vowels (`aa`, `iy`) and two fricatives (`s`, `sh`).
    pub fn four_class() -> Self {
        SynthSpec {
            sample_rate: 16000,
            seed: 1,
            context_ms: default_context_ms(),
            background_noise: default_background(),
            classes: vec![
                vowel(
                    "aa",
                    [70.0, 160.0],
                    vec![formant(730.0, 0.30), formant(1090.0, 0.22), formant(2440.0, 0.10)],
                ),
                vowel(
                    "iy",
                    [60.0, 140.0],
                    vec![formant(270.0, 0.30), formant(2290.0, 0.18), formant(3010.0, 0.12)],
                ),
                fricative("s", 4500.0, 7500.0),
                fricative("sh", 2200.0, 4200.0),
            ],
        }
    }

    /// [`SynthSpec::four_class`] plus the plosives `t` and `d`, each a click
    /// followed by a short release burst over a falling second-formant
    /// transition. They differ slightly in burst band, and `d` adds a weak
    /// voice bar.
    pub fn six_class() -> Self {
        let plosive = |label: &str, duration_ms: [f64; 2], band: [f64; 2], burst_ms: f64, voicing: Vec<Formant>| {
            ClassRecipe {
                label: label.into(),
                category: "plosive".into(),
                duration_ms,
                formants: voicing,
                noise: Some(NoiseBurst {
                    low_hz: band[0],
                    high_hz: band[1],
                    amplitude: 0.2,
                    start_ms: 0.0,
                    duration_ms: Some(burst_ms),
                }),
                transient: Some(Transient {
                    position: 0.0,
                    amplitude: 0.4,
                    duration_ms: 5.0,
                }),
                jitter: Jitter::default(),
            }
        };
        let mut spec = Self::four_class();
        let transition = Formant {
            freq_hz: 1800.0,
            slope_hz_per_s: -4000.0,
            amplitude: 0.08,
        };
        spec.classes.push(plosive("t", [30.0, 80.0], [2000.0, 5000.0], 10.0, vec![transition.clone()]));
        spec.classes.push(plosive("d", [25.0, 70.0], [1500.0, 4000.0], 10.0, vec![formant(150.0, 0.008), transition]));
        spec
    }

    /// Two nasals with near-identical spectra whose durations do not overlap:
    /// `m` is short, `n` is long.
    pub fn duration_pair() -> Self {
        let nasal = |label: &str, duration_ms: [f64; 2], f2: f64| ClassRecipe {
            label: label.into(),
            category: "nasal".into(),
            duration_ms,
            formants: vec![formant(250.0, 0.30), formant(f2, 0.08), formant(2500.0, 0.04)],
            noise: None,
            transient: None,
            jitter: Jitter::default(),
        };
        SynthSpec {
            sample_rate: 16000,
            seed: 1,
            context_ms: default_context_ms(),
            background_noise: default_background(),
            classes: vec![
                nasal("m", [35.0, 72.0], 1100.0),
                nasal("n", [78.0, 150.0], 1200.0),
            ],
        }
    }

    /// Two single-formant classes `lo` and `hi`.
    pub fn two_tone(low_hz: f64, high_hz: f64) -> Self {
        SynthSpec {
            sample_rate: 16000,
            seed: 1,
            context_ms: default_context_ms(),
            background_noise: default_background(),
            classes: vec![
                vowel("lo", [60.0, 140.0], vec![formant(low_hz, 0.3)]),
                vowel("hi", [60.0, 140.0], vec![formant(high_hz, 0.3)]),
            ],
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn labels(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.label.clone()).collect()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SynthSpec =
            toml::from_str(text).map_err(|e| Error::Format(format!("synth spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("synth spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(msg));
        if self.sample_rate == 0 {
            return bad("sample_rate must be positive".into());
        }
        if self.classes.is_empty() {
            return bad("synth spec has no classes".into());
        }
        if !(self.context_ms >= 0.0) || !(self.background_noise >= 0.0) {
            return bad("context_ms and background_noise must be nonnegative".into());
        }
        let nyquist = f64::from(self.sample_rate) / 2.0;
        for (i, c) in self.classes.iter().enumerate() {
            if self.classes[..i].iter().any(|o| o.label == c.label) {
                return bad(format!("duplicate class label `{}`", c.label));
            }
            let [lo, hi] = c.duration_ms;
            if !(lo > 0.0 && hi >= lo) {
                return bad(format!("class `{}`: duration range must be positive", c.label));
            }
            for f in &c.formants {
                let end = f.freq_hz + f.slope_hz_per_s * hi / 1000.0;
                if !(f.freq_hz > 0.0 && f.freq_hz < nyquist && end > 0.0 && end < nyquist) {
                    return bad(format!(
                        "class `{}`: formant {} Hz (drifting to {end} Hz) is outside (0, {nyquist}) Hz",
                        c.label, f.freq_hz
                    ));
                }
            }
            if let Some(n) = &c.noise {
                if !(n.low_hz >= 0.0 && n.low_hz < n.high_hz && n.high_hz < nyquist) {
                    return bad(format!(
                        "class `{}`: noise band [{}, {}] Hz must lie below {nyquist} Hz",
                        c.label, n.low_hz, n.high_hz
                    ));
                }
            }
            if let Some(t) = &c.transient {
                if !(0.0..=1.0).contains(&t.position) || !(t.duration_ms > 0.0) {
                    return bad(format!("class `{}`: invalid transient", c.label));
                }
            }
        }
        Ok(())
    }
}

fn jittered(rng: &mut impl Rng, value: f64, rel: f64) -> f64 {
    if rel > 0.0 {
        value * (1.0 + rng.random_range(-rel..=rel))
    } else {
        value
    }
}

/// Raised-cosine on/off ramp value for sample `k` of an `n`-sample burst.
fn ramp(k: usize, n: usize, ramp_len: usize) -> f64 {
    let edge = k.min(n - 1 - k);
    if ramp_len == 0 || edge >= ramp_len {
        1.0
    } else {
        0.5 - 0.5 * (PI * edge as f64 / ramp_len as f64).cos()
    }
}

fn synthesize(spec: &SynthSpec, class: &ClassRecipe, rng: &mut impl Rng) -> (Recording, PhoneSegment) {
    let rate = f64::from(spec.sample_rate);
    let nyquist = rate / 2.0;
    let ms = |v: f64| (v * rate / 1000.0).round() as usize;
    let [lo, hi] = class.duration_ms;
    let duration = if hi > lo { rng.random_range(lo..=hi) } else { lo };
    let n = ms(duration).max(1);
    let ctx = ms(spec.context_ms);
    let total = ctx + n + ctx;
    let bg = spec.background_noise * 3f64.sqrt();
    let mut samples: Vec<f64> = (0..total)
        .map(|_| if bg > 0.0 { rng.random_range(-bg..=bg) } else { 0.0 })
        .collect();
    let phone = &mut samples[ctx..ctx + n];
    let ramp_len = ms(RAMP_MS).min(n / 2);
    let jit = &class.jitter;

    for f in &class.formants {
        let f0 = jittered(rng, f.freq_hz, jit.frequency_rel);
        let slope = jittered(rng, f.slope_hz_per_s, jit.slope_rel);
        let amp = jittered(rng, f.amplitude, jit.amplitude_rel);
        let phase0 = rng.random_range(0.0..2.0 * PI);
        for (k, s) in phone.iter_mut().enumerate() {
            let t = k as f64 / rate;
            let inst = f0 + slope * t;
            if inst <= 0.0 || inst >= nyquist {
                continue;
            }
            let phase = phase0 + 2.0 * PI * (f0 * t + 0.5 * slope * t * t);
            *s += amp * ramp(k, n, ramp_len) * phase.sin();
        }
    }

    if let Some(nb) = &class.noise {
        let shift = 1.0 + rng.random_range(-jit.frequency_rel..=jit.frequency_rel);
        let low = (nb.low_hz * shift).max(0.0);
        let high = (nb.high_hz * shift).min(nyquist * 0.999);
        let amp = jittered(rng, nb.amplitude, jit.amplitude_rel) / (NOISE_PARTIALS as f64 / 2.0).sqrt();
        let start = ms(nb.start_ms).min(n - 1);
        let end = nb.duration_ms.map_or(n, |d| (start + ms(d)).min(n)).max(start + 1);
        let len = end - start;
        let burst_ramp = ms(RAMP_MS).min(len / 2);
        for _ in 0..NOISE_PARTIALS {
            let freq = rng.random_range(low..=high);
            let phase0 = rng.random_range(0.0..2.0 * PI);
            for k in 0..len {
                let t = k as f64 / rate;
                phone[start + k] +=
                    amp * ramp(k, len, burst_ramp) * (phase0 + 2.0 * PI * freq * t).sin();
            }
        }
    }

    if let Some(tr) = &class.transient {
        let amp = jittered(rng, tr.amplitude, jit.amplitude_rel);
        let at = ((tr.position * n as f64) as usize).min(n - 1);
        let len = ms(tr.duration_ms).max(1).min(n - at);
        let decay = len as f64 / 4.0;
        for k in 0..len {
            phone[at + k] += amp * (-(k as f64) / decay).exp() * rng.random_range(-1.0..=1.0);
        }
    }

    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > PEAK_LIMIT {
        let g = PEAK_LIMIT / peak;
        samples.iter_mut().for_each(|s| *s *= g);
    }

    (
        Recording {
            samples,
            sample_rate: spec.sample_rate,
        },
        PhoneSegment {
            start: ctx,
            end: ctx + n,
            label: class.label.clone(),
        },
    )
}

/// Generates `n_per_class` samples of every class, interleaved by class
/// (`c0, c1, …, c0, c1, …`) so any prefix is close to balanced.
///
/// Each sample is drawn from its own stream keyed by (seed, class, index),
/// which makes the corpus a pure function of `(spec, n_per_class)`.
pub fn generate_corpus(spec: &SynthSpec, n_per_class: usize) -> Result<Vec<(Recording, PhoneSegment)>> {
    if n_per_class == 0 {
        return Err(Error::InvalidArgument("n_per_class must be at least 1".into()));
    }
    spec.validate()?;
    let k = spec.classes.len();
    Ok((0..n_per_class * k)
        .into_par_iter()
        .map(|job| {
            let (i, c) = (job / k, job % k);
            let mut rng = seed::rng(seed::derive(seed::derive(spec.seed, c as u64), i as u64));
            synthesize(spec, &spec.classes[c], &mut rng)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_per_class_is_an_error() {
        assert!(generate_corpus(&SynthSpec::four_class(), 0).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = SynthSpec::six_class();
        let a = generate_corpus(&spec, 3).unwrap();
        let b = generate_corpus(&spec, 3).unwrap();
        assert_eq!(a, b);
        let c = generate_corpus(&spec.clone().with_seed(2), 3).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn segments_lie_inside_recordings_and_stay_in_range() {
        for spec in [SynthSpec::six_class(), SynthSpec::duration_pair()] {
            for (rec, seg) in generate_corpus(&spec, 4).unwrap() {
                assert!(seg.start < seg.end && seg.end <= rec.samples.len());
                assert!(rec.samples.iter().all(|s| s.abs() < 1.0));
                let dur_ms = (seg.end - seg.start) as f64 * 1000.0 / 16000.0;
                let class = spec.classes.iter().find(|c| c.label == seg.label).unwrap();
                assert!(dur_ms >= class.duration_ms[0] - 0.1 && dur_ms <= class.duration_ms[1] + 0.1);
            }
        }
    }

    #[test]
    fn formant_above_nyquist_rejected() {
        let spec = SynthSpec::two_tone(500.0, 9000.0);
        assert!(matches!(spec.validate(), Err(Error::Validation(_))));
    }

    #[test]
    fn toml_round_trip() {
        let spec = SynthSpec::six_class();
        assert_eq!(SynthSpec::from_toml(&spec.to_toml()).unwrap(), spec);
    }
}
