//! Deterministic synthetic meals with exact ground truth.
//!
//! Chews come in runs separated by long swallow gaps. Within a run onsets
//! are spaced by `chew_gap_mean_s ± chew_gap_jitter_s` (uniform), each run
//! holds `chews_per_swallow_mean ± chews_per_swallow_jitter` chews, and the
//! gap after a run is `swallow_gap_mean_s ± swallow_gap_jitter_s`. Every
//! burst is followed by at least [`MIN_SILENCE_S`] of quiet so that no two
//! bursts can be bridged by the segmenter, and burst lengths stay within
//! `[burst_min_ms, burst_max_ms]`. A swallow is labelled at the middle of
//! each run's closing gap; the meal always ends on a swallow.
//!
//! Three independent random streams drive the plan, the burst waveforms
//! and the noise/artifact layer, so adding noise to a meal leaves its chew
//! plan untouched.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{key_values, ConfigError, SAMPLE_RATE_HZ};
use crate::evaluation::{AnnotationTrack, Interval, Label};

/// Quiet time required after every burst.
pub const MIN_SILENCE_S: f64 = 0.26;
const LEAD_IN_S: f64 = 1.0;
const TAIL_S: f64 = 1.0;
const SWALLOW_LABEL_S: f64 = 0.3;
const ATTACK_S: f64 = 0.010;
const RELEASE_S: f64 = 0.020;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BurstTemplate {
    /// Low-frequency tonal burst with a held envelope.
    LowFreqChew,
    /// White-noise click with a fast exponential decay.
    BroadbandArtifact,
}

impl std::str::FromStr for BurstTemplate {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "low_freq_chew" => Ok(Self::LowFreqChew),
            "broadband_artifact" => Ok(Self::BroadbandArtifact),
            _ => Err(format!("unknown burst template `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthMealSpec {
    pub duration_s: f64,
    pub chew_gap_mean_s: f64,
    pub chew_gap_jitter_s: f64,
    pub swallow_gap_mean_s: f64,
    pub swallow_gap_jitter_s: f64,
    pub chews_per_swallow_mean: u32,
    pub chews_per_swallow_jitter: u32,
    pub burst_template: BurstTemplate,
    pub burst_min_ms: u32,
    pub burst_max_ms: u32,
    /// Peak amplitude range of planted bursts.
    pub burst_amplitude: (f64, f64),
    /// Broadband noise level in dBFS RMS; `None` for a clean signal.
    pub noise_floor_db: Option<f64>,
    /// Expected artifact bursts per chew, placed inside swallow gaps.
    pub artifact_rate: f64,
    pub seed: u64,
}

impl Default for SynthMealSpec {
    fn default() -> Self {
        Self {
            duration_s: 60.0,
            chew_gap_mean_s: 0.424,
            chew_gap_jitter_s: 0.03,
            swallow_gap_mean_s: 1.919,
            swallow_gap_jitter_s: 0.25,
            chews_per_swallow_mean: 20,
            chews_per_swallow_jitter: 3,
            burst_template: BurstTemplate::LowFreqChew,
            burst_min_ms: 120,
            burst_max_ms: 180,
            burst_amplitude: (0.2, 0.4),
            noise_floor_db: None,
            artifact_rate: 0.0,
            seed: 1,
        }
    }
}

impl SynthMealSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.duration_s > 0.0) {
            return fail("duration_s must be > 0");
        }
        if !(self.chew_gap_mean_s > 0.0 && self.swallow_gap_mean_s > 0.0 && self.chews_per_swallow_mean > 0) {
            return fail("means must be positive");
        }
        if !(self.burst_min_ms >= 120 && self.burst_min_ms <= self.burst_max_ms && self.burst_max_ms <= 350) {
            return fail("burst lengths must satisfy 120 <= burst_min_ms <= burst_max_ms <= 350");
        }
        let min_room = self.burst_min_ms as f64 / 1000.0 + MIN_SILENCE_S;
        if self.chew_gap_mean_s - self.chew_gap_jitter_s < min_room
            || self.swallow_gap_mean_s - self.swallow_gap_jitter_s < min_room
        {
            return fail("gaps too short to separate bursts");
        }
        if self.chew_gap_jitter_s < 0.0 || self.swallow_gap_jitter_s < 0.0 {
            return fail("jitter must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.artifact_rate) {
            return fail("artifact_rate must be within [0, 1]");
        }
        let (lo, hi) = self.burst_amplitude;
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return fail("burst amplitude range must lie in (0, 1]");
        }
        Ok(())
    }

    /// Parse `key = value` lines over the defaults.
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut spec = Self::default();
        for (line, key, value) in key_values(text)? {
            let bad = |message: String| ConfigError::Parse { line, message };
            let f = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("cannot parse `{v}`")));
            let u = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("cannot parse `{v}`")));
            match key.as_str() {
                "duration_s" => spec.duration_s = f(&value)?,
                "chew_gap_mean_s" => spec.chew_gap_mean_s = f(&value)?,
                "chew_gap_jitter_s" => spec.chew_gap_jitter_s = f(&value)?,
                "swallow_gap_mean_s" => spec.swallow_gap_mean_s = f(&value)?,
                "swallow_gap_jitter_s" => spec.swallow_gap_jitter_s = f(&value)?,
                "chews_per_swallow_mean" => spec.chews_per_swallow_mean = u(&value)? as u32,
                "chews_per_swallow_jitter" => spec.chews_per_swallow_jitter = u(&value)? as u32,
                "burst_template" => spec.burst_template = value.parse().map_err(bad)?,
                "burst_min_ms" => spec.burst_min_ms = u(&value)? as u32,
                "burst_max_ms" => spec.burst_max_ms = u(&value)? as u32,
                "burst_amplitude_min" => spec.burst_amplitude.0 = f(&value)?,
                "burst_amplitude_max" => spec.burst_amplitude.1 = f(&value)?,
                "noise_floor_db" => {
                    spec.noise_floor_db = if value == "none" { None } else { Some(f(&value)?) }
                }
                "artifact_rate" => spec.artifact_rate = f(&value)?,
                "seed" => spec.seed = u(&value)?,
                _ => return Err(ConfigError::UnknownKey { line, key }),
            }
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedBurst {
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthMeal {
    pub samples: Vec<f32>,
    pub truth: AnnotationTrack,
    pub chews: Vec<PlantedBurst>,
    pub artifacts: Vec<PlantedBurst>,
    /// Centers of the labelled swallows.
    pub swallows: Vec<f64>,
    /// Chews in each run; every run is closed by a swallow.
    pub runs: Vec<u32>,
}

impl SynthMeal {
    pub fn total_chews(&self) -> u64 {
        self.runs.iter().map(|&r| r as u64).sum()
    }

    pub fn write(&self, dir: &Path) -> Result<(), super::WavError> {
        std::fs::create_dir_all(dir).map_err(|e| super::WavError::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
        super::write_wav(&dir.join("meal.wav"), &self.samples)?;
        let truth = dir.join("truth.tsv");
        std::fs::write(&truth, self.truth.to_tsv())
            .map_err(|e| super::WavError::Io { path: truth.display().to_string(), message: e.to_string() })
    }
}

fn jittered(rng: &mut ChaCha8Rng, mean: f64, jitter: f64) -> f64 {
    if jitter > 0.0 {
        mean + rng.random_range(-jitter..=jitter)
    } else {
        mean
    }
}

fn envelope(t: f64, dur: f64) -> f64 {
    if t < ATTACK_S {
        0.5 - 0.5 * (PI * t / ATTACK_S).cos()
    } else if t > dur - RELEASE_S {
        0.5 - 0.5 * (PI * (dur - t).max(0.0) / RELEASE_S).cos()
    } else {
        1.0
    }
}

/// Render one burst of `dur_s` seconds at peak amplitude `amp`.
pub fn render_burst(template: BurstTemplate, dur_s: f64, amp: f64, rng: &mut ChaCha8Rng) -> Vec<f32> {
    let sr = SAMPLE_RATE_HZ as f64;
    let n = (dur_s * sr).round() as usize;
    match template {
        BurstTemplate::LowFreqChew => {
            let partials: Vec<(f64, f64, f64)> = (0..3)
                .map(|_| {
                    (rng.random_range(80.0..500.0), rng.random_range(0.5..1.0), rng.random_range(0.0..2.0 * PI))
                })
                .collect();
            let norm: f64 = partials.iter().map(|p| p.1).sum::<f64>() + 0.2;
            // one-pole low-pass, cutoff ~300 Hz
            let alpha = 1.0 - (-2.0 * PI * 300.0 / sr).exp();
            let mut lp = 0.0;
            (0..n)
                .map(|i| {
                    let t = i as f64 / sr;
                    let tonal: f64 = partials.iter().map(|&(f, a, ph)| a * (2.0 * PI * f * t + ph).sin()).sum();
                    lp += alpha * (rng.random_range(-1.0..1.0) - lp);
                    (amp * envelope(t, dur_s) * (tonal + 0.2 * lp * 4.0) / norm) as f32
                })
                .collect()
        }
        BurstTemplate::BroadbandArtifact => (0..n)
            .map(|i| {
                let t = i as f64 / sr;
                let env = (t / 0.002).min(1.0) * (-t / 0.020).exp();
                (amp * env * rng.random_range(-1.0..1.0)) as f32
            })
            .collect(),
    }
}

fn add_at(samples: &mut [f32], start_s: f64, burst: &[f32]) {
    let start = (start_s * SAMPLE_RATE_HZ as f64).round() as usize;
    for (dst, &s) in samples.iter_mut().skip(start).zip(burst) {
        *dst += s;
    }
}

pub fn synth_meal(spec: &SynthMealSpec) -> Result<SynthMeal, ConfigError> {
    spec.validate()?;
    let mut plan_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut wave_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    wave_rng.set_stream(1);
    let mut extra_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    extra_rng.set_stream(2);

    // Plan onsets.
    let end_limit = spec.duration_s - TAIL_S;
    let mut runs: Vec<Vec<f64>> = Vec::new();
    let mut gap_ends: Vec<f64> = Vec::new();
    let mut t = LEAD_IN_S;
    loop {
        let lo = spec.chews_per_swallow_mean.saturating_sub(spec.chews_per_swallow_jitter).max(1);
        let hi = spec.chews_per_swallow_mean + spec.chews_per_swallow_jitter;
        let n = plan_rng.random_range(lo..=hi);
        let mut onsets = vec![t];
        for _ in 1..n {
            let last = *onsets.last().unwrap();
            onsets.push(last + jittered(&mut plan_rng, spec.chew_gap_mean_s, spec.chew_gap_jitter_s));
        }
        let last = *onsets.last().unwrap();
        let swallow_gap = jittered(&mut plan_rng, spec.swallow_gap_mean_s, spec.swallow_gap_jitter_s);
        if last + swallow_gap > end_limit {
            break;
        }
        runs.push(onsets);
        gap_ends.push(last + swallow_gap);
        t = last + swallow_gap;
    }

    let total = (spec.duration_s * SAMPLE_RATE_HZ as f64).round() as usize;
    let mut samples = vec![0.0f32; total];
    let mut chews = Vec::new();
    let mut artifacts = Vec::new();
    let mut swallows = Vec::new();
    let mut intervals = Vec::new();
    let burst_min = spec.burst_min_ms as f64 / 1000.0;
    let burst_max = spec.burst_max_ms as f64 / 1000.0;
    let is_chew = spec.burst_template == BurstTemplate::LowFreqChew;

    for (run, &gap_end) in runs.iter().zip(&gap_ends) {
        for (k, &onset) in run.iter().enumerate() {
            let next = run.get(k + 1).copied().unwrap_or(gap_end);
            let max_dur = burst_max.min(next - onset - MIN_SILENCE_S);
            let dur = if max_dur > burst_min { plan_rng.random_range(burst_min..=max_dur) } else { burst_min };
            let amp = plan_rng.random_range(spec.burst_amplitude.0..=spec.burst_amplitude.1);
            let burst = render_burst(spec.burst_template, dur, amp, &mut wave_rng);
            let dur = burst.len() as f64 / SAMPLE_RATE_HZ as f64;
            add_at(&mut samples, onset, &burst);
            chews.push(PlantedBurst { start_s: onset, end_s: onset + dur });
            if is_chew {
                intervals.push(Interval { start_s: onset, end_s: onset + dur, label: Label::Chew });
            }
        }
        let last_onset = *run.last().unwrap();
        let center = 0.5 * (last_onset + gap_end);
        swallows.push(center);
        if is_chew {
            intervals.push(Interval {
                start_s: center - SWALLOW_LABEL_S / 2.0,
                end_s: center + SWALLOW_LABEL_S / 2.0,
                label: Label::Swallow,
            });
        }

        // Artifacts go in the quiet part of the swallow gap.
        if spec.artifact_rate > 0.0 {
            let mut k = run.iter().filter(|_| extra_rng.random_bool(spec.artifact_rate)).count().min(2);
            let region_start = chews.last().unwrap().end_s + MIN_SILENCE_S;
            let region_end = gap_end - MIN_SILENCE_S;
            while k > 0 && (region_end - region_start) / (k as f64) < burst_max + MIN_SILENCE_S {
                k -= 1;
            }
            let slot = (region_end - region_start) / k.max(1) as f64;
            for j in 0..k {
                let dur = extra_rng.random_range(burst_min..=burst_max);
                let start = region_start + slot * (j as f64 + 0.5) - dur / 2.0;
                let amp = extra_rng.random_range(0.3..0.6);
                let burst = render_burst(BurstTemplate::BroadbandArtifact, dur, amp, &mut extra_rng);
                add_at(&mut samples, start, &burst);
                artifacts.push(PlantedBurst { start_s: start, end_s: start + dur });
            }
        }
    }

    if let Some(db) = spec.noise_floor_db {
        let a = 10f64.powf(db / 20.0) * 3f64.sqrt();
        for s in samples.iter_mut() {
            *s += extra_rng.random_range(-a..a) as f32;
        }
    }
    for s in samples.iter_mut() {
        *s = s.clamp(-1.0, 1.0);
    }

    let mut truth = AnnotationTrack::new(intervals).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    truth.tags = BTreeMap::from([
        ("duration_s".to_string(), format!("{}", spec.duration_s)),
        ("generator".to_string(), "synth".to_string()),
        ("seed".to_string(), spec.seed.to_string()),
    ]);
    Ok(SynthMeal {
        samples,
        truth,
        chews,
        artifacts,
        swallows,
        runs: runs.iter().map(|r| r.len() as u32).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let spec = SynthMealSpec::default();
        assert_eq!(synth_meal(&spec).unwrap(), synth_meal(&spec).unwrap());
        let other = synth_meal(&SynthMealSpec { seed: 2, ..spec.clone() }).unwrap();
        assert_ne!(other.samples, synth_meal(&spec).unwrap().samples);
    }

    #[test]
    fn bursts_respect_bounds_and_spacing() {
        let meal = synth_meal(&SynthMealSpec { duration_s: 200.0, seed: 9, ..Default::default() }).unwrap();
        let mut all: Vec<&PlantedBurst> = meal.chews.iter().chain(&meal.artifacts).collect();
        all.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
        for b in &meal.chews {
            let ms = (b.end_s - b.start_s) * 1000.0;
            assert!((119.9..=180.1).contains(&ms), "{ms}");
        }
        for w in all.windows(2) {
            assert!(w[1].start_s - w[0].end_s >= MIN_SILENCE_S - 1e-3);
        }
    }

    #[test]
    fn noise_does_not_move_the_plan() {
        let clean = synth_meal(&SynthMealSpec { seed: 4, ..Default::default() }).unwrap();
        let noisy = synth_meal(&SynthMealSpec {
            seed: 4,
            noise_floor_db: Some(-50.0),
            artifact_rate: 0.1,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(clean.truth, noisy.truth);
        assert_eq!(clean.chews, noisy.chews);
        assert!(!noisy.artifacts.is_empty());
    }

    #[test]
    fn truth_matches_bookkeeping() {
        let meal = synth_meal(&SynthMealSpec { duration_s: 120.0, ..Default::default() }).unwrap();
        assert_eq!(meal.truth.count(Label::Chew) as u64, meal.total_chews());
        assert_eq!(meal.truth.count(Label::Swallow), meal.runs.len());
        assert_eq!(meal.samples.len(), 120 * 16000);
    }

    #[test]
    fn spec_file_parsing() {
        let spec = SynthMealSpec::parse_str("duration_s = 90\nseed = 3\nnoise_floor_db = -50\n").unwrap();
        assert_eq!(spec.duration_s, 90.0);
        assert_eq!(spec.noise_floor_db, Some(-50.0));
        assert!(SynthMealSpec::parse_str("wat = 1").is_err());
        assert!(SynthMealSpec { burst_max_ms: 400, ..Default::default() }.validate().is_err());
    }
}
