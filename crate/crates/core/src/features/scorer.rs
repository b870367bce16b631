//! Chew scorers and the threshold decision.
//!
//! The reference [`HeuristicScorer`] stands in for a trained network. Its
//! score is the product of two terms computed on the occupied (non-padded)
//! part of the clip:
//!
//! ```text
//! low_frac      = power below 2 kHz / total power, summed over STFT frames
//! spectral_term = clamp((low_frac - 0.5) / 0.4, 0, 1)
//! sustain       = share of 10 ms blocks whose RMS >= 0.1 * loudest block
//! envelope_term = clamp(sustain / 0.5, 0, 1)
//! score         = spectral_term * envelope_term
//! ```
//!
//! Bone-conducted chew bursts carry nearly all their energy below 2 kHz and
//! hold their level for most of the burst; clicks and broadband artifacts
//! fail the spectral term and usually the envelope term too.

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

use super::mel::{MelSpectrogram, Stft, N_FFT};
use crate::config::SessionConfig;
use crate::segmentation::CandidateSegment;

const LOW_BAND_HZ: f64 = 2000.0;
const BLOCK_MS: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("no score for segment {0}")]
    MissingScore(u64),
    #[error("score table line {line}: invalid probability `{value}`")]
    InvalidProbability { line: usize, value: String },
    #[error("score table line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("reading score table {path}: {message}")]
    Io { path: String, message: String },
}

/// Anything that turns a candidate into a chew probability.
pub trait ChewScorer: Send {
    fn score(&self, segment: &CandidateSegment, mel: &MelSpectrogram) -> Result<f64, ScoreError>;

    /// Name and version, recorded in reports.
    fn description(&self) -> String;
}

#[derive(Debug)]
pub struct HeuristicScorer {
    stft: Stft,
    sample_rate_hz: u32,
}

impl HeuristicScorer {
    pub fn new(config: &SessionConfig) -> Self {
        Self { stft: Stft::new(config.sample_rate_hz), sample_rate_hz: config.sample_rate_hz }
    }

    pub fn score_clip(&self, clip: &[f32]) -> f64 {
        let occupied = clip.iter().rposition(|&s| s != 0.0).map_or(0, |i| i + 1);
        if occupied == 0 {
            return 0.0;
        }
        let cutoff_bin = (LOW_BAND_HZ * N_FFT as f64 / self.sample_rate_hz as f64).ceil() as usize;
        let (mut low, mut total) = (0.0, 0.0);
        for power in self.stft.power_frames(clip) {
            low += power[..cutoff_bin].iter().sum::<f64>();
            total += power.iter().sum::<f64>();
        }
        if total <= 0.0 {
            return 0.0;
        }
        let spectral = ((low / total - 0.5) / 0.4).clamp(0.0, 1.0);

        let block = self.sample_rate_hz as usize * BLOCK_MS / 1000;
        let rms: Vec<f64> = clip[..occupied]
            .chunks(block)
            .map(|b| (b.iter().map(|&s| (s as f64).powi(2)).sum::<f64>() / b.len() as f64).sqrt())
            .collect();
        let peak = rms.iter().cloned().fold(0.0, f64::max);
        let sustained = rms.iter().filter(|&&r| r >= 0.1 * peak).count();
        let envelope = ((sustained as f64 / rms.len() as f64) / 0.5).clamp(0.0, 1.0);

        spectral * envelope
    }
}

impl ChewScorer for HeuristicScorer {
    fn score(&self, segment: &CandidateSegment, _mel: &MelSpectrogram) -> Result<f64, ScoreError> {
        Ok(self.score_clip(&segment.clip))
    }

    fn description(&self) -> String {
        "heuristic-lowband-envelope v1".to_string()
    }
}

pub fn heuristic_score(clip: &[f32], config: &SessionConfig) -> f64 {
    HeuristicScorer::new(config).score_clip(clip)
}

/// Per-segment probabilities produced elsewhere, read from
/// `segment_id,probability` CSV.
#[derive(Debug, Clone, Default)]
pub struct ScoreTable {
    scores: HashMap<u64, f64>,
}

impl ScoreTable {
    pub fn parse_str(text: &str) -> Result<Self, ScoreError> {
        let mut scores = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || (line_no == 1 && line.starts_with("segment_id")) {
                continue;
            }
            let mut cols = line.split(',');
            let (Some(id), Some(p), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(ScoreError::Parse { line: line_no, message: "expected 2 columns".into() });
            };
            let id: u64 = id.trim().parse().map_err(|_| ScoreError::Parse {
                line: line_no,
                message: format!("bad segment id `{id}`"),
            })?;
            let p = p.trim();
            let prob: f64 = p
                .parse()
                .ok()
                .filter(|v: &f64| (0.0..=1.0).contains(v))
                .ok_or_else(|| ScoreError::InvalidProbability { line: line_no, value: p.to_string() })?;
            scores.insert(id, prob);
        }
        Ok(Self { scores })
    }

    pub fn load(path: &Path) -> Result<Self, ScoreError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScoreError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse_str(&text)
    }

    pub fn get(&self, segment_id: u64) -> Result<f64, ScoreError> {
        self.scores.get(&segment_id).copied().ok_or(ScoreError::MissingScore(segment_id))
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

impl ChewScorer for ScoreTable {
    fn score(&self, segment: &CandidateSegment, _mel: &MelSpectrogram) -> Result<f64, ScoreError> {
        self.get(segment.id)
    }

    fn description(&self) -> String {
        format!("score-table ({} rows)", self.scores.len())
    }
}

pub fn external_score(table: &ScoreTable, segment_id: u64) -> Result<f64, ScoreError> {
    table.get(segment_id)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreDecision {
    pub segment_id: u64,
    pub probability: f64,
    pub is_chew: bool,
}

/// Threshold is inclusive: a probability equal to it counts as a chew.
pub fn classify(segment_id: u64, probability: f64, config: &SessionConfig) -> ScoreDecision {
    ScoreDecision { segment_id, probability, is_chew: probability >= config.classifier_threshold }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_clip_scores_zero() {
        assert_eq!(heuristic_score(&vec![0.0; 6400], &SessionConfig::default()), 0.0);
    }

    #[test]
    fn low_tone_beats_high_tone() {
        let config = SessionConfig::default();
        let tone = |hz: f32| -> Vec<f32> {
            let mut v: Vec<f32> = (0..3200)
                .map(|i| (2.0 * std::f32::consts::PI * hz * i as f32 / 16000.0).sin())
                .collect();
            v.resize(6400, 0.0);
            v
        };
        assert!(heuristic_score(&tone(300.0), &config) > 0.95);
        assert_eq!(heuristic_score(&tone(5000.0), &config), 0.0);
    }

    #[test]
    fn deterministic() {
        let config = SessionConfig::default();
        let clip: Vec<f32> = (0..6400).map(|i| ((i as f32) * 0.05).sin() * 0.3).collect();
        assert_eq!(heuristic_score(&clip, &config), heuristic_score(&clip, &config));
    }

    #[test]
    fn table_lookup() {
        let t = ScoreTable::parse_str("segment_id,probability\n17,0.98\n3,0.1\n").unwrap();
        assert_eq!(external_score(&t, 17).unwrap(), 0.98);
        assert_eq!(external_score(&t, 99).unwrap_err(), ScoreError::MissingScore(99));
    }

    #[test]
    fn table_rejects_out_of_range() {
        let err = ScoreTable::parse_str("segment_id,probability\n4,1.3\n").unwrap_err();
        assert_eq!(err, ScoreError::InvalidProbability { line: 2, value: "1.3".into() });
        assert!(matches!(
            ScoreTable::parse_str("segment_id,probability\n4;0.2\n"),
            Err(ScoreError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn classify_threshold_inclusive() {
        let c = SessionConfig::default();
        assert!(classify(0, 0.7, &c).is_chew);
        assert!(classify(0, 0.5, &c).is_chew);
        assert!(!classify(0, 0.49, &c).is_chew);
    }
}
