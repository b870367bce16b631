//! Clip features and chew scoring.

mod mel;
mod scorer;

pub use mel::{
    hz_to_mel, log_mel, mel_edges_hz, mel_to_hz, FeatureError, MelExtractor, MelSpectrogram, Stft,
    HOP_MS, LOG_FLOOR, N_FFT, N_MELS, WINDOW_MS,
};
pub use scorer::{
    classify, external_score, heuristic_score, ChewScorer, HeuristicScorer, ScoreDecision,
    ScoreError, ScoreTable,
};
