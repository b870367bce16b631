use thiserror::Error;

use crate::audio::WavError;
use crate::config::ConfigError;
use crate::evaluation::EvalError;
use crate::features::{FeatureError, ScoreError};
use crate::intervention::LibraryError;
use crate::pace::PaceError;
use crate::segmentation::SegmentError;
use crate::timeline::TimelineError;

/// Failure inside one pipeline stage.
#[derive(Debug, Error, PartialEq)]
pub enum StageError {
    #[error("segmentation: {0}")]
    Segment(#[from] SegmentError),
    #[error("features: {0}")]
    Feature(#[from] FeatureError),
    #[error("scoring: {0}")]
    Score(#[from] ScoreError),
    #[error("pace: {0}")]
    Pace(#[from] PaceError),
    #[error("timeline: {0}")]
    Timeline(#[from] TimelineError),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("window {window}: {source}")]
    Stage {
        window: u64,
        #[source]
        source: StageError,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Library(#[from] LibraryError),
    #[error(transparent)]
    Wav(#[from] WavError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl PipelineError {
    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        PipelineError::Io { path: path.display().to_string(), message: e.to_string() }
    }
}
