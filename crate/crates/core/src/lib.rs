//! Chew detection, swallow inference and eating-pace prompting over
//! 16 kHz single-channel audio.

pub mod audio;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod eventlog;
pub mod features;
pub mod intervention;
pub mod pace;
pub mod pipeline;
pub mod report;
pub mod segmentation;
pub mod session;
pub mod timeline;

pub use config::{ConfigError, SessionConfig, SAMPLE_RATE_HZ};
pub use error::{PipelineError, StageError};
pub use pipeline::{replay_samples, run_replay, run_stream, Pipeline, ReplayOutcome, ReplayRequest};
pub use session::{new_session, SessionState};
