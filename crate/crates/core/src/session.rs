use std::time::SystemTime;

use crate::config::{ConfigError, SessionConfig};
use crate::intervention::PolicyState;
use crate::pace::PaceState;
use crate::segmentation::SegmenterState;
use crate::timeline::Timeline;

/// All mutable per-session state. Owned by one processing sequence at a
/// time; independent sessions share nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    pub config: SessionConfig,
    pub segmenter: SegmenterState,
    pub pace: PaceState,
    pub policy: PolicyState,
    pub timeline: Timeline,
}

impl SessionState {
    /// Stamp the wall-clock start; everything else stays relative.
    pub fn started_at(mut self, start: SystemTime) -> Self {
        self.timeline = Timeline::new(start);
        self
    }
}

pub fn new_session(config: SessionConfig) -> Result<SessionState, ConfigError> {
    config.validate()?;
    Ok(SessionState {
        segmenter: SegmenterState::new(),
        pace: PaceState::new(),
        policy: PolicyState::new(config.rng_seed),
        timeline: Timeline::default(),
        config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::SegmenterMode;

    #[test]
    fn default_session_is_empty() {
        let s = new_session(SessionConfig::default()).unwrap();
        assert!(s.timeline.events().is_empty());
        assert!(s.timeline.prompts().is_empty());
        assert_eq!(s.policy.last_prompt_time_s, None);
        assert_eq!(s.segmenter.mode, SegmenterMode::Idle);
        assert_eq!(s.pace.total_chews, 0);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let config = SessionConfig { min_segment_ms: 500, ..Default::default() };
        assert!(matches!(new_session(config), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn construction_is_pure() {
        let config = SessionConfig { rng_seed: 7, ..Default::default() };
        assert_eq!(new_session(config.clone()).unwrap(), new_session(config).unwrap());
    }
}
