//! Chew/swallow events and the ordered per-session timeline.

use std::time::SystemTime;

use thiserror::Error;

use crate::intervention::PromptEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Chew,
    Swallow,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Chew => "chew",
            EventKind::Swallow => "swallow",
        }
    }
}

/// A chew or inferred swallow. For chews `time_s` is the segment onset,
/// for swallows it is the midpoint of the inter-chew gap hosting it.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestionEvent {
    pub kind: EventKind,
    pub time_s: f64,
    pub confidence: f64,
    pub source_segment: Option<u64>,
}

impl IngestionEvent {
    pub fn chew(time_s: f64, confidence: f64, segment: u64) -> Self {
        Self { kind: EventKind::Chew, time_s, confidence, source_segment: Some(segment) }
    }

    /// Heuristic swallows are binary, so their confidence is always 1.
    pub fn swallow(time_s: f64) -> Self {
        Self { kind: EventKind::Swallow, time_s, confidence: 1.0, source_segment: None }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TimelineError {
    #[error("out-of-order event: {new_s:.3} s precedes last event at {last_s:.3} s")]
    OutOfOrderEvent { last_s: f64, new_s: f64 },
    #[error("out-of-order prompt: {new_s:.3} s precedes last prompt at {last_s:.3} s")]
    OutOfOrderPrompt { last_s: f64, new_s: f64 },
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("consecutive swallows at {first_s:.3} s and {second_s:.3} s without a chew between")]
    ConsecutiveSwallows { first_s: f64, second_s: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    events: Vec<IngestionEvent>,
    prompts: Vec<PromptEvent>,
    session_start: SystemTime,
}

impl Default for Timeline {
    fn default() -> Self {
        Self::new(SystemTime::UNIX_EPOCH)
    }
}

impl Timeline {
    pub fn new(session_start: SystemTime) -> Self {
        Self { events: Vec::new(), prompts: Vec::new(), session_start }
    }

    pub fn events(&self) -> &[IngestionEvent] {
        &self.events
    }

    pub fn prompts(&self) -> &[PromptEvent] {
        &self.prompts
    }

    pub fn session_start(&self) -> SystemTime {
        self.session_start
    }

    pub fn last_event_time(&self) -> Option<f64> {
        self.events.last().map(|e| e.time_s)
    }

    pub fn append_event(&mut self, event: IngestionEvent) -> Result<(), TimelineError> {
        if !(event.time_s >= 0.0) || !event.time_s.is_finite() {
            return Err(TimelineError::InvalidEvent(format!("time_s = {}", event.time_s)));
        }
        if !(0.0..=1.0).contains(&event.confidence) {
            return Err(TimelineError::InvalidEvent(format!(
                "confidence = {}",
                event.confidence
            )));
        }
        if let Some(last) = self.events.last() {
            if event.time_s < last.time_s {
                return Err(TimelineError::OutOfOrderEvent {
                    last_s: last.time_s,
                    new_s: event.time_s,
                });
            }
            if last.kind == EventKind::Swallow && event.kind == EventKind::Swallow {
                return Err(TimelineError::ConsecutiveSwallows {
                    first_s: last.time_s,
                    second_s: event.time_s,
                });
            }
        }
        self.events.push(event);
        Ok(())
    }

    pub fn append_prompt(&mut self, prompt: PromptEvent) -> Result<(), TimelineError> {
        if let Some(last) = self.prompts.last() {
            if prompt.time_s < last.time_s {
                return Err(TimelineError::OutOfOrderPrompt {
                    last_s: last.time_s,
                    new_s: prompt.time_s,
                });
            }
        }
        self.prompts.push(prompt);
        Ok(())
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn append_to_empty() {
        let mut t = Timeline::default();
        t.append_event(IngestionEvent::chew(1.0, 0.9, 0)).unwrap();
        assert_eq!(t.events().len(), 1);
        assert_eq!(t.events()[0].time_s, 1.0);
    }

    #[test]
    fn regression_is_rejected_with_both_times() {
        let mut t = Timeline::default();
        t.append_event(IngestionEvent::chew(1.0, 0.9, 0)).unwrap();
        let err = t.append_event(IngestionEvent::chew(0.5, 0.9, 1)).unwrap_err();
        assert_eq!(err, TimelineError::OutOfOrderEvent { last_s: 1.0, new_s: 0.5 });
        assert_eq!(t.events().len(), 1);
    }

    #[test]
    fn chew_then_swallow() {
        let mut t = Timeline::default();
        t.append_event(IngestionEvent::chew(1.0, 0.9, 0)).unwrap();
        t.append_event(IngestionEvent::swallow(2.2)).unwrap();
        let kinds: Vec<_> = t.events().iter().map(|e| e.kind).collect();
        assert_eq!(kinds, [EventKind::Chew, EventKind::Swallow]);
        assert_eq!(t.events()[1].confidence, 1.0);
    }

    #[test]
    fn swallow_pair_without_chew_is_rejected() {
        let mut t = Timeline::default();
        t.append_event(IngestionEvent::chew(1.0, 0.9, 0)).unwrap();
        t.append_event(IngestionEvent::swallow(2.0)).unwrap();
        assert!(matches!(
            t.append_event(IngestionEvent::swallow(3.0)),
            Err(TimelineError::ConsecutiveSwallows { .. })
        ));
    }

    proptest! {
        #[test]
        fn accepted_events_stay_monotone(times in prop::collection::vec(0.0f64..100.0, 0..60)) {
            let mut t = Timeline::default();
            for (i, &time) in times.iter().enumerate() {
                let _ = t.append_event(IngestionEvent::chew(time, 1.0, i as u64));
            }
            prop_assert!(t.events().windows(2).all(|w| w[0].time_s <= w[1].time_s));
        }
    }
}
