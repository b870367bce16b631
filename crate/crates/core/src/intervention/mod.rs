//! Just-in-time prompting: pre-meal goal, cooldown-gated in-meal prompts
//! and the post-meal summary.

mod library;
mod policy;

pub use library::{LengthClass, LibraryError, Prompt, PromptFamily, PromptLibrary, REMAINING_CHEWS};
pub use policy::{matches_cycle_grammar, CyclePhase, PolicyState, PromptEvent, PromptStage};

use crate::pace::PaceEstimate;
use crate::timeline::{EventKind, Timeline};

#[derive(Debug, Clone, PartialEq)]
pub struct SessionSummary {
    pub duration_s: f64,
    pub total_chews: u64,
    pub total_swallows: u64,
    pub mean_cps: Option<f64>,
    pub chews_per_min_mean: f64,
    /// In-meal prompts only; the pre-meal goal is not counted.
    pub prompts_delivered: u64,
    pub per_interval_cps: Vec<u32>,
}

/// Summarize a finalized meal from its timeline. Intervals are the chew
/// runs closed by each swallow.
pub fn post_meal_summary(timeline: &Timeline, pace_final: &PaceEstimate, duration_s: f64) -> SessionSummary {
    let mut per_interval_cps = Vec::new();
    let mut run = 0u32;
    let (mut chews, mut swallows) = (0u64, 0u64);
    for event in timeline.events() {
        match event.kind {
            EventKind::Chew => {
                run += 1;
                chews += 1;
            }
            EventKind::Swallow => {
                per_interval_cps.push(run);
                run = 0;
                swallows += 1;
            }
        }
    }
    debug_assert_eq!(chews, pace_final.total_chews);
    debug_assert_eq!(swallows, pace_final.total_swallows);
    let closed: u64 = per_interval_cps.iter().map(|&c| c as u64).sum();
    SessionSummary {
        duration_s,
        total_chews: chews,
        total_swallows: swallows,
        mean_cps: (swallows > 0).then(|| closed as f64 / swallows as f64),
        chews_per_min_mean: if duration_s > 0.0 { chews as f64 * 60.0 / duration_s } else { 0.0 },
        prompts_delivered: timeline.prompts().iter().filter(|p| p.stage == PromptStage::InMeal).count()
            as u64,
        per_interval_cps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeline::IngestionEvent;

    fn estimate(timeline: &Timeline) -> PaceEstimate {
        PaceEstimate {
            cps_last: None,
            cps_running: None,
            cps_smoothed: None,
            chews_per_min: 0.0,
            total_chews: timeline.count(EventKind::Chew) as u64,
            total_swallows: timeline.count(EventKind::Swallow) as u64,
            as_of_s: 0.0,
        }
    }

    fn in_meal(t: f64) -> PromptEvent {
        PromptEvent {
            time_s: t,
            stage: PromptStage::InMeal,
            prompt_id: "x".into(),
            family: PromptFamily::System1Nudge,
            length_class: LengthClass::Short,
            nominal_duration_s: 1.0,
            text: "Slow down.".into(),
        }
    }

    #[test]
    fn hundred_chews_five_swallows() {
        let mut t = Timeline::default();
        let mut time = 0.0;
        for _ in 0..5 {
            for _ in 0..20 {
                t.append_event(IngestionEvent::chew(time, 1.0, 0)).unwrap();
                time += 0.5;
            }
            t.append_event(IngestionEvent::swallow(time)).unwrap();
            time += 1.0;
        }
        t.append_prompt(in_meal(30.0)).unwrap();
        t.append_prompt(in_meal(60.0)).unwrap();
        let s = post_meal_summary(&t, &estimate(&t), 120.0);
        assert_eq!(s.mean_cps, Some(20.0));
        assert_eq!(s.prompts_delivered, 2);
        assert_eq!(s.per_interval_cps, vec![20; 5]);
        assert_eq!(s.chews_per_min_mean, 50.0);
    }

    #[test]
    fn zero_swallow_meal() {
        let t = Timeline::default();
        let s = post_meal_summary(&t, &estimate(&t), 42.0);
        assert_eq!(s.mean_cps, None);
        assert_eq!(s.total_chews, 0);
        assert_eq!(s.duration_s, 42.0);
        assert!(s.per_interval_cps.is_empty());
    }
}
