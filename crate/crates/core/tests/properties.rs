mod common;

use proptest::prelude::*;

use earpace_core::audio::{synth_meal, SynthMealSpec};
use earpace_core::evaluation::{evaluate, match_events, AnnotationTrack, Interval, Label};
use earpace_core::eventlog::{parse_event_log, render_event_log, EventLogRecord};
use earpace_core::intervention::{matches_cycle_grammar, PolicyState, PromptLibrary};
use earpace_core::pace::{PaceEstimate, PaceState};
use earpace_core::segmentation::{frame_time_s, FrameLevel, SegmenterState};
use earpace_core::SessionConfig;

fn gaps() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![4 => 0.1f64..0.9, 1 => 0.5f64..3.0, 1 => Just(0.8), 1 => Just(0.424)],
        0..200,
    )
}

proptest! {
    #[test]
    fn segmenter_matches_offline_oracle(active in prop::collection::vec(any::<bool>(), 0..400)) {
        let cfg = SessionConfig::default();
        let mut state = SegmenterState::new();
        let mut got = Vec::new();
        for (i, &a) in active.iter().enumerate() {
            let level = FrameLevel {
                index: i as u64,
                time_s: frame_time_s(i as u64, &cfg),
                level_db: if a { -10.0 } else { -90.0 },
                active: a,
            };
            if let Some(b) = state.step(&level, &cfg).unwrap() {
                got.push((b.start_frame, b.end_frame));
            }
            prop_assert!(state.accumulated_gap_ms <= cfg.silence_tolerance_ms);
        }
        if let Some(b) = state.finish(&cfg) {
            got.push((b.start_frame, b.end_frame));
        }
        prop_assert_eq!(got, common::offline_segments(&active, 3, 2, 8));
    }

    #[test]
    fn pace_matches_brute_force(start in 0.0f64..5.0, gaps in gaps()) {
        let cfg = SessionConfig::default();
        let mut times = vec![start];
        for g in gaps {
            let t = times.last().unwrap() + g;
            times.push(t);
        }
        let (want, want_cps) = common::brute_force_swallows(&times, 0.8, 1.5);
        let mut state = PaceState::new();
        let mut got = Vec::new();
        let mut last_totals = (0, 0);
        for &t in &times {
            let step = state.step(t, &cfg).unwrap();
            got.extend(step.swallow.map(|s| s.time_s));
            let totals = (step.estimate.total_chews, step.estimate.total_swallows);
            prop_assert!(totals.0 >= last_totals.0 && totals.1 >= last_totals.1);
            last_totals = totals;
        }
        prop_assert_eq!(&got, &want);
        prop_assert_eq!(&state.closed_intervals, &want_cps);
        let closed: u64 = state.closed_intervals.iter().map(|&c| c as u64).sum();
        prop_assert_eq!(closed + state.chews_since_last_swallow as u64, state.total_chews);
    }

    #[test]
    fn matching_is_one_to_one_and_order_free(
        pred in prop::collection::vec(0.0f64..30.0, 0..60),
        truth in prop::collection::vec(0.0f64..30.0, 0..60),
        seed in any::<u64>(),
    ) {
        let m = match_events(&pred, &truth, 0.15);
        prop_assert!(m.pairs.len() <= pred.len().min(truth.len()));
        prop_assert_eq!(m.pairs.len() + m.unmatched_predicted.len(), pred.len());
        prop_assert_eq!(m.pairs.len() + m.unmatched_truth.len(), truth.len());
        for (p, t) in &m.pairs {
            prop_assert!((p - t).abs() <= 0.15 + 1e-12);
        }
        let mut shuffled = pred.clone();
        let n = shuffled.len();
        if n > 1 {
            shuffled.rotate_left((seed as usize) % n);
        }
        prop_assert_eq!(match_events(&shuffled, &truth, 0.15), m);
    }

    #[test]
    fn evaluation_ignores_uniform_offset(
        onsets in prop::collection::btree_set(0u32..600, 1..40),
        jitter in prop::collection::vec(-0.2f64..0.2, 40),
        offset in 0.0f64..100.0,
    ) {
        let onsets: Vec<f64> = onsets.into_iter().map(|o| o as f64 * 0.5).collect();
        let build = |shift: f64| {
            let mut ivs: Vec<Interval> = onsets
                .iter()
                .map(|&o| Interval { start_s: o + shift, end_s: o + shift + 0.2, label: Label::Chew })
                .collect();
            let mid = onsets[onsets.len() / 2];
            ivs.push(Interval { start_s: mid + shift + 0.25, end_s: mid + shift + 0.3, label: Label::Swallow });
            AnnotationTrack::new(ivs).unwrap()
        };
        let pred: Vec<f64> = onsets.iter().zip(&jitter).map(|(o, j)| o + 0.1 + j).collect();
        let shifted: Vec<f64> = pred.iter().map(|p| p + offset).collect();
        let a = evaluate(&pred, None, &build(0.0), Some(400.0), 0.15).unwrap();
        let b = evaluate(&shifted, None, &build(offset), Some(400.0), 0.15).unwrap();
        prop_assert_eq!(a.detection, b.detection);
        prop_assert_eq!(a.mae_cps, b.mae_cps);
    }

    #[test]
    fn cooldown_and_grammar_hold(
        seed in any::<u64>(),
        steps in prop::collection::vec((0.0f64..40.0, prop::option::of(5.0f64..35.0), 0u64..5), 1..120),
    ) {
        let cfg = SessionConfig::default();
        let lib = PromptLibrary::bundled();
        let mut policy = PolicyState::new(seed);
        let mut now = 0.0;
        let mut times: Vec<f64> = Vec::new();
        let mut codes = String::new();
        for (dt, cps, swallows) in steps {
            now += dt;
            let pace = PaceEstimate {
                cps_last: cps.map(|c| c as u32),
                cps_running: cps,
                cps_smoothed: cps,
                chews_per_min: 0.0,
                total_chews: 0,
                total_swallows: swallows,
                as_of_s: now,
            };
            if let Some(p) = policy.maybe_prompt(&lib, &pace, now, &cfg) {
                prop_assert!(cps.is_some_and(|c| c < 20.0) && swallows >= 2);
                times.push(p.time_s);
                codes.push(p.length_class.code());
            }
        }
        for w in times.windows(2) {
            prop_assert!(w[1] - w[0] >= 30.0);
        }
        prop_assert!(matches_cycle_grammar(&codes));
    }

    #[test]
    fn event_log_round_trips(
        chews in prop::collection::vec((0.0f64..1000.0, 0.0f64..1.0, prop::option::of(0u64..10_000)), 0..30),
        text in "\\PC{0,40}",
    ) {
        let mut records = vec![EventLogRecord::header(16000, 3.0, 1, text.clone())];
        let mut sorted = chews;
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (t, c, seg) in sorted {
            records.push(EventLogRecord::Chew { time_s: t, end_s: t + 0.2, segment: seg, confidence: c });
        }
        records.push(EventLogRecord::Prompt {
            time_s: 1000.0,
            stage: "in_meal".into(),
            prompt_id: "x".into(),
            family: "gain_frame".into(),
            length_class: "short".into(),
            duration_s: 1.0,
            text,
        });
        let once = render_event_log(&records).unwrap();
        let twice = render_event_log(&parse_event_log(&once).unwrap()).unwrap();
        prop_assert_eq!(once, twice);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn generated_meals_are_well_formed(seed in any::<u64>(), duration in 20.0f64..120.0, rate in 0.0f64..0.3) {
        let spec = SynthMealSpec { seed, duration_s: duration, artifact_rate: rate, ..Default::default() };
        let m = synth_meal(&spec).unwrap();
        prop_assert_eq!(m.samples.len(), (duration * 16000.0).round() as usize);
        for b in m.chews.iter().chain(&m.artifacts) {
            let ms = (b.end_s - b.start_s) * 1000.0;
            prop_assert!((100.0..=400.0).contains(&ms), "{}", ms);
            prop_assert!(b.start_s >= 0.0 && b.end_s <= duration);
        }
        prop_assert_eq!(m.truth.count(Label::Chew), m.chews.len());
        prop_assert_eq!(m.truth.count(Label::Swallow), m.swallows.len());
        prop_assert!(m.samples.iter().all(|s| s.abs() <= 1.0));
    }
}
