//! Candidate chew segmentation: 50 ms frame energy gating followed by a
//! duration-constrained state machine.
//!
//! A frame is active when its RMS level in dBFS reaches the configured
//! threshold. Active frames open a segment; up to `silence_tolerance_ms` of
//! inactive frames may be bridged. The segment closes at the end of its last
//! active frame and is emitted only if its duration lies within
//! `[min_segment_ms, max_segment_ms]`. A region that outgrows
//! `max_segment_ms` is marked over-long and swallowed whole until silence
//! closes it, so no fragment of it is ever emitted.

use thiserror::Error;

use crate::config::SessionConfig;

/// Level reported for digital silence.
pub const FLOOR_DB: f64 = -120.0;
const RMS_FLOOR: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum SegmentError {
    #[error("empty input: {samples} samples hold no complete frame")]
    EmptyInput { samples: usize },
    #[error("out-of-order frame: expected index {expected}, got {got}")]
    OutOfOrderFrame { expected: u64, got: u64 },
    #[error("segment bounds {start}..{end} outside buffered audio {buf_start}..{buf_end}")]
    BoundsOutsideBuffer { start: u64, end: u64, buf_start: u64, buf_end: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameLevel {
    pub index: u64,
    pub time_s: f64,
    pub level_db: f64,
    pub active: bool,
}

/// RMS level in dBFS with a -120 dB floor.
pub fn level_db(frame: &[f32]) -> f64 {
    if frame.is_empty() {
        return FLOOR_DB;
    }
    let energy: f64 = frame.iter().map(|&s| (s as f64) * (s as f64)).sum();
    let rms = (energy / frame.len() as f64).sqrt();
    20.0 * rms.max(RMS_FLOOR).log10()
}

/// Levels of every complete frame in `samples`; a trailing partial frame is
/// dropped.
pub fn frame_levels(samples: &[f32], config: &SessionConfig) -> Result<Vec<FrameLevel>, SegmentError> {
    frame_levels_from(samples, 0, config)
}

/// As [`frame_levels`], numbering frames from `first_index`.
pub fn frame_levels_from(
    samples: &[f32],
    first_index: u64,
    config: &SessionConfig,
) -> Result<Vec<FrameLevel>, SegmentError> {
    let n = config.frame_samples();
    if samples.len() < n {
        return Err(SegmentError::EmptyInput { samples: samples.len() });
    }
    Ok(samples
        .chunks_exact(n)
        .enumerate()
        .map(|(i, frame)| {
            let index = first_index + i as u64;
            let level = level_db(frame);
            FrameLevel {
                index,
                time_s: frame_time_s(index, config),
                level_db: level,
                active: level >= config.energy_threshold_db,
            }
        })
        .collect())
}

pub fn frame_time_s(index: u64, config: &SessionConfig) -> f64 {
    (index * config.frame_samples() as u64) as f64 / config.sample_rate_hz as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmenterMode {
    Idle,
    InSegment,
    InGap,
    /// Region already longer than `max_segment_ms`; discarded on close.
    Overlong,
}

/// Frame-aligned bounds of an accepted segment; `end_frame` is exclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentBounds {
    pub start_frame: u64,
    pub end_frame: u64,
    pub start_s: f64,
    pub end_s: f64,
}

impl SegmentBounds {
    pub fn duration_ms(&self, config: &SessionConfig) -> u64 {
        (self.end_frame - self.start_frame) * config.frame_len_ms as u64
    }

    pub fn sample_range(&self, config: &SessionConfig) -> (u64, u64) {
        let n = config.frame_samples() as u64;
        (self.start_frame * n, self.end_frame * n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmenterState {
    pub mode: SegmenterMode,
    pub segment_start_frame: u64,
    pub last_active_frame: u64,
    pub accumulated_gap_ms: u32,
    next_index: u64,
}

impl Default for SegmenterState {
    fn default() -> Self {
        Self {
            mode: SegmenterMode::Idle,
            segment_start_frame: 0,
            last_active_frame: 0,
            accumulated_gap_ms: 0,
            next_index: 0,
        }
    }
}

impl SegmenterState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn segment_start_s(&self, config: &SessionConfig) -> f64 {
        frame_time_s(self.segment_start_frame, config)
    }

    pub fn last_active_frame_s(&self, config: &SessionConfig) -> f64 {
        frame_time_s(self.last_active_frame, config)
    }

    /// Onset of the region currently being tracked, if any. No future
    /// segment can start before this.
    pub fn pending_start_s(&self, config: &SessionConfig) -> Option<f64> {
        match self.mode {
            SegmenterMode::Idle => None,
            _ => Some(self.segment_start_s(config)),
        }
    }

    /// Advance by one frame. Returns the bounds of a segment closed by this
    /// frame, if it passed the duration gate.
    pub fn step(
        &mut self,
        frame: &FrameLevel,
        config: &SessionConfig,
    ) -> Result<Option<SegmentBounds>, SegmentError> {
        if frame.index != self.next_index {
            return Err(SegmentError::OutOfOrderFrame { expected: self.next_index, got: frame.index });
        }
        self.next_index += 1;
        let i = frame.index;
        let span_ms = |start: u64| (i - start + 1) * config.frame_len_ms as u64;
        let max_ms = config.max_segment_ms as u64;

        match (self.mode, frame.active) {
            (SegmenterMode::Idle, true) => {
                self.segment_start_frame = i;
                self.last_active_frame = i;
                self.accumulated_gap_ms = 0;
                self.mode = if span_ms(i) > max_ms {
                    SegmenterMode::Overlong
                } else {
                    SegmenterMode::InSegment
                };
            }
            (SegmenterMode::Idle, false) => {}
            (SegmenterMode::InSegment | SegmenterMode::InGap, true) => {
                self.last_active_frame = i;
                self.accumulated_gap_ms = 0;
                self.mode = if span_ms(self.segment_start_frame) > max_ms {
                    SegmenterMode::Overlong
                } else {
                    SegmenterMode::InSegment
                };
            }
            (SegmenterMode::Overlong, true) => {
                self.last_active_frame = i;
                self.accumulated_gap_ms = 0;
            }
            (SegmenterMode::InSegment | SegmenterMode::InGap | SegmenterMode::Overlong, false) => {
                self.accumulated_gap_ms += config.frame_len_ms;
                if self.accumulated_gap_ms > config.silence_tolerance_ms {
                    return Ok(self.close(config));
                }
                if self.mode == SegmenterMode::InSegment {
                    self.mode = SegmenterMode::InGap;
                }
            }
        }
        Ok(None)
    }

    /// Close whatever is open at end of stream.
    pub fn finish(&mut self, config: &SessionConfig) -> Option<SegmentBounds> {
        match self.mode {
            SegmenterMode::Idle => None,
            _ => self.close(config),
        }
    }

    fn close(&mut self, config: &SessionConfig) -> Option<SegmentBounds> {
        let mode = std::mem::replace(&mut self.mode, SegmenterMode::Idle);
        self.accumulated_gap_ms = 0;
        if mode == SegmenterMode::Overlong {
            return None;
        }
        let bounds = SegmentBounds {
            start_frame: self.segment_start_frame,
            end_frame: self.last_active_frame + 1,
            start_s: frame_time_s(self.segment_start_frame, config),
            end_s: frame_time_s(self.last_active_frame + 1, config),
        };
        let dur = bounds.duration_ms(config);
        (config.min_segment_ms as u64..=config.max_segment_ms as u64)
            .contains(&dur)
            .then_some(bounds)
    }
}

/// A candidate chew: the segment audio, peak-normalized and zero-padded at
/// the tail to exactly `clip_len_ms`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSegment {
    pub id: u64,
    pub start_s: f64,
    pub end_s: f64,
    pub clip: Vec<f32>,
}

/// Cut `bounds` out of a buffer whose first sample sits at absolute sample
/// index `buffer_start`.
pub fn extract_clip(
    buffer: &[f32],
    buffer_start: u64,
    bounds: &SegmentBounds,
    id: u64,
    config: &SessionConfig,
) -> Result<CandidateSegment, SegmentError> {
    let (start, end) = bounds.sample_range(config);
    let buf_end = buffer_start + buffer.len() as u64;
    let clip_len = config.clip_samples();
    if start < buffer_start || end > buf_end || end < start || (end - start) as usize > clip_len {
        return Err(SegmentError::BoundsOutsideBuffer { start, end, buf_start: buffer_start, buf_end });
    }
    let raw = &buffer[(start - buffer_start) as usize..(end - buffer_start) as usize];
    let peak = raw.iter().fold(0.0f32, |m, &s| m.max(s.abs()));
    let mut clip = vec![0.0f32; clip_len];
    if peak > 0.0 {
        for (dst, &s) in clip.iter_mut().zip(raw) {
            *dst = (s / peak).clamp(-1.0, 1.0);
        }
    }
    Ok(CandidateSegment { id, start_s: bounds.start_s, end_s: bounds.end_s, clip })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SessionConfig {
        SessionConfig::default()
    }

    /// Frames from an activity pattern in 50 ms units.
    fn run(pattern: &[bool]) -> Vec<SegmentBounds> {
        let config = cfg();
        let mut st = SegmenterState::new();
        let mut out = Vec::new();
        for (i, &active) in pattern.iter().enumerate() {
            let frame = FrameLevel {
                index: i as u64,
                time_s: frame_time_s(i as u64, &config),
                level_db: if active { -10.0 } else { -80.0 },
                active,
            };
            out.extend(st.step(&frame, &config).unwrap());
        }
        out.extend(st.finish(&config));
        out
    }

    fn pattern(runs: &[(bool, usize)]) -> Vec<bool> {
        runs.iter().flat_map(|&(a, n)| std::iter::repeat_n(a, n)).collect()
    }

    #[test]
    fn silent_frame_hits_floor() {
        let levels = frame_levels(&[0.0; 800], &cfg()).unwrap();
        assert_eq!(levels.len(), 1);
        assert_eq!(levels[0].level_db, FLOOR_DB);
        assert!(!levels[0].active);
    }

    #[test]
    fn full_scale_frame_is_zero_db() {
        let levels = frame_levels(&[1.0; 800], &cfg()).unwrap();
        assert_eq!(levels[0].level_db, 0.0);
        assert!(levels[0].active);
    }

    #[test]
    fn quiet_constant_frame() {
        let levels = frame_levels(&[0.005; 800], &cfg()).unwrap();
        // 20 * log10(0.005) = -46.0206
        assert!((levels[0].level_db - (-46.0206)).abs() < 1e-3);
        assert!(!levels[0].active);
    }

    #[test]
    fn partial_frame_dropped_and_empty_rejected() {
        assert_eq!(frame_levels(&[0.1; 1700], &cfg()).unwrap().len(), 2);
        assert_eq!(
            frame_levels(&[0.1; 799], &cfg()).unwrap_err(),
            SegmentError::EmptyInput { samples: 799 }
        );
    }

    #[test]
    fn frame_times_follow_index() {
        let levels = frame_levels_from(&[0.0; 1600], 10, &cfg()).unwrap();
        assert_eq!(levels[0].index, 10);
        assert_eq!(levels[0].time_s, 0.5);
        assert_eq!(levels[1].time_s, 0.55);
    }

    #[test]
    fn simple_segment_250ms() {
        let segs = run(&pattern(&[(false, 2), (true, 5), (false, 4), (false, 10)]));
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].duration_ms(&cfg()), 250);
        assert_eq!(segs[0].start_frame, 2);
        assert!((segs[0].start_s - 0.1).abs() < 1e-12);
    }

    #[test]
    fn short_burst_discarded() {
        assert!(run(&pattern(&[(true, 1), (false, 10)])).is_empty());
    }

    #[test]
    fn gap_within_tolerance_is_bridged() {
        let segs = run(&pattern(&[(true, 3), (false, 2), (true, 2), (false, 10)]));
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].duration_ms(&cfg()), 350);
    }

    #[test]
    fn gap_of_150ms_bridged_200ms_splits() {
        let segs = run(&pattern(&[(true, 2), (false, 3), (true, 2), (false, 10)]));
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].duration_ms(&cfg()), 350);
        let segs = run(&pattern(&[(true, 2), (false, 4), (true, 2), (false, 10)]));
        assert_eq!(segs.len(), 2);
    }

    #[test]
    fn boundary_durations_are_inclusive() {
        assert_eq!(run(&pattern(&[(true, 2), (false, 5)])).len(), 1);
        assert_eq!(run(&pattern(&[(true, 8), (false, 5)])).len(), 1);
    }

    #[test]
    fn overlong_region_is_discarded_entirely() {
        // 450 ms active, then a bridged tail: nothing of it survives.
        assert!(run(&pattern(&[(true, 9), (false, 2), (true, 3), (false, 10)])).is_empty());
        // Speech-like long region followed by a real chew.
        let segs = run(&pattern(&[(true, 30), (false, 5), (true, 3), (false, 5)]));
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].start_frame, 35);
    }

    #[test]
    fn open_segment_closed_at_end_of_stream() {
        let segs = run(&pattern(&[(false, 3), (true, 4)]));
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].end_frame, 7);
    }

    #[test]
    fn gap_never_exceeds_tolerance_in_gap_mode() {
        let config = cfg();
        let mut st = SegmenterState::new();
        let pat = pattern(&[(true, 3), (false, 1), (true, 1), (false, 3), (true, 1), (false, 8)]);
        for (i, &active) in pat.iter().enumerate() {
            let frame = FrameLevel { index: i as u64, time_s: 0.0, level_db: 0.0, active };
            st.step(&frame, &config).unwrap();
            if st.mode == SegmenterMode::InGap {
                assert!(st.accumulated_gap_ms <= config.silence_tolerance_ms);
            }
        }
    }

    #[test]
    fn out_of_order_frame_rejected() {
        let config = cfg();
        let mut st = SegmenterState::new();
        let f = FrameLevel { index: 3, time_s: 0.15, level_db: -80.0, active: false };
        assert_eq!(
            st.step(&f, &config).unwrap_err(),
            SegmentError::OutOfOrderFrame { expected: 0, got: 3 }
        );
    }

    fn bounds(start_frame: u64, end_frame: u64) -> SegmentBounds {
        let c = cfg();
        SegmentBounds {
            start_frame,
            end_frame,
            start_s: frame_time_s(start_frame, &c),
            end_s: frame_time_s(end_frame, &c),
        }
    }

    #[test]
    fn clip_is_padded_to_400ms() {
        let buf = vec![0.1f32; 16000];
        let seg = extract_clip(&buf, 0, &bounds(2, 7), 0, &cfg()).unwrap();
        assert_eq!(seg.clip.len(), 6400);
        assert!(seg.clip[..4000].iter().all(|&s| s == 1.0));
        assert!(seg.clip[4000..].iter().all(|&s| s == 0.0));
        assert_eq!(seg.clip[4000..].len(), 2400);
    }

    #[test]
    fn clip_peak_normalized() {
        let mut buf = vec![0.0f32; 8000];
        buf[900] = -0.25;
        buf[1000] = 0.125;
        let seg = extract_clip(&buf, 0, &bounds(1, 4), 5, &cfg()).unwrap();
        assert_eq!(seg.id, 5);
        let peak = seg.clip.iter().fold(0.0f32, |m, &s| m.max(s.abs()));
        assert_eq!(peak, 1.0);
        assert_eq!(seg.clip[100], -1.0);
        assert_eq!(seg.clip[200], 0.5);
    }

    #[test]
    fn all_zero_clip_stays_zero() {
        let buf = vec![0.0f32; 8000];
        let seg = extract_clip(&buf, 0, &bounds(0, 4), 0, &cfg()).unwrap();
        assert!(seg.clip.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn clip_respects_buffer_offset() {
        let buf = vec![0.5f32; 4000];
        // Buffer starts at sample 8000 = frame 10.
        assert!(extract_clip(&buf, 8000, &bounds(10, 13), 0, &cfg()).is_ok());
        assert!(matches!(
            extract_clip(&buf, 8000, &bounds(9, 12), 0, &cfg()),
            Err(SegmentError::BoundsOutsideBuffer { .. })
        ));
        assert!(matches!(
            extract_clip(&buf, 8000, &bounds(12, 16), 0, &cfg()),
            Err(SegmentError::BoundsOutsideBuffer { .. })
        ));
    }
}
