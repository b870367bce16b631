//! Swallow inference from inter-chew gaps and running eating-pace estimates.
//!
//! A gap `d` between consecutive chews hosts a swallow when
//! `d > swallow_abs_gap_s` or `d > swallow_rel_factor * mean_gap`, where
//! `mean_gap` averages the chew-to-chew gaps recorded since the last
//! swallow. Gaps that host a swallow never enter that mean.

use std::collections::VecDeque;

use thiserror::Error;

use crate::config::SessionConfig;
use crate::timeline::IngestionEvent;

const RATE_WINDOW_S: f64 = 60.0;

#[derive(Debug, Error, PartialEq)]
pub enum PaceError {
    #[error("time regression: chew at {new_s:.3} s is not after previous chew at {last_s:.3} s")]
    TimeRegression { last_s: f64, new_s: f64 },
}

/// Both comparisons are strict.
pub fn swallow_predicate(d: f64, d_bar_chew: Option<f64>, config: &SessionConfig) -> bool {
    d > config.swallow_abs_gap_s || d_bar_chew.is_some_and(|mean| d > config.swallow_rel_factor * mean)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaceEstimate {
    /// Chews in the most recently closed swallow interval.
    pub cps_last: Option<u32>,
    /// Chews in closed intervals divided by swallows so far.
    pub cps_running: Option<f64>,
    /// Mean of up to `cps_smoothing_intervals` latest closed intervals.
    pub cps_smoothed: Option<f64>,
    pub chews_per_min: f64,
    pub total_chews: u64,
    pub total_swallows: u64,
    pub as_of_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaceStep {
    pub swallow: Option<IngestionEvent>,
    pub estimate: PaceEstimate,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PaceState {
    pub last_chew_time_s: Option<f64>,
    /// Chew-to-chew gaps since the last swallow.
    pub chew_gaps_since_swallow: Vec<f64>,
    gap_sum: f64,
    pub chews_since_last_swallow: u32,
    pub recent_chew_times: VecDeque<f64>,
    pub total_chews: u64,
    pub total_swallows: u64,
    /// Chew count of every closed interval, in order.
    pub closed_intervals: Vec<u32>,
    closed_chews: u64,
}

impl PaceState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn d_bar_chew(&self) -> Option<f64> {
        (!self.chew_gaps_since_swallow.is_empty())
            .then(|| self.gap_sum / self.chew_gaps_since_swallow.len() as f64)
    }

    pub fn step(&mut self, chew_time_s: f64, config: &SessionConfig) -> Result<PaceStep, PaceError> {
        let mut swallow = None;
        if let Some(last) = self.last_chew_time_s {
            if !(chew_time_s > last) {
                return Err(PaceError::TimeRegression { last_s: last, new_s: chew_time_s });
            }
            let d = chew_time_s - last;
            if swallow_predicate(d, self.d_bar_chew(), config) {
                swallow = Some(IngestionEvent::swallow((last + chew_time_s) / 2.0));
                self.close_interval();
            } else {
                self.chew_gaps_since_swallow.push(d);
                self.gap_sum += d;
            }
        }
        self.last_chew_time_s = Some(chew_time_s);
        self.chews_since_last_swallow += 1;
        self.total_chews += 1;
        self.recent_chew_times.push_back(chew_time_s);
        while self
            .recent_chew_times
            .front()
            .is_some_and(|&t| t <= chew_time_s - RATE_WINDOW_S)
        {
            self.recent_chew_times.pop_front();
        }
        Ok(PaceStep { swallow, estimate: self.estimate(chew_time_s, config) })
    }

    fn close_interval(&mut self) {
        self.closed_intervals.push(self.chews_since_last_swallow);
        self.closed_chews += self.chews_since_last_swallow as u64;
        self.total_swallows += 1;
        self.chews_since_last_swallow = 0;
        self.chew_gaps_since_swallow.clear();
        self.gap_sum = 0.0;
    }

    /// Chews in `(as_of_s - 60, as_of_s]`; before the first minute the count
    /// is extrapolated to a per-minute rate.
    pub fn chews_per_minute(&self, as_of_s: f64) -> f64 {
        if as_of_s <= 0.0 {
            return 0.0;
        }
        let count = self
            .recent_chew_times
            .iter()
            .filter(|&&t| t > as_of_s - RATE_WINDOW_S && t <= as_of_s)
            .count() as f64;
        if as_of_s < RATE_WINDOW_S {
            count * RATE_WINDOW_S / as_of_s
        } else {
            count
        }
    }

    pub fn smoothed_cps(&self, intervals: usize) -> Option<f64> {
        let n = self.closed_intervals.len().min(intervals);
        (n > 0).then(|| {
            let tail = &self.closed_intervals[self.closed_intervals.len() - n..];
            tail.iter().map(|&c| c as f64).sum::<f64>() / n as f64
        })
    }

    pub fn estimate(&self, as_of_s: f64, config: &SessionConfig) -> PaceEstimate {
        PaceEstimate {
            cps_last: self.closed_intervals.last().copied(),
            cps_running: (self.total_swallows > 0)
                .then(|| self.closed_chews as f64 / self.total_swallows as f64),
            cps_smoothed: self.smoothed_cps(config.cps_smoothing_intervals),
            chews_per_min: self.chews_per_minute(as_of_s),
            total_chews: self.total_chews,
            total_swallows: self.total_swallows,
            as_of_s,
        }
    }

    /// End of meal: trailing chews after the last swallow are closed by a
    /// terminal swallow placed `swallow_abs_gap_s` after the last chew.
    pub fn finalize(&mut self, config: &SessionConfig) -> PaceStep {
        let mut swallow = None;
        let mut as_of = self.last_chew_time_s.unwrap_or(0.0);
        if self.chews_since_last_swallow > 0 {
            let t = as_of + config.swallow_abs_gap_s;
            swallow = Some(IngestionEvent::swallow(t));
            self.close_interval();
            as_of = t;
        }
        PaceStep { swallow, estimate: self.estimate(as_of, config) }
    }
}

pub fn step_pace(state: &mut PaceState, chew_time_s: f64, config: &SessionConfig) -> Result<PaceStep, PaceError> {
    state.step(chew_time_s, config)
}

pub fn finalize_meal(state: &mut PaceState, config: &SessionConfig) -> PaceStep {
    state.finalize(config)
}
