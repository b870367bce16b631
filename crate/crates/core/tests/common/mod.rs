//! Independent reference implementations used only by tests.
#![allow(dead_code)]

use rand::Rng;

/// Offline segmentation over per-frame activity flags: merge active runs
/// separated by at most `bridge` inactive frames, then keep regions whose
/// length in frames lies in `[min_frames, max_frames]`. Returns
/// `(start_frame, end_frame_exclusive)`.
pub fn offline_segments(active: &[bool], bridge: usize, min_frames: usize, max_frames: usize) -> Vec<(u64, u64)> {
    let mut regions: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < active.len() {
        if !active[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < active.len() && active[i] {
            i += 1;
        }
        match regions.last_mut() {
            Some(last) if start - last.1 <= bridge => last.1 = i,
            _ => regions.push((start, i)),
        }
    }
    regions
        .into_iter()
        .filter(|(s, e)| (min_frames..=max_frames).contains(&(e - s)))
        .map(|(s, e)| (s as u64, e as u64))
        .collect()
}

/// Brute-force swallow inference: every gap re-evaluated with the mean of
/// the non-swallow gaps since the last swallow recomputed from scratch.
/// Returns swallow times and the chew count of each closed interval.
pub fn brute_force_swallows(times: &[f64], abs_gap: f64, rel: f64) -> (Vec<f64>, Vec<u32>) {
    let mut swallows = Vec::new();
    let mut intervals = Vec::new();
    let mut run_start = 0usize;
    let mut swallow_gaps: Vec<usize> = Vec::new();
    for i in 1..times.len() {
        let d = times[i] - times[i - 1];
        let history: Vec<f64> = (run_start + 1..i)
            .filter(|j| !swallow_gaps.contains(j))
            .map(|j| times[j] - times[j - 1])
            .collect();
        let adaptive = if history.is_empty() {
            false
        } else {
            let mean = history.iter().sum::<f64>() / history.len() as f64;
            d > rel * mean
        };
        if d > abs_gap || adaptive {
            swallows.push((times[i] + times[i - 1]) / 2.0);
            intervals.push((i - run_start) as u32);
            swallow_gaps.push(i);
            run_start = i;
        }
    }
    (swallows, intervals)
}

/// Center frequencies of `n` HTK triangular filters spanning
/// `[f_min, f_max]`: equally spaced on the mel axis, endpoints excluded.
pub fn htk_centers(n: usize, f_min: f64, f_max: f64) -> Vec<f64> {
    let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let hz = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
    let (lo, hi) = (mel(f_min), mel(f_max));
    (1..=n).map(|k| hz(lo + (hi - lo) * k as f64 / (n + 1) as f64)).collect()
}

/// Chew times with gaps drawn from a two-component mixture: mostly short
/// within-run gaps around `chew_gap`, occasionally long around
/// `swallow_gap`.
pub fn mixture_chew_times(rng: &mut impl Rng, len: usize, chew_gap: f64, swallow_gap: f64) -> Vec<f64> {
    let mut t = rng.random_range(0.0..2.0);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(t);
        let long = rng.random_bool(0.06);
        let (mean, spread) = if long { (swallow_gap, 0.5) } else { (chew_gap, 0.15) };
        // rounding to ms produces exact ties with the thresholds now and then
        let g: f64 = (mean + rng.random_range(-spread..spread)).max(0.05);
        t += (g * 1000.0).round() / 1000.0;
    }
    out
}
