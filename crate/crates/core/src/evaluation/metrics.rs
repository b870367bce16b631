//! Tolerance matching, detection scores and pace MAE figures.

use super::EvalError;

pub const DEFAULT_TOLERANCE_S: f64 = 0.150;
const BUCKET_S: f64 = 60.0;

/// One-to-one pairing of predicted chew times with truth chew centers.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// `(predicted_time, truth_center)` pairs in predicted-time order.
    pub pairs: Vec<(f64, f64)>,
    pub unmatched_predicted: Vec<f64>,
    pub unmatched_truth: Vec<f64>,
}

impl Matching {
    pub fn true_positives(&self) -> usize {
        self.pairs.len()
    }
    pub fn false_positives(&self) -> usize {
        self.unmatched_predicted.len()
    }
    pub fn false_negatives(&self) -> usize {
        self.unmatched_truth.len()
    }
}

/// Greedy matching in predicted-time order: each prediction takes the
/// nearest still-unmatched truth center within `tolerance_s` (inclusive),
/// preferring the earlier center on ties.
pub fn match_events(predicted: &[f64], truth_centers: &[f64], tolerance_s: f64) -> Matching {
    let mut pred = predicted.to_vec();
    pred.sort_by(f64::total_cmp);
    let mut truth = truth_centers.to_vec();
    truth.sort_by(f64::total_cmp);
    let mut taken = vec![false; truth.len()];
    let mut pairs = Vec::new();
    let mut unmatched_predicted = Vec::new();
    for &p in &pred {
        let lo = truth.partition_point(|&t| t < p - tolerance_s);
        let mut best: Option<(usize, f64)> = None;
        for (j, &t) in truth.iter().enumerate().skip(lo) {
            let d = (t - p).abs();
            if t > p + tolerance_s {
                break;
            }
            if taken[j] || d > tolerance_s {
                continue;
            }
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, _)) => {
                taken[j] = true;
                pairs.push((p, truth[j]));
            }
            None => unmatched_predicted.push(p),
        }
    }
    let unmatched_truth = truth.iter().zip(&taken).filter(|(_, &t)| !t).map(|(&c, _)| c).collect();
    Matching { pairs, unmatched_predicted, unmatched_truth }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionMetrics {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Zero denominators yield zero scores.
pub fn detection_metrics(tp: usize, fp: usize, fn_: usize) -> DetectionMetrics {
    let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    DetectionMetrics { true_positives: tp, false_positives: fp, false_negatives: fn_, precision, recall, f1 }
}

impl From<&Matching> for DetectionMetrics {
    fn from(m: &Matching) -> Self {
        detection_metrics(m.true_positives(), m.false_positives(), m.false_negatives())
    }
}

/// Accuracy over candidate decisions: a candidate is truly a chew when its
/// onset matches a truth chew center within tolerance.
pub fn decision_accuracy(decisions: &[(f64, bool)], truth_centers: &[f64], tolerance_s: f64) -> Option<f64> {
    if decisions.is_empty() {
        return None;
    }
    let onsets: Vec<f64> = decisions.iter().map(|d| d.0).collect();
    let matching = match_events(&onsets, truth_centers, tolerance_s);
    let mut real: Vec<f64> = matching.pairs.iter().map(|p| p.0).collect();
    real.sort_by(f64::total_cmp);
    let correct = decisions
        .iter()
        .filter(|(t, is_chew)| {
            // Candidates at identical onsets are interchangeable here.
            let is_real = real.binary_search_by(|x| x.total_cmp(t)).is_ok();
            is_real == *is_chew
        })
        .count();
    Some(correct as f64 / decisions.len() as f64)
}

/// Per-minute bucket counts over `[0, duration_s)`; a partial last bucket
/// is scaled to a per-minute rate.
pub fn per_minute_counts(times: &[f64], duration_s: f64) -> Vec<f64> {
    let n = (duration_s / BUCKET_S).ceil().max(1.0) as usize;
    let mut counts = vec![0.0; n];
    for &t in times {
        let b = ((t / BUCKET_S).floor().max(0.0) as usize).min(n - 1);
        counts[b] += 1.0;
    }
    let last_len = duration_s - BUCKET_S * (n - 1) as f64;
    if last_len > 0.0 && last_len < BUCKET_S {
        counts[n - 1] *= BUCKET_S / last_len;
    }
    counts
}

pub fn mae_chews_per_min(predicted: &[f64], truth: &[f64], duration_s: f64) -> Result<f64, EvalError> {
    if !(duration_s > 0.0) {
        return Err(EvalError::EmptySession);
    }
    let p = per_minute_counts(predicted, duration_s);
    let t = per_minute_counts(truth, duration_s);
    Ok(p.iter().zip(&t).map(|(a, b)| (a - b).abs()).sum::<f64>() / p.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CpsComparison {
    pub mae: f64,
    /// `(truth_chews, predicted_chews)` per truth interval.
    pub intervals: Vec<(u32, u32)>,
}

/// Truth swallows split the meal into `[0, s1), [s1, s2), ...`. A trailing
/// span after the last swallow counts only if it holds any chew.
pub fn mae_cps(predicted: &[f64], truth_chews: &[f64], truth_swallows: &[f64]) -> Result<CpsComparison, EvalError> {
    if truth_swallows.is_empty() {
        return Err(EvalError::NoSwallows);
    }
    let mut bounds = truth_swallows.to_vec();
    bounds.sort_by(f64::total_cmp);
    let count = |times: &[f64], lo: f64, hi: f64| times.iter().filter(|&&t| t >= lo && t < hi).count() as u32;
    let mut intervals = Vec::new();
    let mut lo = f64::NEG_INFINITY;
    for &hi in &bounds {
        intervals.push((count(truth_chews, lo, hi), count(predicted, lo, hi)));
        lo = hi;
    }
    let tail = (count(truth_chews, lo, f64::INFINITY), count(predicted, lo, f64::INFINITY));
    if tail != (0, 0) {
        intervals.push(tail);
    }
    let mae = intervals.iter().map(|&(t, p)| (t as f64 - p as f64).abs()).sum::<f64>() / intervals.len() as f64;
    Ok(CpsComparison { mae, intervals })
}
