//! Scoring pipeline output against annotation tracks.

mod annotations;
mod metrics;
mod stats;

use std::fmt::Write as _;

use thiserror::Error;

pub use annotations::{AnnotationTrack, Interval, Label};
pub use metrics::{
    decision_accuracy, detection_metrics, mae_chews_per_min, mae_cps, match_events, per_minute_counts,
    CpsComparison, DetectionMetrics, Matching, DEFAULT_TOLERANCE_S,
};
pub use stats::{dataset_stats, DatasetStats, TrackStats};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("annotation line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("overlapping {label} intervals at rows {first_row} and {second_row}")]
    Overlap { label: &'static str, first_row: usize, second_row: usize },
    #[error("annotation line {line}: unknown label `{label}`")]
    UnknownLabel { line: usize, label: String },
    #[error("empty session: nothing to bucket")]
    EmptySession,
    #[error("truth track has no swallows")]
    NoSwallows,
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub detection: DetectionMetrics,
    /// Present only when per-candidate decisions were available.
    pub accuracy: Option<f64>,
    pub mae_chews_per_min: f64,
    /// Absent when the truth track has no swallows.
    pub mae_cps: Option<f64>,
    pub cps_intervals: Vec<(u32, u32)>,
    pub tolerance_s: f64,
    pub duration_s: f64,
}

/// Score predicted chew onsets against a truth track. `decisions` holds
/// `(onset, accepted)` for every classified candidate when known.
pub fn evaluate(
    predicted_chews: &[f64],
    decisions: Option<&[(f64, bool)]>,
    truth: &AnnotationTrack,
    duration_s: Option<f64>,
    tolerance_s: f64,
) -> Result<EvaluationReport, EvalError> {
    let centers = truth.chew_centers();
    let matching = match_events(predicted_chews, &centers, tolerance_s);
    let last_pred = predicted_chews.iter().cloned().fold(0.0, f64::max);
    let duration_s = duration_s.unwrap_or_else(|| truth.duration_s().max(last_pred));
    let onsets = truth.chew_onsets();
    let mae_cpm = mae_chews_per_min(predicted_chews, &onsets, duration_s)?;
    let cps = match mae_cps(predicted_chews, &onsets, &truth.swallow_centers()) {
        Ok(c) => Some(c),
        Err(EvalError::NoSwallows) => None,
        Err(e) => return Err(e),
    };
    Ok(EvaluationReport {
        detection: DetectionMetrics::from(&matching),
        accuracy: decisions.and_then(|d| decision_accuracy(d, &centers, tolerance_s)),
        mae_chews_per_min: mae_cpm,
        mae_cps: cps.as_ref().map(|c| c.mae),
        cps_intervals: cps.map(|c| c.intervals).unwrap_or_default(),
        tolerance_s,
        duration_s,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"))
}

impl EvaluationReport {
    pub fn to_text(&self) -> String {
        let d = &self.detection;
        let mut out = String::new();
        let _ = writeln!(out, "chew detection (tolerance {:.0} ms)", self.tolerance_s * 1000.0);
        let _ = writeln!(out, "  tp {}  fp {}  fn {}", d.true_positives, d.false_positives, d.false_negatives);
        let _ = writeln!(out, "  precision {:.4}", d.precision);
        let _ = writeln!(out, "  recall    {:.4}", d.recall);
        let _ = writeln!(out, "  f1        {:.4}", d.f1);
        let _ = writeln!(out, "  accuracy  {}", opt(self.accuracy));
        let _ = writeln!(out, "pace estimation over {:.3} s", self.duration_s);
        let _ = writeln!(out, "  mae chews/min {:.4}", self.mae_chews_per_min);
        let _ = writeln!(out, "  mae cps       {}", opt(self.mae_cps));
        if !self.cps_intervals.is_empty() {
            let _ = writeln!(out, "per-interval chews (truth/predicted)");
            for (i, (t, p)) in self.cps_intervals.iter().enumerate() {
                let _ = writeln!(out, "  {:>4}  {:>4} {:>4}", i + 1, t, p);
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let d = &self.detection;
        let cell = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.6}"));
        format!(
            "tp,fp,fn,precision,recall,f1,accuracy,mae_chews_per_min,mae_cps\n{},{},{},{:.6},{:.6},{:.6},{},{:.6},{}\n",
            d.true_positives,
            d.false_positives,
            d.false_negatives,
            d.precision,
            d.recall,
            d.f1,
            cell(self.accuracy),
            self.mae_chews_per_min,
            cell(self.mae_cps)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction() {
        let truth = AnnotationTrack::parse_str(
            "# duration_s: 10\n1.0\t1.2\tchew\n1.5\t1.7\tchew\n3.0\t3.3\tswallow\n5.0\t5.2\tchew\n",
        )
        .unwrap();
        let r = evaluate(&[1.05, 1.55, 5.05], None, &truth, None, DEFAULT_TOLERANCE_S).unwrap();
        assert_eq!(r.detection.f1, 1.0);
        assert_eq!(r.mae_chews_per_min, 0.0);
        assert_eq!(r.mae_cps, Some(0.0));
        assert_eq!(r.accuracy, None);
        assert!(r.to_text().contains("f1        1.0000"));
        assert!(r.to_csv().lines().nth(1).unwrap().starts_with("3,0,0,1.000000"));
    }

    #[test]
    fn uniform_offset_is_invariant() {
        let text = "0.5\t0.7\tchew\n1.0\t1.2\tchew\n2.5\t2.8\tswallow\n4.0\t4.2\tchew\n";
        let truth = AnnotationTrack::parse_str(text).unwrap();
        let pred = [0.55, 1.3, 4.0];
        let a = evaluate(&pred, None, &truth, Some(60.0), 0.15).unwrap();
        let shifted: Vec<Interval> = truth
            .intervals
            .iter()
            .map(|iv| Interval { start_s: iv.start_s + 7.0, end_s: iv.end_s + 7.0, label: iv.label })
            .collect();
        let truth2 = AnnotationTrack::new(shifted).unwrap();
        let pred2: Vec<f64> = pred.iter().map(|p| p + 7.0).collect();
        let b = evaluate(&pred2, None, &truth2, Some(60.0), 0.15).unwrap();
        assert_eq!(a.detection, b.detection);
        assert_eq!(a.mae_cps, b.mae_cps);
    }
}
