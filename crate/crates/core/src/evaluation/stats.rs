use std::fmt::Write as _;

use super::annotations::{AnnotationTrack, Label};

#[derive(Debug, Clone, PartialEq)]
pub struct TrackStats {
    pub name: String,
    pub duration_s: f64,
    pub chews: u64,
    pub swallows: u64,
    pub mean_cps: Option<f64>,
}

impl TrackStats {
    fn new(name: String, duration_s: f64, chews: u64, swallows: u64) -> Self {
        let mean_cps = (swallows > 0).then(|| chews as f64 / swallows as f64);
        Self { name, duration_s, chews, swallows, mean_cps }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub tracks: Vec<TrackStats>,
    pub aggregate: TrackStats,
}

pub fn dataset_stats(tracks: &[AnnotationTrack]) -> DatasetStats {
    let rows: Vec<TrackStats> = tracks
        .iter()
        .map(|t| {
            TrackStats::new(t.name(), t.duration_s(), t.count(Label::Chew) as u64, t.count(Label::Swallow) as u64)
        })
        .collect();
    let aggregate = TrackStats::new(
        "total".to_string(),
        rows.iter().map(|r| r.duration_s).sum(),
        rows.iter().map(|r| r.chews).sum(),
        rows.iter().map(|r| r.swallows).sum(),
    );
    DatasetStats { tracks: rows, aggregate }
}

fn cps_cell(cps: Option<f64>) -> String {
    cps.map_or_else(|| "-".to_string(), |c| format!("{c:.2}"))
}

impl DatasetStats {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<24} {:>12} {:>8} {:>9} {:>8}", "track", "duration_s", "chews", "swallows", "cps");
        for r in self.tracks.iter().chain(std::iter::once(&self.aggregate)) {
            let _ = writeln!(
                out,
                "{:<24} {:>12.2} {:>8} {:>9} {:>8}",
                r.name,
                r.duration_s,
                r.chews,
                r.swallows,
                cps_cell(r.mean_cps)
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("track,duration_s,chews,swallows,mean_cps\n");
        for r in self.tracks.iter().chain(std::iter::once(&self.aggregate)) {
            let cps = r.mean_cps.map_or_else(String::new, |c| format!("{c:.4}"));
            let _ = writeln!(out, "{},{:.2},{},{},{}", r.name.replace(',', " "), r.duration_s, r.chews, r.swallows, cps);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::annotations::Interval;

    fn track(chews: usize, swallows: usize) -> AnnotationTrack {
        let mut ivs = Vec::new();
        for i in 0..chews {
            ivs.push(Interval { start_s: i as f64, end_s: i as f64 + 0.2, label: Label::Chew });
        }
        for i in 0..swallows {
            ivs.push(Interval { start_s: i as f64 + 0.5, end_s: i as f64 + 0.7, label: Label::Swallow });
        }
        AnnotationTrack::new(ivs).unwrap()
    }

    #[test]
    fn single_track_cps() {
        let s = dataset_stats(&[track(10, 2)]);
        assert_eq!(s.tracks[0].mean_cps, Some(5.0));
        assert_eq!(s.aggregate.chews, 10);
    }

    #[test]
    fn zero_swallows_has_no_cps() {
        let s = dataset_stats(&[track(3, 0)]);
        assert_eq!(s.aggregate.mean_cps, None);
        assert!(s.to_text().contains(" -"));
        assert!(s.to_csv().ends_with(",3,0,\n"));
    }
}
