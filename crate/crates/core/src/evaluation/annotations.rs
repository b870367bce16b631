//! Ground-truth annotation tracks.
//!
//! File format: UTF-8, tab-separated `start_s<TAB>end_s<TAB>label` rows with
//! `label` in {chew, swallow}. An optional header row `start_s  end_s  label`
//! is skipped. Comment lines of the form `# key: value` become track tags
//! (`participant`, `session`, `environment`, `duration_s`, ...); other `#`
//! lines are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Chew,
    Swallow,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Chew => "chew",
            Label::Swallow => "swallow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start_s: f64,
    pub end_s: f64,
    pub label: Label,
}

impl Interval {
    pub fn center_s(&self) -> f64 {
        0.5 * (self.start_s + self.end_s)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnotationTrack {
    pub intervals: Vec<Interval>,
    pub source: Option<String>,
    pub tags: BTreeMap<String, String>,
}

impl AnnotationTrack {
    /// Validate and sort. Rejects empty or inverted intervals and overlaps
    /// between intervals of the same label.
    pub fn new(intervals: Vec<Interval>) -> Result<Self, EvalError> {
        let rows: Vec<(usize, Interval)> = intervals.into_iter().enumerate().map(|(i, iv)| (i + 1, iv)).collect();
        Self::from_rows(rows)
    }

    fn from_rows(mut rows: Vec<(usize, Interval)>) -> Result<Self, EvalError> {
        for (line, iv) in &rows {
            if !(iv.start_s.is_finite() && iv.end_s.is_finite() && iv.start_s >= 0.0 && iv.start_s < iv.end_s) {
                return Err(EvalError::Parse {
                    line: *line,
                    message: format!("invalid interval {}..{}", iv.start_s, iv.end_s),
                });
            }
        }
        rows.sort_by(|a, b| a.1.start_s.total_cmp(&b.1.start_s));
        for label in [Label::Chew, Label::Swallow] {
            let mut prev: Option<&(usize, Interval)> = None;
            for row in rows.iter().filter(|(_, iv)| iv.label == label) {
                if let Some(p) = prev {
                    if row.1.start_s < p.1.end_s {
                        return Err(EvalError::Overlap {
                            label: label.as_str(),
                            first_row: p.0.min(row.0),
                            second_row: p.0.max(row.0),
                        });
                    }
                }
                prev = Some(row);
            }
        }
        Ok(Self { intervals: rows.into_iter().map(|(_, iv)| iv).collect(), ..Default::default() })
    }

    pub fn parse_str(text: &str) -> Result<Self, EvalError> {
        let mut rows = Vec::new();
        let mut tags = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let row = raw.trim_end_matches('\r');
            if row.trim().is_empty() {
                continue;
            }
            if let Some(comment) = row.trim_start().strip_prefix('#') {
                if let Some((k, v)) = comment.split_once(':') {
                    let key = k.trim();
                    if !key.is_empty() && !key.contains(char::is_whitespace) {
                        tags.insert(key.to_string(), v.trim().to_string());
                    }
                }
                continue;
            }
            let cols: Vec<&str> = row.split('\t').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(EvalError::Parse {
                    line,
                    message: format!("expected 3 tab-separated fields, found {}", cols.len()),
                });
            }
            if cols == ["start_s", "end_s", "label"] {
                continue;
            }
            let num = |s: &str| {
                s.parse::<f64>().map_err(|_| EvalError::Parse { line, message: format!("bad number `{s}`") })
            };
            let (start_s, end_s) = (num(cols[0])?, num(cols[1])?);
            let label = match cols[2] {
                "chew" => Label::Chew,
                "swallow" => Label::Swallow,
                other => return Err(EvalError::UnknownLabel { line, label: other.to_string() }),
            };
            rows.push((line, Interval { start_s, end_s, label }));
        }
        let mut track = Self::from_rows(rows)?;
        track.tags = tags;
        Ok(track)
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EvalError::Io { path: path.display().to_string(), message: e.to_string() })?;
        let mut track = Self::parse_str(&text)?;
        track.source = Some(path.display().to_string());
        Ok(track)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.tags {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str("start_s\tend_s\tlabel\n");
        for iv in &self.intervals {
            let _ = writeln!(out, "{:.3}\t{:.3}\t{}", iv.start_s, iv.end_s, iv.label.as_str());
        }
        out
    }

    pub fn of(&self, label: Label) -> impl Iterator<Item = &Interval> {
        self.intervals.iter().filter(move |iv| iv.label == label)
    }

    pub fn count(&self, label: Label) -> usize {
        self.of(label).count()
    }

    /// Chew onsets, used for rate and interval bookkeeping.
    pub fn chew_onsets(&self) -> Vec<f64> {
        self.of(Label::Chew).map(|iv| iv.start_s).collect()
    }

    pub fn chew_centers(&self) -> Vec<f64> {
        self.of(Label::Chew).map(Interval::center_s).collect()
    }

    pub fn swallow_centers(&self) -> Vec<f64> {
        self.of(Label::Swallow).map(Interval::center_s).collect()
    }

    /// `duration_s` tag if present, else the end of the last interval.
    pub fn duration_s(&self) -> f64 {
        self.tags
            .get("duration_s")
            .and_then(|d| d.parse().ok())
            .unwrap_or_else(|| self.intervals.iter().map(|iv| iv.end_s).fold(0.0, f64::max))
    }

    /// Display name from tags, falling back to the source path.
    pub fn name(&self) -> String {
        let parts: Vec<&str> = ["participant", "environment", "session"]
            .iter()
            .filter_map(|k| self.tags.get(*k).map(String::as_str))
            .collect();
        if !parts.is_empty() {
            return parts.join(" ");
        }
        self.source.clone().unwrap_or_else(|| "track".to_string())
    }
}
