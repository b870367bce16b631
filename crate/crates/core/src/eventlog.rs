//! JSONL session event log.
//!
//! One record per line, keys in a fixed order, every float written with
//! three decimals and absent values as `null`. The first line is a header
//! carrying the schema tag. Parsing a log and rendering it again gives the
//! same bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;
use thiserror::Error;

use crate::intervention::{PromptEvent, SessionSummary};
use crate::pace::PaceEstimate;
use crate::timeline::{EventKind, IngestionEvent};

pub const SCHEMA: &str = "earpace-events/1";

#[derive(Debug, Error, PartialEq)]
pub enum EventLogError {
    #[error("record {index} at {time_s:.3} s precedes previous record at {previous_s:.3} s")]
    OutOfOrder { index: usize, time_s: f64, previous_s: f64 },
    #[error("first record must be the header")]
    MissingHeader,
    #[error("event log line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventLogRecord {
    Header {
        sample_rate_hz: u32,
        window_len_s: f64,
        rng_seed: u64,
        scorer: String,
    },
    Chew {
        time_s: f64,
        end_s: f64,
        segment: Option<u64>,
        confidence: f64,
    },
    Swallow {
        time_s: f64,
        confidence: f64,
        terminal: bool,
    },
    Prompt {
        time_s: f64,
        stage: String,
        prompt_id: String,
        family: String,
        length_class: String,
        duration_s: f64,
        text: String,
    },
    Pace {
        time_s: f64,
        window: u64,
        cps_last: Option<u32>,
        cps_smoothed: Option<f64>,
        cps_running: Option<f64>,
        chews_per_min: f64,
        total_chews: u64,
        total_swallows: u64,
    },
    Summary {
        time_s: f64,
        duration_s: f64,
        total_chews: u64,
        total_swallows: u64,
        mean_cps: Option<f64>,
        chews_per_min_mean: f64,
        prompts_delivered: u64,
        per_interval_cps: Vec<u32>,
    },
}

impl EventLogRecord {
    pub fn header(sample_rate_hz: u32, window_len_s: f64, rng_seed: u64, scorer: String) -> Self {
        Self::Header { sample_rate_hz, window_len_s, rng_seed, scorer }
    }

    /// `end_s` only matters for chews.
    pub fn event(e: &IngestionEvent, end_s: f64, terminal: bool) -> Self {
        match e.kind {
            EventKind::Chew => Self::Chew {
                time_s: e.time_s,
                end_s,
                segment: e.source_segment,
                confidence: e.confidence,
            },
            EventKind::Swallow => Self::Swallow { time_s: e.time_s, confidence: e.confidence, terminal },
        }
    }

    pub fn prompt(p: &PromptEvent) -> Self {
        Self::Prompt {
            time_s: p.time_s,
            stage: p.stage.as_str().to_string(),
            prompt_id: p.prompt_id.clone(),
            family: p.family.as_str().to_string(),
            length_class: p.length_class.as_str().to_string(),
            duration_s: p.nominal_duration_s,
            text: p.text.clone(),
        }
    }

    pub fn pace(window: u64, e: &PaceEstimate) -> Self {
        Self::Pace {
            time_s: e.as_of_s,
            window,
            cps_last: e.cps_last,
            cps_smoothed: e.cps_smoothed,
            cps_running: e.cps_running,
            chews_per_min: e.chews_per_min,
            total_chews: e.total_chews,
            total_swallows: e.total_swallows,
        }
    }

    pub fn summary(time_s: f64, s: &SessionSummary) -> Self {
        Self::Summary {
            time_s,
            duration_s: s.duration_s,
            total_chews: s.total_chews,
            total_swallows: s.total_swallows,
            mean_cps: s.mean_cps,
            chews_per_min_mean: s.chews_per_min_mean,
            prompts_delivered: s.prompts_delivered,
            per_interval_cps: s.per_interval_cps.clone(),
        }
    }

    pub fn time_s(&self) -> f64 {
        match self {
            Self::Header { .. } => 0.0,
            Self::Chew { time_s, .. }
            | Self::Swallow { time_s, .. }
            | Self::Prompt { time_s, .. }
            | Self::Pace { time_s, .. }
            | Self::Summary { time_s, .. } => *time_s,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Header { .. } => "header",
            Self::Chew { .. } => "chew",
            Self::Swallow { .. } => "swallow",
            Self::Prompt { .. } => "prompt",
            Self::Pace { .. } => "pace",
            Self::Summary { .. } => "summary",
        }
    }

    /// One JSON object, no trailing newline.
    pub fn render(&self) -> String {
        let mut out = format!("{{\"time_s\":{:.3},\"kind\":\"{}\"", self.time_s(), self.kind());
        let mut put = |key: &str, value: String| {
            let _ = write!(out, ",\"{key}\":{value}");
        };
        match self {
            Self::Header { sample_rate_hz, window_len_s, rng_seed, scorer } => {
                put("schema", string(SCHEMA));
                put("sample_rate_hz", sample_rate_hz.to_string());
                put("window_len_s", float(*window_len_s));
                put("rng_seed", rng_seed.to_string());
                put("scorer", string(scorer));
            }
            Self::Chew { end_s, segment, confidence, .. } => {
                put("end_s", float(*end_s));
                put("segment", segment.map_or("null".to_string(), |s| s.to_string()));
                put("confidence", float(*confidence));
            }
            Self::Swallow { confidence, terminal, .. } => {
                put("confidence", float(*confidence));
                put("terminal", terminal.to_string());
            }
            Self::Prompt { stage, prompt_id, family, length_class, duration_s, text, .. } => {
                put("stage", string(stage));
                put("id", string(prompt_id));
                put("family", string(family));
                put("length", string(length_class));
                put("duration_s", float(*duration_s));
                put("text", string(text));
            }
            Self::Pace {
                window,
                cps_last,
                cps_smoothed,
                cps_running,
                chews_per_min,
                total_chews,
                total_swallows,
                ..
            } => {
                put("window", window.to_string());
                put("cps_last", cps_last.map_or("null".to_string(), |c| c.to_string()));
                put("cps_smoothed", opt_float(*cps_smoothed));
                put("cps_running", opt_float(*cps_running));
                put("chews_per_min", float(*chews_per_min));
                put("total_chews", total_chews.to_string());
                put("total_swallows", total_swallows.to_string());
            }
            Self::Summary {
                duration_s,
                total_chews,
                total_swallows,
                mean_cps,
                chews_per_min_mean,
                prompts_delivered,
                per_interval_cps,
                ..
            } => {
                put("duration_s", float(*duration_s));
                put("total_chews", total_chews.to_string());
                put("total_swallows", total_swallows.to_string());
                put("mean_cps", opt_float(*mean_cps));
                put("chews_per_min_mean", float(*chews_per_min_mean));
                put("prompts_delivered", prompts_delivered.to_string());
                let list: Vec<String> = per_interval_cps.iter().map(|c| c.to_string()).collect();
                put("per_interval_cps", format!("[{}]", list.join(",")));
            }
        }
        out.push('}');
        out
    }

    pub fn parse(line: &str, line_no: usize) -> Result<Self, EventLogError> {
        let bad = |message: String| EventLogError::Parse { line: line_no, message };
        let v: Value = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        let field = |k: &str| v.get(k).ok_or_else(|| bad(format!("missing `{k}`")));
        let f = |k: &str| field(k)?.as_f64().ok_or_else(|| bad(format!("`{k}` is not a number")));
        let u = |k: &str| field(k)?.as_u64().ok_or_else(|| bad(format!("`{k}` is not an integer")));
        let s = |k: &str| field(k)?.as_str().map(str::to_string).ok_or_else(|| bad(format!("`{k}` is not a string")));
        let of = |k: &str| -> Result<Option<f64>, EventLogError> {
            let x = field(k)?;
            if x.is_null() {
                Ok(None)
            } else {
                x.as_f64().map(Some).ok_or_else(|| bad(format!("`{k}` is not a number")))
            }
        };
        let ou = |k: &str| -> Result<Option<u64>, EventLogError> {
            let x = field(k)?;
            if x.is_null() {
                Ok(None)
            } else {
                x.as_u64().map(Some).ok_or_else(|| bad(format!("`{k}` is not an integer")))
            }
        };
        let time_s = f("time_s")?;
        Ok(match s("kind")?.as_str() {
            "header" => {
                let schema = s("schema")?;
                if schema != SCHEMA {
                    return Err(bad(format!("unsupported schema `{schema}`")));
                }
                Self::Header {
                    sample_rate_hz: u("sample_rate_hz")? as u32,
                    window_len_s: f("window_len_s")?,
                    rng_seed: u("rng_seed")?,
                    scorer: s("scorer")?,
                }
            }
            "chew" => Self::Chew { time_s, end_s: f("end_s")?, segment: ou("segment")?, confidence: f("confidence")? },
            "swallow" => Self::Swallow {
                time_s,
                confidence: f("confidence")?,
                terminal: field("terminal")?.as_bool().ok_or_else(|| bad("`terminal` is not a bool".into()))?,
            },
            "prompt" => Self::Prompt {
                time_s,
                stage: s("stage")?,
                prompt_id: s("id")?,
                family: s("family")?,
                length_class: s("length")?,
                duration_s: f("duration_s")?,
                text: s("text")?,
            },
            "pace" => Self::Pace {
                time_s,
                window: u("window")?,
                cps_last: ou("cps_last")?.map(|c| c as u32),
                cps_smoothed: of("cps_smoothed")?,
                cps_running: of("cps_running")?,
                chews_per_min: f("chews_per_min")?,
                total_chews: u("total_chews")?,
                total_swallows: u("total_swallows")?,
            },
            "summary" => Self::Summary {
                time_s,
                duration_s: f("duration_s")?,
                total_chews: u("total_chews")?,
                total_swallows: u("total_swallows")?,
                mean_cps: of("mean_cps")?,
                chews_per_min_mean: f("chews_per_min_mean")?,
                prompts_delivered: u("prompts_delivered")?,
                per_interval_cps: field("per_interval_cps")?
                    .as_array()
                    .ok_or_else(|| bad("`per_interval_cps` is not a list".into()))?
                    .iter()
                    .map(|x| x.as_u64().map(|c| c as u32).ok_or_else(|| bad("bad interval count".into())))
                    .collect::<Result<_, _>>()?,
            },
            other => return Err(bad(format!("unknown kind `{other}`"))),
        })
    }
}

fn float(x: f64) -> String {
    format!("{x:.3}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map_or("null".to_string(), float)
}

fn string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// Header first, then nondecreasing times.
pub fn check_order(records: &[EventLogRecord]) -> Result<(), EventLogError> {
    if !matches!(records.first(), Some(EventLogRecord::Header { .. })) {
        return Err(EventLogError::MissingHeader);
    }
    let mut previous_s = 0.0;
    for (index, r) in records.iter().enumerate().skip(1) {
        // compare at log precision so rendering cannot reorder
        let t = r.time_s();
        if (t * 1000.0).round() < (previous_s * 1000.0f64).round() {
            return Err(EventLogError::OutOfOrder { index, time_s: t, previous_s });
        }
        previous_s = t;
    }
    Ok(())
}

pub fn render_event_log(records: &[EventLogRecord]) -> Result<String, EventLogError> {
    check_order(records)?;
    let mut out = String::new();
    for r in records {
        out.push_str(&r.render());
        out.push('\n');
    }
    Ok(out)
}

pub fn write_event_log(records: &[EventLogRecord], path: &Path) -> Result<(), EventLogError> {
    let text = render_event_log(records)?;
    std::fs::write(path, text).map_err(|e| EventLogError::Io { path: path.display().to_string(), message: e.to_string() })
}

pub fn parse_event_log(text: &str) -> Result<Vec<EventLogRecord>, EventLogError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| EventLogRecord::parse(l, i + 1))
        .collect()
}

pub fn read_event_log(path: &Path) -> Result<Vec<EventLogRecord>, EventLogError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| EventLogError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_event_log(&text)
}

/// Chew onsets recorded in a log.
pub fn chew_times(records: &[EventLogRecord]) -> Vec<f64> {
    records
        .iter()
        .filter_map(|r| match r {
            EventLogRecord::Chew { time_s, .. } => Some(*time_s),
            _ => None,
        })
        .collect()
}

/// Holds records until no later record can sort before them.
#[derive(Debug, Default)]
pub struct ReorderBuffer {
    pending: Vec<(f64, u64, EventLogRecord)>,
    seq: u64,
}

impl ReorderBuffer {
    pub fn push(&mut self, record: EventLogRecord) {
        self.pending.push((record.time_s(), self.seq, record));
        self.seq += 1;
    }

    /// Release every record with time at or below `horizon_s`, in order.
    pub fn release(&mut self, horizon_s: f64) -> Vec<EventLogRecord> {
        self.pending.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let n = self.pending.partition_point(|p| p.0 <= horizon_s);
        self.pending.drain(..n).map(|p| p.2).collect()
    }

    pub fn release_all(&mut self) -> Vec<EventLogRecord> {
        self.release(f64::INFINITY)
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<EventLogRecord> {
        vec![
            EventLogRecord::header(16000, 3.0, 7, "heuristic".into()),
            EventLogRecord::Chew { time_s: 1.0, end_s: 1.15, segment: Some(0), confidence: 0.91234 },
            EventLogRecord::Swallow { time_s: 2.2, confidence: 1.0, terminal: false },
        ]
    }

    #[test]
    fn two_events_two_lines_plus_header() {
        let text = render_event_log(&sample()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("{\"time_s\":0.000,\"kind\":\"header\",\"schema\":\"earpace-events/1\""));
        assert!(text.contains("{\"time_s\":1.000,\"kind\":\"chew\",\"end_s\":1.150,\"segment\":0,\"confidence\":0.912}"));
    }

    #[test]
    fn reparse_is_byte_identical() {
        let mut records = sample();
        records.push(EventLogRecord::Prompt {
            time_s: 3.0,
            stage: "in_meal".into(),
            prompt_id: "n\"1".into(),
            family: "gain_frame".into(),
            length_class: "short".into(),
            duration_s: 1.5,
            text: "Slow \u{e9}down.\n".into(),
        });
        records.push(EventLogRecord::Pace {
            time_s: 3.0,
            window: 0,
            cps_last: None,
            cps_smoothed: Some(12.5),
            cps_running: None,
            chews_per_min: 40.0,
            total_chews: 2,
            total_swallows: 1,
        });
        records.push(EventLogRecord::Summary {
            time_s: 4.0,
            duration_s: 4.0,
            total_chews: 2,
            total_swallows: 1,
            mean_cps: None,
            chews_per_min_mean: 30.0,
            prompts_delivered: 1,
            per_interval_cps: vec![1, 1],
        });
        let text = render_event_log(&records).unwrap();
        let back = parse_event_log(&text).unwrap();
        assert_eq!(render_event_log(&back).unwrap(), text);
    }

    #[test]
    fn out_of_order_rejected() {
        let mut records = sample();
        records.swap(1, 2);
        assert!(matches!(render_event_log(&records), Err(EventLogError::OutOfOrder { index: 2, .. })));
        assert_eq!(render_event_log(&records[1..]), Err(EventLogError::MissingHeader));
    }

    #[test]
    fn reorder_buffer_holds_until_horizon() {
        let mut buf = ReorderBuffer::default();
        buf.push(EventLogRecord::Swallow { time_s: 2.0, confidence: 1.0, terminal: false });
        buf.push(EventLogRecord::Chew { time_s: 1.0, end_s: 1.1, segment: None, confidence: 1.0 });
        let out = buf.release(1.5);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].kind(), "chew");
        assert_eq!(buf.len(), 1);
        assert_eq!(buf.release_all()[0].kind(), "swallow");
    }
}
