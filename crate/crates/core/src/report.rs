//! Plain-text and CSV renderings of the post-meal summary and timings.

use std::fmt::Write as _;
use std::time::Duration;

use crate::intervention::SessionSummary;

pub fn summary_text(s: &SessionSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "meal summary");
    let _ = writeln!(out, "  duration        {:.1} s", s.duration_s);
    let _ = writeln!(out, "  chews           {}", s.total_chews);
    let _ = writeln!(out, "  swallows        {}", s.total_swallows);
    match s.mean_cps {
        Some(c) => {
            let _ = writeln!(out, "  chews/swallow   {c:.2}");
        }
        None => {
            let _ = writeln!(out, "  chews/swallow   n/a");
        }
    }
    let _ = writeln!(out, "  chews/minute    {:.2}", s.chews_per_min_mean);
    let _ = writeln!(out, "  prompts         {}", s.prompts_delivered);
    if !s.per_interval_cps.is_empty() {
        let cells: Vec<String> = s.per_interval_cps.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "  per swallow     {}", cells.join(" "));
    }
    out
}

pub fn summary_csv(s: &SessionSummary) -> String {
    let cells: Vec<String> = s.per_interval_cps.iter().map(|c| c.to_string()).collect();
    format!(
        "duration_s,total_chews,total_swallows,mean_cps,chews_per_min_mean,prompts_delivered,per_interval_cps\n\
         {:.3},{},{},{},{:.3},{},{}\n",
        s.duration_s,
        s.total_chews,
        s.total_swallows,
        s.mean_cps.map_or_else(String::new, |c| format!("{c:.3}")),
        s.chews_per_min_mean,
        s.prompts_delivered,
        cells.join(";")
    )
}

pub fn timing_text(windows: &[Duration]) -> String {
    let ms: Vec<f64> = windows.iter().map(|d| d.as_secs_f64() * 1000.0).collect();
    if ms.is_empty() {
        return "windows 0\n".to_string();
    }
    let mean = ms.iter().sum::<f64>() / ms.len() as f64;
    let max = ms.iter().cloned().fold(0.0, f64::max);
    format!("windows {}\nmean_ms {mean:.3}\nmax_ms {max:.3}\n", ms.len())
}
