//! Session configuration and its flat `key = value` file format.

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// The only capture rate the pipeline accepts.
pub const SAMPLE_RATE_HZ: u32 = 16_000;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("reading config {path}: {message}")]
    Io { path: String, message: String },
}

/// All tunables of one session. Durations in `_ms` fields are integer
/// milliseconds, `_s` fields are seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub sample_rate_hz: u32,
    pub frame_len_ms: u32,
    /// Frame activity threshold in dBFS.
    pub energy_threshold_db: f64,
    pub min_segment_ms: u32,
    pub max_segment_ms: u32,
    pub silence_tolerance_ms: u32,
    pub clip_len_ms: u32,
    pub classifier_threshold: f64,
    pub swallow_abs_gap_s: f64,
    pub swallow_rel_factor: f64,
    pub cps_trigger_threshold: f64,
    /// Number of most recent closed intervals averaged for the trigger.
    pub cps_smoothing_intervals: usize,
    /// Swallows required before any in-meal prompt may fire.
    pub warmup_swallows: u32,
    /// Reference chew count used when instantiating progress prompts.
    pub chew_goal: u32,
    pub min_prompt_interval_s: f64,
    pub window_len_s: f64,
    pub rng_seed: u64,
    /// `None` selects the bundled default library.
    pub prompt_library_path: Option<PathBuf>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: SAMPLE_RATE_HZ,
            frame_len_ms: 50,
            energy_threshold_db: -40.0,
            min_segment_ms: 100,
            max_segment_ms: 400,
            silence_tolerance_ms: 150,
            clip_len_ms: 400,
            classifier_threshold: 0.5,
            swallow_abs_gap_s: 0.8,
            swallow_rel_factor: 1.5,
            cps_trigger_threshold: 20.0,
            cps_smoothing_intervals: 2,
            warmup_swallows: 2,
            chew_goal: 25,
            min_prompt_interval_s: 30.0,
            window_len_s: 3.0,
            rng_seed: 0,
            prompt_library_path: None,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: &str| Err(ConfigError::Invalid(msg.to_string()));
        if self.sample_rate_hz != SAMPLE_RATE_HZ {
            return fail("sample_rate_hz must be 16000");
        }
        for (name, v) in [
            ("frame_len_ms", self.frame_len_ms),
            ("min_segment_ms", self.min_segment_ms),
            ("max_segment_ms", self.max_segment_ms),
            ("silence_tolerance_ms", self.silence_tolerance_ms),
            ("clip_len_ms", self.clip_len_ms),
        ] {
            if v == 0 {
                return Err(ConfigError::Invalid(format!("{name} must be > 0")));
            }
        }
        if (self.sample_rate_hz as u64 * self.frame_len_ms as u64) % 1000 != 0 {
            return fail("frame_len_ms must span a whole number of samples");
        }
        if self.min_segment_ms >= self.max_segment_ms {
            return Err(ConfigError::Invalid(format!(
                "min_segment_ms ({}) must be < max_segment_ms ({})",
                self.min_segment_ms, self.max_segment_ms
            )));
        }
        if self.max_segment_ms > self.clip_len_ms {
            return Err(ConfigError::Invalid(format!(
                "max_segment_ms ({}) must be <= clip_len_ms ({})",
                self.max_segment_ms, self.clip_len_ms
            )));
        }
        if self.clip_len_ms < 25 {
            return fail("clip_len_ms must cover at least one 25 ms analysis window");
        }
        if !(self.swallow_abs_gap_s > 0.0) {
            return fail("swallow_abs_gap_s must be > 0");
        }
        if !(self.swallow_rel_factor > 1.0) {
            return fail("swallow_rel_factor must be > 1");
        }
        if !(self.min_prompt_interval_s > 0.0) {
            return fail("min_prompt_interval_s must be > 0");
        }
        if !(0.0..=1.0).contains(&self.classifier_threshold) {
            return fail("classifier_threshold must be within [0, 1]");
        }
        if !self.energy_threshold_db.is_finite() {
            return fail("energy_threshold_db must be finite");
        }
        if !(self.cps_trigger_threshold > 0.0) {
            return fail("cps_trigger_threshold must be > 0");
        }
        if self.cps_smoothing_intervals == 0 {
            return fail("cps_smoothing_intervals must be >= 1");
        }
        if !(self.window_len_s > 0.0) {
            return fail("window_len_s must be > 0");
        }
        let window_samples = self.window_len_s * self.sample_rate_hz as f64;
        if window_samples.fract() != 0.0
            || (window_samples as usize) % self.frame_samples() != 0
        {
            return fail("window_len_s must be a whole number of frames");
        }
        Ok(())
    }

    pub fn frame_samples(&self) -> usize {
        (self.sample_rate_hz as usize * self.frame_len_ms as usize) / 1000
    }

    pub fn clip_samples(&self) -> usize {
        (self.sample_rate_hz as usize * self.clip_len_ms as usize) / 1000
    }

    pub fn window_samples(&self) -> usize {
        (self.window_len_s * self.sample_rate_hz as f64).round() as usize
    }

    /// Apply one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
            v.parse::<T>().map_err(|_| format!("cannot parse `{v}`"))
        }
        match key {
            "sample_rate_hz" => self.sample_rate_hz = num(value)?,
            "frame_len_ms" => self.frame_len_ms = num(value)?,
            "energy_threshold_db" => self.energy_threshold_db = num(value)?,
            "min_segment_ms" => self.min_segment_ms = num(value)?,
            "max_segment_ms" => self.max_segment_ms = num(value)?,
            "silence_tolerance_ms" => self.silence_tolerance_ms = num(value)?,
            "clip_len_ms" => self.clip_len_ms = num(value)?,
            "classifier_threshold" => self.classifier_threshold = num(value)?,
            "swallow_abs_gap_s" => self.swallow_abs_gap_s = num(value)?,
            "swallow_rel_factor" => self.swallow_rel_factor = num(value)?,
            "cps_trigger_threshold" => self.cps_trigger_threshold = num(value)?,
            "cps_smoothing_intervals" => self.cps_smoothing_intervals = num(value)?,
            "warmup_swallows" => self.warmup_swallows = num(value)?,
            "chew_goal" => self.chew_goal = num(value)?,
            "min_prompt_interval_s" => self.min_prompt_interval_s = num(value)?,
            "window_len_s" => self.window_len_s = num(value)?,
            "rng_seed" => self.rng_seed = num(value)?,
            "prompt_library_path" => {
                self.prompt_library_path = if value.is_empty() {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Parse a flat `key = value` text on top of the defaults.
    /// Blank lines and `#` comments are ignored.
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        for (line, key, value) in key_values(text)? {
            config.set(&key, &value).map_err(|message| {
                if message.starts_with("unknown key") {
                    ConfigError::UnknownKey { line, key: key.clone() }
                } else {
                    ConfigError::Parse { line, message }
                }
            })?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse_str(&text)
    }
}

impl fmt::Display for SessionConfig {
    /// Renders in the same `key = value` format `parse_str` reads.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sample_rate_hz = {}", self.sample_rate_hz)?;
        writeln!(f, "frame_len_ms = {}", self.frame_len_ms)?;
        writeln!(f, "energy_threshold_db = {}", self.energy_threshold_db)?;
        writeln!(f, "min_segment_ms = {}", self.min_segment_ms)?;
        writeln!(f, "max_segment_ms = {}", self.max_segment_ms)?;
        writeln!(f, "silence_tolerance_ms = {}", self.silence_tolerance_ms)?;
        writeln!(f, "clip_len_ms = {}", self.clip_len_ms)?;
        writeln!(f, "classifier_threshold = {}", self.classifier_threshold)?;
        writeln!(f, "swallow_abs_gap_s = {}", self.swallow_abs_gap_s)?;
        writeln!(f, "swallow_rel_factor = {}", self.swallow_rel_factor)?;
        writeln!(f, "cps_trigger_threshold = {}", self.cps_trigger_threshold)?;
        writeln!(f, "cps_smoothing_intervals = {}", self.cps_smoothing_intervals)?;
        writeln!(f, "warmup_swallows = {}", self.warmup_swallows)?;
        writeln!(f, "chew_goal = {}", self.chew_goal)?;
        writeln!(f, "min_prompt_interval_s = {}", self.min_prompt_interval_s)?;
        writeln!(f, "window_len_s = {}", self.window_len_s)?;
        writeln!(f, "rng_seed = {}", self.rng_seed)?;
        let lib = self
            .prompt_library_path
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_default();
        writeln!(f, "prompt_library_path = {lib}")
    }
}

/// Split a `key = value` document into `(line_no, key, value)` triples.
pub(crate) fn key_values(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Parse {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}
