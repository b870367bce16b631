//! Prompt catalog loaded from a tab-separated text table.
//!
//! Grammar, one record per line (UTF-8, `#` comments and blank lines
//! ignored):
//!
//! ```text
//! id <TAB> family <TAB> length_class <TAB> nominal_duration_s <TAB> text
//! ```
//!
//! `family` is one of `pre_meal_goal`, `system1_nudge`,
//! `control_theory_progress`, `gain_frame`; `length_class` is `short`,
//! `medium` or `long`. Durations must sit inside their class band.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

pub const REMAINING_CHEWS: &str = "{remaining_chews}";

const DEFAULT_LIBRARY: &str = include_str!("../../assets/default_prompts.tsv");

#[derive(Debug, Error, PartialEq)]
pub enum LibraryError {
    #[error("prompt library line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("prompt library lacks a {length} prompt for family {family}")]
    MissingFamilyCoverage { family: PromptFamily, length: LengthClass },
    #[error("prompt library has no pre-meal goal prompt")]
    MissingPreMealGoal,
    #[error("reading prompt library {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PromptFamily {
    System1Nudge,
    ControlTheoryProgress,
    GainFrame,
    PreMealGoal,
}

impl PromptFamily {
    pub const IN_MEAL: [PromptFamily; 3] =
        [PromptFamily::System1Nudge, PromptFamily::ControlTheoryProgress, PromptFamily::GainFrame];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptFamily::System1Nudge => "system1_nudge",
            PromptFamily::ControlTheoryProgress => "control_theory_progress",
            PromptFamily::GainFrame => "gain_frame",
            PromptFamily::PreMealGoal => "pre_meal_goal",
        }
    }
}

impl fmt::Display for PromptFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptFamily {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "system1_nudge" => Ok(Self::System1Nudge),
            "control_theory_progress" => Ok(Self::ControlTheoryProgress),
            "gain_frame" => Ok(Self::GainFrame),
            "pre_meal_goal" => Ok(Self::PreMealGoal),
            _ => Err(format!("unknown family `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LengthClass {
    Short,
    Medium,
    Long,
}

impl LengthClass {
    pub const ALL: [LengthClass; 3] = [LengthClass::Short, LengthClass::Medium, LengthClass::Long];

    pub fn as_str(self) -> &'static str {
        match self {
            LengthClass::Short => "short",
            LengthClass::Medium => "medium",
            LengthClass::Long => "long",
        }
    }

    /// Single-letter code used in sequencing checks.
    pub fn code(self) -> char {
        match self {
            LengthClass::Short => 'S',
            LengthClass::Medium => 'M',
            LengthClass::Long => 'L',
        }
    }

    /// Inclusive duration band in seconds.
    pub fn band_s(self) -> (f64, f64) {
        match self {
            LengthClass::Short => (1.0, 2.0),
            LengthClass::Medium => (2.0, 3.0),
            LengthClass::Long => (3.0, 10.0),
        }
    }
}

impl fmt::Display for LengthClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LengthClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "short" => Ok(Self::Short),
            "medium" => Ok(Self::Medium),
            "long" => Ok(Self::Long),
            _ => Err(format!("unknown length class `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prompt {
    pub id: String,
    pub family: PromptFamily,
    pub length_class: LengthClass,
    pub nominal_duration_s: f64,
    pub text: String,
}

impl Prompt {
    pub fn render(&self, remaining_chews: u32) -> String {
        self.text.replace(REMAINING_CHEWS, &remaining_chews.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptLibrary {
    prompts: Vec<Prompt>,
}

impl PromptLibrary {
    pub fn bundled() -> Self {
        Self::parse_str(DEFAULT_LIBRARY).expect("bundled prompt library is valid")
    }

    pub fn load(path: &Path) -> Result<Self, LibraryError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LibraryError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self, LibraryError> {
        let mut prompts = Vec::new();
        let mut ids = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
                continue;
            }
            let err = |message: String| LibraryError::Parse { line, message };
            let cols: Vec<&str> = trimmed.split('\t').collect();
            if cols.len() != 5 {
                return Err(err(format!("expected 5 tab-separated fields, found {}", cols.len())));
            }
            let id = cols[0].trim().to_string();
            if id.is_empty() {
                return Err(err("empty id".into()));
            }
            if !ids.insert(id.clone()) {
                return Err(err(format!("duplicate id `{id}`")));
            }
            let family: PromptFamily = cols[1].trim().parse().map_err(err)?;
            let length_class: LengthClass = cols[2].trim().parse().map_err(err)?;
            let nominal_duration_s: f64 = cols[3]
                .trim()
                .parse()
                .map_err(|_| err(format!("bad duration `{}`", cols[3])))?;
            let (lo, hi) = length_class.band_s();
            if !(lo..=hi).contains(&nominal_duration_s) {
                return Err(err(format!(
                    "duration {nominal_duration_s} s outside the {length_class} band [{lo}, {hi}]"
                )));
            }
            let text = cols[4].trim().to_string();
            if text.is_empty() {
                return Err(err("empty text".into()));
            }
            if family == PromptFamily::ControlTheoryProgress && !text.contains(REMAINING_CHEWS) {
                return Err(err(format!("progress prompt lacks {REMAINING_CHEWS}")));
            }
            prompts.push(Prompt { id, family, length_class, nominal_duration_s, text });
        }
        let library = Self { prompts };
        library.check_coverage()?;
        Ok(library)
    }

    fn check_coverage(&self) -> Result<(), LibraryError> {
        if self.select(PromptFamily::PreMealGoal, None).is_empty() {
            return Err(LibraryError::MissingPreMealGoal);
        }
        for family in PromptFamily::IN_MEAL {
            for length in LengthClass::ALL {
                if self.select(family, Some(length)).is_empty() {
                    return Err(LibraryError::MissingFamilyCoverage { family, length });
                }
            }
        }
        Ok(())
    }

    pub fn prompts(&self) -> &[Prompt] {
        &self.prompts
    }

    pub fn select(&self, family: PromptFamily, length: Option<LengthClass>) -> Vec<&Prompt> {
        self.prompts
            .iter()
            .filter(|p| p.family == family && length.is_none_or(|l| p.length_class == l))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_covers_in_meal_families() {
        let lib = PromptLibrary::bundled();
        for family in PromptFamily::IN_MEAL {
            for length in LengthClass::ALL {
                assert!(!lib.select(family, Some(length)).is_empty());
            }
        }
        let goals = lib.select(PromptFamily::PreMealGoal, None);
        assert_eq!(goals.len(), 1);
        assert!(goals[0].text.contains("Aim for at least 25 chews"));
    }

    #[test]
    fn missing_long_prompt_is_reported() {
        let text: String = PromptLibrary::bundled()
            .prompts()
            .iter()
            .filter(|p| !(p.family == PromptFamily::GainFrame && p.length_class == LengthClass::Long))
            .map(|p| format!("{}\t{}\t{}\t{}\t{}\n", p.id, p.family, p.length_class, p.nominal_duration_s, p.text))
            .collect();
        assert_eq!(
            PromptLibrary::parse_str(&text).unwrap_err(),
            LibraryError::MissingFamilyCoverage { family: PromptFamily::GainFrame, length: LengthClass::Long }
        );
    }

    #[test]
    fn malformed_rows_report_line() {
        let err = PromptLibrary::parse_str("# header\n\nbad row without tabs\n").unwrap_err();
        assert!(matches!(err, LibraryError::Parse { line: 3, .. }), "{err}");
        let err = PromptLibrary::parse_str("a\tgain_frame\tshort\t9.0\tHi\n").unwrap_err();
        assert!(matches!(err, LibraryError::Parse { line: 1, .. }));
        let err = PromptLibrary::parse_str("a\tcontrol_theory_progress\tshort\t1.0\tHi\n").unwrap_err();
        assert!(err.to_string().contains("remaining_chews"));
        let err = PromptLibrary::parse_str("a\tbite\tshort\t1.0\tHi\n").unwrap_err();
        assert!(err.to_string().contains("unknown family"));
    }

    #[test]
    fn render_fills_placeholder() {
        let p = Prompt {
            id: "x".into(),
            family: PromptFamily::ControlTheoryProgress,
            length_class: LengthClass::Long,
            nominal_duration_s: 7.0,
            text: "You are {remaining_chews} chews away.".into(),
        };
        assert_eq!(p.render(7), "You are 7 chews away.");
    }
}
