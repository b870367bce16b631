use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::library::{LengthClass, Prompt, PromptFamily, PromptLibrary};
use crate::config::SessionConfig;
use crate::pace::PaceEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptStage {
    PreMeal,
    InMeal,
}

impl PromptStage {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptStage::PreMeal => "pre_meal",
            PromptStage::InMeal => "in_meal",
        }
    }
}

/// A delivered prompt. Playback is represented only by its nominal length.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptEvent {
    pub time_s: f64,
    pub stage: PromptStage,
    pub prompt_id: String,
    pub family: PromptFamily,
    pub length_class: LengthClass,
    pub nominal_duration_s: f64,
    pub text: String,
}

impl PromptEvent {
    fn from_prompt(p: &Prompt, time_s: f64, stage: PromptStage, remaining_chews: u32) -> Self {
        Self {
            time_s,
            stage,
            prompt_id: p.id.clone(),
            family: p.family,
            length_class: p.length_class,
            nominal_duration_s: p.nominal_duration_s,
            text: p.render(remaining_chews),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CyclePhase {
    Shorts,
    Tail,
}

/// In-meal delivery state. Each cycle plays 2 to 4 short prompts followed
/// by one medium or long prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    pub last_prompt_time_s: Option<f64>,
    pub shorts_remaining_in_cycle: u8,
    pub cycle_phase: CyclePhase,
    pub prompts_delivered: u32,
    rng: ChaCha8Rng,
}

impl PolicyState {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shorts = rng.random_range(2..=4u8);
        Self {
            last_prompt_time_s: None,
            shorts_remaining_in_cycle: shorts,
            cycle_phase: CyclePhase::Shorts,
            prompts_delivered: 0,
            rng,
        }
    }

    pub fn cooldown_elapsed(&self, now_s: f64, config: &SessionConfig) -> bool {
        self.last_prompt_time_s.is_none_or(|t| now_s - t >= config.min_prompt_interval_s)
    }

    /// True when smoothed pace is below threshold, warm-up is over and the
    /// cooldown has run out.
    pub fn evaluate_trigger(&self, pace: &PaceEstimate, now_s: f64, config: &SessionConfig) -> bool {
        pace.cps_smoothed.is_some_and(|cps| cps < config.cps_trigger_threshold)
            && pace.total_swallows >= config.warmup_swallows as u64
            && self.cooldown_elapsed(now_s, config)
    }

    /// Uniform pick among pre-meal goals at t = 0. Leaves the cooldown
    /// clock untouched.
    pub fn pre_meal_prompt(&mut self, library: &PromptLibrary, config: &SessionConfig) -> PromptEvent {
        let goals = library.select(PromptFamily::PreMealGoal, None);
        let p = goals[self.rng.random_range(0..goals.len())];
        PromptEvent::from_prompt(p, 0.0, PromptStage::PreMeal, config.chew_goal)
    }

    /// Emit the next in-meal prompt of the current cycle.
    pub fn next_prompt(
        &mut self,
        library: &PromptLibrary,
        pace: &PaceEstimate,
        now_s: f64,
        config: &SessionConfig,
    ) -> PromptEvent {
        let length = match self.cycle_phase {
            CyclePhase::Shorts => {
                self.shorts_remaining_in_cycle = self.shorts_remaining_in_cycle.saturating_sub(1);
                if self.shorts_remaining_in_cycle == 0 {
                    self.cycle_phase = CyclePhase::Tail;
                }
                LengthClass::Short
            }
            CyclePhase::Tail => {
                let length = if self.rng.random_bool(0.5) { LengthClass::Medium } else { LengthClass::Long };
                self.cycle_phase = CyclePhase::Shorts;
                self.shorts_remaining_in_cycle = self.rng.random_range(2..=4u8);
                length
            }
        };
        let family = PromptFamily::IN_MEAL[self.rng.random_range(0..PromptFamily::IN_MEAL.len())];
        let pool = library.select(family, Some(length));
        let prompt = pool[self.rng.random_range(0..pool.len())];
        let remaining = config.chew_goal.saturating_sub(pace.cps_last.unwrap_or(0));
        self.last_prompt_time_s = Some(now_s);
        self.prompts_delivered += 1;
        PromptEvent::from_prompt(prompt, now_s, PromptStage::InMeal, remaining)
    }

    /// Trigger check and delivery in one call.
    pub fn maybe_prompt(
        &mut self,
        library: &PromptLibrary,
        pace: &PaceEstimate,
        now_s: f64,
        config: &SessionConfig,
    ) -> Option<PromptEvent> {
        self.evaluate_trigger(pace, now_s, config)
            .then(|| self.next_prompt(library, pace, now_s, config))
    }
}

/// Checks that a length-class code string is a prefix of `(S{2,4}(M|L))*`.
pub fn matches_cycle_grammar(codes: &str) -> bool {
    let mut shorts = 0;
    for c in codes.chars() {
        match c {
            'S' if shorts < 4 => shorts += 1,
            'M' | 'L' if shorts >= 2 => shorts = 0,
            _ => return false,
        }
    }
    true
}
