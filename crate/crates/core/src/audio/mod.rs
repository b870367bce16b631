//! Audio in and out: WAV files, raw PCM streams and synthetic meals.

mod synth;
mod wav;

pub use synth::{render_burst, synth_meal, BurstTemplate, PlantedBurst, SynthMeal, SynthMealSpec, MIN_SILENCE_S};
pub use wav::{f32_to_pcm, pcm_to_f32, read_wav, read_wav_i16, write_wav, WavError};
