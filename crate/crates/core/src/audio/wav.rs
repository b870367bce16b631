//! 16 kHz mono PCM16 WAV input and output.

use std::path::Path;

use thiserror::Error;

use crate::config::SAMPLE_RATE_HZ;

#[derive(Debug, Error)]
pub enum WavError {
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("wav {path}: {message}")]
    Io { path: String, message: String },
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> WavError {
    WavError::Io { path: path.display().to_string(), message: e.to_string() }
}

/// Read raw PCM16 samples. Rejects anything other than 16 kHz, mono,
/// 16-bit integer PCM; every mismatching field is named in the error.
pub fn read_wav_i16(path: &Path) -> Result<Vec<i16>, WavError> {
    let reader = hound::WavReader::open(path).map_err(|e| io_err(path, e))?;
    let spec = reader.spec();
    let mut problems = Vec::new();
    if spec.sample_rate != SAMPLE_RATE_HZ {
        problems.push(format!("sample rate {} Hz (need {SAMPLE_RATE_HZ})", spec.sample_rate));
    }
    if spec.channels != 1 {
        problems.push(format!("{} channels (need 1)", spec.channels));
    }
    if spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        problems.push(format!("{}-bit {:?} samples (need 16-bit integer)", spec.bits_per_sample, spec.sample_format));
    }
    if !problems.is_empty() {
        return Err(WavError::UnsupportedFormat(problems.join(", ")));
    }
    reader.into_samples::<i16>().collect::<Result<_, _>>().map_err(|e| io_err(path, e))
}

pub fn pcm_to_f32(sample: i16) -> f32 {
    sample as f32 / 32768.0
}

/// Samples normalized to [-1, 1] by dividing by 32768.
pub fn read_wav(path: &Path) -> Result<Vec<f32>, WavError> {
    Ok(read_wav_i16(path)?.into_iter().map(pcm_to_f32).collect())
}

pub fn f32_to_pcm(sample: f32) -> i16 {
    (sample.clamp(-1.0, 1.0) * 32767.0).round() as i16
}

pub fn write_wav(path: &Path, samples: &[f32]) -> Result<(), WavError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: SAMPLE_RATE_HZ,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| io_err(path, e))?;
    for &s in samples {
        writer.write_sample(f32_to_pcm(s)).map_err(|e| io_err(path, e))?;
    }
    writer.finalize().map_err(|e| io_err(path, e))
}
