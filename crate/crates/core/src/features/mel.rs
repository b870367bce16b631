//! Log-mel filter bank features over a fixed-length candidate clip.
//!
//! 25 ms Hann window, 10 ms hop, 512-point FFT power spectrum, 128
//! triangular filters on the HTK mel scale spanning 0 Hz to Nyquist,
//! natural log with a 1e-10 floor. A 400 ms clip at 16 kHz yields 38 frames.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::config::SessionConfig;

pub const N_FFT: usize = 512;
pub const N_MELS: usize = 128;
pub const WINDOW_MS: u32 = 25;
pub const HOP_MS: u32 = 10;
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("wrong clip length: expected {expected} samples, got {got}")]
    WrongClipLength { expected: usize, got: usize },
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Edge frequencies of `n_mels` triangular filters: `n_mels + 2` points
/// evenly spaced in mel. Filter `m` peaks at `edges[m + 1]`.
pub fn mel_edges_hz(n_mels: usize, f_min: f64, f_max: f64) -> Vec<f64> {
    let lo = hz_to_mel(f_min);
    let hi = hz_to_mel(f_max);
    (0..n_mels + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_mels + 1) as f64))
        .collect()
}

/// Row-major `frames x bins` matrix of natural-log mel energies.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    pub frames: usize,
    pub bins: usize,
    pub values: Vec<f64>,
}

impl MelSpectrogram {
    pub fn get(&self, frame: usize, bin: usize) -> f64 {
        self.values[frame * self.bins + bin]
    }

    pub fn frame(&self, frame: usize) -> &[f64] {
        &self.values[frame * self.bins..(frame + 1) * self.bins]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.frames, self.bins)
    }
}

/// Short-time power spectra with a cached FFT plan.
pub struct Stft {
    window: Vec<f64>,
    hop: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Stft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stft").field("win", &self.window.len()).field("hop", &self.hop).finish()
    }
}

impl Stft {
    pub fn new(sample_rate_hz: u32) -> Self {
        let win = (sample_rate_hz * WINDOW_MS / 1000) as usize;
        let hop = (sample_rate_hz * HOP_MS / 1000) as usize;
        // Symmetric Hann.
        let window = (0..win)
            .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / (win - 1) as f64).cos())
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(N_FFT);
        Self { window, hop, fft }
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    pub fn n_frames(&self, len: usize) -> usize {
        if len < self.window.len() {
            0
        } else {
            (len - self.window.len()) / self.hop + 1
        }
    }

    /// Frame `index` of `samples`, windowed and zero-padded to `N_FFT`.
    pub fn windowed_frame(&self, samples: &[f32], index: usize) -> Vec<f64> {
        let start = index * self.hop;
        let mut out = vec![0.0; N_FFT];
        for (k, (dst, &w)) in out.iter_mut().zip(&self.window).enumerate() {
            *dst = samples[start + k] as f64 * w;
        }
        out
    }

    /// One-sided power spectrum (`N_FFT / 2 + 1` bins) of a padded frame.
    pub fn power_spectrum(&self, padded: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = padded.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.fft.process(&mut buf);
        buf[..N_FFT / 2 + 1].iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn power_frames(&self, samples: &[f32]) -> Vec<Vec<f64>> {
        (0..self.n_frames(samples.len()))
            .map(|i| self.power_spectrum(&self.windowed_frame(samples, i)))
            .collect()
    }
}

/// Reusable log-mel front end for one session configuration.
#[derive(Debug)]
pub struct MelExtractor {
    stft: Stft,
    /// `N_MELS` rows of `N_FFT / 2 + 1` weights.
    filters: Vec<Vec<f64>>,
    clip_samples: usize,
}

impl MelExtractor {
    pub fn new(config: &SessionConfig) -> Self {
        let sr = config.sample_rate_hz as f64;
        let edges = mel_edges_hz(N_MELS, 0.0, sr / 2.0);
        let n_bins = N_FFT / 2 + 1;
        let filters = (0..N_MELS)
            .map(|m| {
                let (lo, center, hi) = (edges[m], edges[m + 1], edges[m + 2]);
                (0..n_bins)
                    .map(|k| {
                        let f = k as f64 * sr / N_FFT as f64;
                        if f >= lo && f <= center {
                            (f - lo) / (center - lo)
                        } else if f > center && f <= hi {
                            (hi - f) / (hi - center)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        Self { stft: Stft::new(config.sample_rate_hz), filters, clip_samples: config.clip_samples() }
    }

    pub fn stft(&self) -> &Stft {
        &self.stft
    }

    pub fn filters(&self) -> &[Vec<f64>] {
        &self.filters
    }

    pub fn compute(&self, clip: &[f32]) -> Result<MelSpectrogram, FeatureError> {
        if clip.len() != self.clip_samples {
            return Err(FeatureError::WrongClipLength { expected: self.clip_samples, got: clip.len() });
        }
        let frames = self.stft.n_frames(clip.len());
        let mut values = Vec::with_capacity(frames * N_MELS);
        for power in self.stft.power_frames(clip) {
            for filter in &self.filters {
                let e: f64 = filter.iter().zip(&power).map(|(w, p)| w * p).sum();
                values.push(e.max(LOG_FLOOR).ln());
            }
        }
        Ok(MelSpectrogram { frames, bins: N_MELS, values })
    }
}

/// One-shot convenience around [`MelExtractor`].
pub fn log_mel(clip: &[f32], config: &SessionConfig) -> Result<MelSpectrogram, FeatureError> {
    MelExtractor::new(config).compute(clip)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip_of(f: impl Fn(usize) -> f32) -> Vec<f32> {
        (0..6400).map(f).collect()
    }

    #[test]
    fn shape_is_38_by_128() {
        let mel = log_mel(&clip_of(|i| ((i * 7919) % 200) as f32 / 100.0 - 1.0), &SessionConfig::default()).unwrap();
        assert_eq!(mel.shape(), (38, 128));
        assert_eq!(mel.values.len(), 38 * 128);
    }

    #[test]
    fn silence_is_uniform_floor() {
        let mel = log_mel(&vec![0.0; 6400], &SessionConfig::default()).unwrap();
        assert!(mel.values.iter().all(|&v| v == LOG_FLOOR.ln()));
    }

    #[test]
    fn wrong_length_rejected() {
        assert_eq!(
            log_mel(&vec![0.0; 6000], &SessionConfig::default()).unwrap_err(),
            FeatureError::WrongClipLength { expected: 6400, got: 6000 }
        );
    }

    #[test]
    fn mel_scale_round_trip() {
        for hz in [0.0, 100.0, 1000.0, 4000.0, 8000.0] {
            assert!((mel_to_hz(hz_to_mel(hz)) - hz).abs() < 1e-9);
        }
        // 1000 Hz is ~1000 mel on the HTK scale.
        assert!((hz_to_mel(1000.0) - 999.99).abs() < 0.01);
    }

    #[test]
    fn halving_amplitude_never_raises_a_cell() {
        let config = SessionConfig::default();
        let ex = MelExtractor::new(&config);
        let clip = clip_of(|i| (i as f32 * 0.37).sin() * 0.8);
        let half: Vec<f32> = clip.iter().map(|s| s * 0.5).collect();
        let a = ex.compute(&clip).unwrap();
        let b = ex.compute(&half).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!(y < x || *y == LOG_FLOOR.ln(), "{x} -> {y}");
        }
    }
}
