//! Seeded synthetic source signals so the full bench runs without any
//! external audio: harmonic "speech-like" stacks with on/off temporal
//! envelopes, and colored-noise bursts with the same segmentation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::Scalar;
use crate::sigio::TimeSignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    /// Harmonic stack with per-source fundamental, vibrato, segment envelopes
    /// and a low noise floor.
    SpeechLike,
    /// One-pole lowpassed white noise under the same segment envelopes.
    ColoredNoise,
}

/// RMS level every pool source is normalized to before mixing.
pub const SOURCE_RMS: f64 = 0.1;

/// ChaCha12 stream namespace for source synthesis (scene draws use streams
/// 0..scene_count, geometry uses its own namespace).
pub const STREAM_SOURCES: u64 = 1 << 40;

/// Deterministically synthesizes `count` sources of `duration_s` seconds.
/// Source `i` reads stream `STREAM_SOURCES + i` of the seed, so pools are
/// reproducible element-wise.
pub fn synthesize_pool<T: Scalar>(
    count: usize,
    duration_s: f64,
    sample_rate_hz: u32,
    kind: SyntheticKind,
    seed: u64,
) -> Result<Vec<TimeSignal<T>>> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(STREAM_SOURCES + i as u64);
            let len = (duration_s * sample_rate_hz as f64).round() as usize;
            let mut samples = match kind {
                SyntheticKind::SpeechLike => speech_like(&mut rng, len, sample_rate_hz),
                SyntheticKind::ColoredNoise => colored_noise(&mut rng, len, sample_rate_hz),
            };
            normalize_rms(&mut samples, SOURCE_RMS);
            TimeSignal::new(samples.into_iter().map(T::of).collect(), sample_rate_hz)
        })
        .collect()
}

fn normalize_rms(samples: &mut [f64], target: f64) {
    let energy: f64 = samples.iter().map(|v| v * v).sum();
    let rms = (energy / samples.len() as f64).sqrt();
    if rms > 0.0 {
        let scale = target / rms;
        for v in samples.iter_mut() {
            *v *= scale;
        }
    }
}

/// Alternating voiced/pause segments. Voiced segments carry a harmonic stack
/// on a per-source fundamental with mild vibrato and jitter; pauses are
/// silent. Segment edges get 20 ms raised-cosine ramps.
fn speech_like<R: Rng>(rng: &mut R, len: usize, fs: u32) -> Vec<f64> {
    let fs_f = fs as f64;
    let f0_base: f64 = rng.gen_range(90.0..280.0);
    let vibrato_hz: f64 = rng.gen_range(3.5..6.5);
    let vibrato_phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut out = vec![0.0f64; len];
    let mut pos = 0usize;
    let ramp = (0.02 * fs_f) as usize;

    while pos < len {
        let voiced = rng.gen_bool(0.6);
        let seg_s: f64 = if voiced {
            rng.gen_range(0.15..0.4)
        } else {
            rng.gen_range(0.05..0.25)
        };
        let seg_len = ((seg_s * fs_f) as usize).min(len - pos).max(1);
        if voiced {
            let f0 = f0_base * rng.gen_range(0.9..1.1);
            let nyquist_guard = 0.45 * fs_f;
            let num_harmonics = ((nyquist_guard / f0) as usize).max(1);
            let amps: Vec<f64> = (1..=num_harmonics)
                .map(|h| rng.gen_range(0.8..1.2) / (h as f64).powf(0.9))
                .collect();
            let phases: Vec<f64> = (0..num_harmonics)
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect();
            for i in 0..seg_len {
                let t = (pos + i) as f64 / fs_f;
                let vib = 1.0 + 0.02 * (std::f64::consts::TAU * vibrato_hz * t + vibrato_phase).sin();
                let mut v = 0.0;
                for (h, (&a, &p)) in amps.iter().zip(phases.iter()).enumerate() {
                    v += a * (std::f64::consts::TAU * (h + 1) as f64 * f0 * vib * t + p).sin();
                }
                // Low noise floor keeps spectra from being exactly sparse.
                v += 0.02 * (rng.gen::<f64>() - 0.5);
                let env = edge_ramp(i, seg_len, ramp);
                out[pos + i] = env * v;
            }
        }
        pos += seg_len;
    }
    out
}

fn colored_noise<R: Rng>(rng: &mut R, len: usize, fs: u32) -> Vec<f64> {
    let fs_f = fs as f64;
    let pole: f64 = rng.gen_range(0.85..0.97);
    let mut out = vec![0.0f64; len];
    let mut state = 0.0f64;
    let mut pos = 0usize;
    let ramp = (0.02 * fs_f) as usize;
    while pos < len {
        let active = rng.gen_bool(0.6);
        let seg_s: f64 = rng.gen_range(0.1..0.35);
        let seg_len = ((seg_s * fs_f) as usize).min(len - pos).max(1);
        for i in 0..seg_len {
            let white = 2.0 * rng.gen::<f64>() - 1.0;
            state = pole * state + (1.0 - pole) * white;
            if active {
                out[pos + i] = edge_ramp(i, seg_len, ramp) * state;
            }
        }
        pos += seg_len;
    }
    out
}

fn edge_ramp(i: usize, seg_len: usize, ramp: usize) -> f64 {
    let ramp = ramp.min(seg_len / 2).max(1);
    let up = (i as f64 / ramp as f64).min(1.0);
    let down = ((seg_len - 1 - i) as f64 / ramp as f64).min(1.0);
    let x = up.min(down);
    0.5 * (1.0 - (std::f64::consts::PI * x).cos())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_is_deterministic_and_normalized() {
        let a: Vec<TimeSignal<f64>> =
            synthesize_pool(3, 1.0, 8000, SyntheticKind::SpeechLike, 5).unwrap();
        let b: Vec<TimeSignal<f64>> =
            synthesize_pool(3, 1.0, 8000, SyntheticKind::SpeechLike, 5).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.samples, y.samples);
            assert!((x.rms() - SOURCE_RMS).abs() < 1e-12);
            assert_eq!(x.len(), 8000);
        }
        let c: Vec<TimeSignal<f64>> =
            synthesize_pool(3, 1.0, 8000, SyntheticKind::SpeechLike, 6).unwrap();
        assert_ne!(a[0].samples, c[0].samples);
        // Per-source streams: prefixes of a longer pool match.
        let wide: Vec<TimeSignal<f64>> =
            synthesize_pool(5, 1.0, 8000, SyntheticKind::SpeechLike, 5).unwrap();
        assert_eq!(a[1].samples, wide[1].samples);
    }

    #[test]
    fn sources_have_pauses() {
        let pool: Vec<TimeSignal<f64>> =
            synthesize_pool(4, 2.0, 8000, SyntheticKind::SpeechLike, 11).unwrap();
        for s in pool {
            let silent = s.samples.iter().filter(|v| v.abs() < 1e-9).count();
            let frac = silent as f64 / s.len() as f64;
            assert!(frac > 0.1, "expected pauses, silent fraction {frac}");
            assert!(frac < 0.9, "source almost empty, silent fraction {frac}");
        }
    }

    #[test]
    fn colored_noise_works() {
        let pool: Vec<TimeSignal<f64>> =
            synthesize_pool(2, 1.0, 8000, SyntheticKind::ColoredNoise, 3).unwrap();
        assert!(pool.iter().all(|s| s.energy() > 0.0));
    }
}
