//! Windowed forward/inverse STFT with a constant-overlap-add guarantee.
//!
//! The same window is applied at analysis and synthesis, so the effective
//! overlap-added profile is the window squared. Configurations are validated
//! numerically at construction: the overlapped profile must be constant to
//! within 1e-10 (relative), which makes perfect reconstruction provable for
//! any window kind rather than a per-window table lookup.
//!
//! Edge handling: `window_size - shift` zeros are prepended and the tail is
//! zero-padded so every original sample receives the full overlap profile.
//! With window size `W`, shift `R` and signal length `L`, the frame count is
//! `floor((W - R + L - 1) / R) + 1` and synthesis trims back to `L`.

use ndarray::Array2;
use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sigio::TimeSignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Hann,
    SqrtHann,
    Rectangular,
}

/// Maximum relative deviation of the overlap-added window profile from a
/// constant for a config to count as COLA-valid.
pub const COLA_TOLERANCE: f64 = 1e-10;

/// Analysis/synthesis geometry. Construction enforces
/// `0 < shift <= window_size <= fft_size`, an even `fft_size`, and the
/// constant-overlap-add condition for the chosen window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawStftConfig", into = "RawStftConfig")]
pub struct StftConfig {
    window_size: usize,
    shift: usize,
    fft_size: usize,
    window_kind: WindowKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawStftConfig {
    window_size: usize,
    shift: usize,
    #[serde(default)]
    fft_size: Option<usize>,
    #[serde(default = "default_window_kind")]
    window_kind: WindowKind,
}

fn default_window_kind() -> WindowKind {
    WindowKind::SqrtHann
}

impl TryFrom<RawStftConfig> for StftConfig {
    type Error = Error;
    fn try_from(raw: RawStftConfig) -> Result<Self> {
        StftConfig::with_fft_size(
            raw.window_size,
            raw.shift,
            raw.fft_size.unwrap_or(raw.window_size),
            raw.window_kind,
        )
    }
}

impl From<StftConfig> for RawStftConfig {
    fn from(cfg: StftConfig) -> Self {
        RawStftConfig {
            window_size: cfg.window_size,
            shift: cfg.shift,
            fft_size: Some(cfg.fft_size),
            window_kind: cfg.window_kind,
        }
    }
}

impl StftConfig {
    /// Config with `fft_size == window_size` (e.g. a 512 window gives 257 bins).
    pub fn new(window_size: usize, shift: usize, window_kind: WindowKind) -> Result<Self> {
        Self::with_fft_size(window_size, shift, window_size, window_kind)
    }

    pub fn with_fft_size(
        window_size: usize,
        shift: usize,
        fft_size: usize,
        window_kind: WindowKind,
    ) -> Result<Self> {
        if shift == 0 || shift > window_size || window_size > fft_size {
            return Err(Error::Config(format!(
                "need 0 < shift <= window_size <= fft_size, got {shift}/{window_size}/{fft_size}"
            )));
        }
        if fft_size % 2 != 0 {
            return Err(Error::Config(format!("fft_size must be even, got {fft_size}")));
        }
        let profile = cola_profile(window_kind, window_size, shift);
        let mean = profile.iter().sum::<f64>() / profile.len() as f64;
        if mean <= 0.0 {
            return Err(Error::Config("window has no energy".into()));
        }
        let dev = profile
            .iter()
            .map(|&v| (v - mean).abs())
            .fold(0.0f64, f64::max);
        if dev > COLA_TOLERANCE * mean {
            return Err(Error::Config(format!(
                "window {window_kind:?} with shift {shift}/{window_size} violates \
                 constant overlap-add (relative deviation {:.3e})",
                dev / mean
            )));
        }
        Ok(Self {
            window_size,
            shift,
            fft_size,
            window_kind,
        })
    }

    pub fn window_size(&self) -> usize {
        self.window_size
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn window_kind(&self) -> WindowKind {
        self.window_kind
    }

    /// Number of frequency bins of the one-sided spectrum.
    pub fn num_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Number of analysis frames for a signal of `len` samples.
    pub fn num_frames(&self, len: usize) -> usize {
        assert!(len > 0);
        (self.window_size - self.shift + len - 1) / self.shift + 1
    }

    fn front_pad(&self) -> usize {
        self.window_size - self.shift
    }

    /// The constant value of the overlap-added squared window.
    fn overlap_constant(&self) -> f64 {
        let profile = cola_profile(self.window_kind, self.window_size, self.shift);
        profile.iter().sum::<f64>() / profile.len() as f64
    }
}

/// Periodic window samples, computed in f64.
fn window_values(kind: WindowKind, len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| {
            let hann = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos());
            match kind {
                WindowKind::Hann => hann,
                WindowKind::SqrtHann => hann.sqrt(),
                WindowKind::Rectangular => 1.0,
            }
        })
        .collect()
}

/// Overlap-added analysis*synthesis profile, one value per residue mod shift.
fn cola_profile(kind: WindowKind, window_size: usize, shift: usize) -> Vec<f64> {
    let w = window_values(kind, window_size);
    (0..shift)
        .map(|j| {
            let mut acc = 0.0;
            let mut pos = j;
            while pos < window_size {
                acc += w[pos] * w[pos];
                pos += shift;
            }
            acc
        })
        .collect()
}

/// One-sided complex time-frequency representation of a real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram<T> {
    /// Indexed (frame, bin) with `fft_size/2 + 1` bins per frame.
    pub bins: Array2<Complex<T>>,
    pub config: StftConfig,
    pub original_length: usize,
    pub sample_rate_hz: u32,
}

impl<T: Scalar> Spectrogram<T> {
    /// Wraps an existing bin matrix, validating shape and finiteness.
    pub fn from_bins(
        bins: Array2<Complex<T>>,
        config: StftConfig,
        original_length: usize,
        sample_rate_hz: u32,
    ) -> Result<Self> {
        if bins.ncols() != config.num_bins() {
            return Err(Error::Contract(format!(
                "expected {} bins per frame, got {}",
                config.num_bins(),
                bins.ncols()
            )));
        }
        if bins.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Contract("spectrogram entries must be finite".into()));
        }
        Ok(Self {
            bins,
            config,
            original_length,
            sample_rate_hz,
        })
    }

    pub fn num_frames(&self) -> usize {
        self.bins.nrows()
    }

    pub fn num_bins(&self) -> usize {
        self.bins.ncols()
    }

    /// Signal-domain energy implied by the one-sided spectrum: interior bins
    /// count twice, the DC and Nyquist bins once, all divided by `fft_size`.
    pub fn spectral_energy(&self) -> T {
        let nyq = self.num_bins() - 1;
        let mut acc = T::zero();
        for row in self.bins.rows() {
            for (f, c) in row.iter().enumerate() {
                let p = c.norm_sqr();
                acc += if f == 0 || f == nyq { p } else { T::of(2.0) * p };
            }
        }
        acc / T::of_usize(self.config.fft_size())
    }
}

/// Forward STFT. The signal must be nonempty.
pub fn stft<T: Scalar>(x: &TimeSignal<T>, cfg: &StftConfig) -> Result<Spectrogram<T>> {
    if x.is_empty() {
        return Err(Error::Contract("stft input must be nonempty".into()));
    }
    let w: Vec<T> = window_values(cfg.window_kind, cfg.window_size)
        .into_iter()
        .map(T::of)
        .collect();
    let frames = cfg.num_frames(x.len());
    let front = cfg.front_pad();
    let half = cfg.num_bins();

    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft_forward(cfg.fft_size);
    let mut bins = Array2::from_elem((frames, half), Complex::new(T::zero(), T::zero()));
    let mut buf = vec![Complex::new(T::zero(), T::zero()); cfg.fft_size];

    for t in 0..frames {
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = if i < cfg.window_size {
                let pos = t * cfg.shift + i;
                let sample = if pos >= front && pos - front < x.len() {
                    x.samples[pos - front]
                } else {
                    T::zero()
                };
                Complex::new(sample * w[i], T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            };
        }
        fft.process(&mut buf);
        for f in 0..half {
            bins[(t, f)] = buf[f];
        }
    }
    Ok(Spectrogram {
        bins,
        config: cfg.clone(),
        original_length: x.len(),
        sample_rate_hz: x.sample_rate_hz,
    })
}

/// Inverse STFT by windowed overlap-add, trimmed to the original length.
/// Perfect reconstruction is guaranteed by the config's COLA validation.
pub fn istft<T: Scalar>(s: &Spectrogram<T>) -> TimeSignal<T> {
    let cfg = &s.config;
    let frames = s.num_frames();
    if frames == 0 || s.original_length == 0 {
        return TimeSignal::zeros(s.original_length, s.sample_rate_hz);
    }
    let w: Vec<T> = window_values(cfg.window_kind, cfg.window_size)
        .into_iter()
        .map(T::of)
        .collect();
    let fft_size = cfg.fft_size;
    let nyq = fft_size / 2;

    let mut planner = FftPlanner::<T>::new();
    let ifft = planner.plan_fft_inverse(fft_size);
    let padded_len = (frames - 1) * cfg.shift + cfg.window_size;
    let mut out = vec![T::zero(); padded_len];
    let mut buf = vec![Complex::new(T::zero(), T::zero()); fft_size];

    for t in 0..frames {
        buf[0] = s.bins[(t, 0)];
        buf[nyq] = s.bins[(t, nyq)];
        for f in 1..nyq {
            buf[f] = s.bins[(t, f)];
            buf[fft_size - f] = s.bins[(t, f)].conj();
        }
        ifft.process(&mut buf);
        let scale = T::one() / T::of_usize(fft_size);
        for i in 0..cfg.window_size {
            out[t * cfg.shift + i] += buf[i].re * scale * w[i];
        }
    }

    let norm = T::of(cfg.overlap_constant());
    let front = cfg.front_pad();
    let end = (front + s.original_length).min(padded_len);
    let samples: Vec<T> = out[front..end].iter().map(|&v| v / norm).collect();
    let mut samples = samples;
    samples.resize(s.original_length, T::zero());
    TimeSignal {
        samples,
        sample_rate_hz: s.sample_rate_hz,
    }
}

/// Element-wise magnitude |S|.
pub fn magnitude<T: Scalar>(s: &Spectrogram<T>) -> Array2<T> {
    s.bins.mapv(|c| c.norm())
}

/// Element-wise (Re S, Im S).
pub fn real_imag<T: Scalar>(s: &Spectrogram<T>) -> (Array2<T>, Array2<T>) {
    (s.bins.mapv(|c| c.re), s.bins.mapv(|c| c.im))
}
