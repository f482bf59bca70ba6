//! Waveform I/O and elementary time-domain operations: convolution, SNR
//! scaling and seeded noise injection.

use std::path::Path;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::roomsim::ImpulseResponse;
use crate::scalar::{db_capped, Scalar};

/// A sampled waveform with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal<T> {
    pub samples: Vec<T>,
    pub sample_rate_hz: u32,
}

impl<T: Scalar> TimeSignal<T> {
    /// Validates finiteness of all samples and a positive sample rate.
    pub fn new(samples: Vec<T>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::Contract("sample rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::Contract("samples must be finite".into()));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn zeros(len: usize, sample_rate_hz: u32) -> Self {
        Self {
            samples: vec![T::zero(); len],
            sample_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> T {
        self.samples.iter().map(|&s| s * s).sum()
    }

    pub fn rms(&self) -> T {
        if self.samples.is_empty() {
            T::zero()
        } else {
            (self.energy() / T::of_usize(self.len())).sqrt()
        }
    }

    /// Zero-pads or truncates to `len` samples.
    pub fn resized(&self, len: usize) -> Self {
        let mut samples = self.samples.clone();
        samples.resize(len, T::zero());
        Self {
            samples,
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

/// Sample encoding for WAV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

/// Outcome of [`write_wav`]: how many samples had to be clipped to fit the
/// encoding range.
#[derive(Debug, Clone, Copy, Default)]
pub struct WriteReport {
    pub clipped_samples: usize,
}

/// Full-scale divisor for 16-bit PCM. Integer sample `q` maps to amplitude
/// `q / 32768`, so +32767 reads back as 32767/32768.
pub const PCM16_FULL_SCALE: f64 = 32768.0;

/// Reads a mono (or channel-selected) PCM-16 or IEEE-float-32 WAV file.
/// Integer samples are normalized by [`PCM16_FULL_SCALE`].
pub fn read_wav<T: Scalar>(path: &Path, channel: Option<usize>) -> Result<TimeSignal<T>> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    let pick = match (spec.channels, channel) {
        (1, _) => 0usize,
        (_, Some(c)) if (c as u16) < spec.channels => c,
        (_, Some(c)) => {
            return Err(Error::Contract(format!(
                "channel {c} requested but file has {} channels",
                spec.channels
            )))
        }
        (_, None) => {
            return Err(Error::Contract(format!(
                "file has {} channels; a channel selector is required",
                spec.channels
            )))
        }
    };
    let stride = spec.channels as usize;
    let samples: Vec<T> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .skip(pick)
            .step_by(stride)
            .map(|s| s.map(|v| T::of(v as f64 / PCM16_FULL_SCALE)))
            .collect::<std::result::Result<_, _>>()?,
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .skip(pick)
            .step_by(stride)
            .map(|s| s.map(|v| T::of(v as f64)))
            .collect::<std::result::Result<_, _>>()?,
        (fmt, bits) => {
            return Err(Error::Format(format!(
                "unsupported WAV encoding {fmt:?}/{bits} bit (expected PCM 16 or float 32)"
            )))
        }
    };
    TimeSignal::new(samples, spec.sample_rate)
}

/// Writes a mono WAV file. For PCM-16, samples outside [-1, 1] are clipped
/// and counted in the returned report.
pub fn write_wav<T: Scalar>(
    signal: &TimeSignal<T>,
    path: &Path,
    encoding: WavEncoding,
) -> Result<WriteReport> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate_hz,
        bits_per_sample: match encoding {
            WavEncoding::Pcm16 => 16,
            WavEncoding::Float32 => 32,
        },
        sample_format: match encoding {
            WavEncoding::Pcm16 => hound::SampleFormat::Int,
            WavEncoding::Float32 => hound::SampleFormat::Float,
        },
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    let mut report = WriteReport::default();
    match encoding {
        WavEncoding::Pcm16 => {
            for &s in &signal.samples {
                let q = (s.to_f64().unwrap() * PCM16_FULL_SCALE).round();
                let clipped = q.clamp(i16::MIN as f64, i16::MAX as f64);
                if clipped != q {
                    report.clipped_samples += 1;
                }
                writer.write_sample(clipped as i16)?;
            }
        }
        WavEncoding::Float32 => {
            for &s in &signal.samples {
                writer.write_sample(s.to_f32().unwrap())?;
            }
        }
    }
    writer.finalize()?;
    Ok(report)
}

pub(crate) fn fft_in_place<T: Scalar>(buf: &mut [Complex<T>], inverse: bool) {
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    fft.process(buf);
    if inverse {
        let scale = T::one() / T::of_usize(buf.len());
        for v in buf.iter_mut() {
            *v = *v * scale;
        }
    }
}

/// Full linear convolution via FFT, output length `a.len() + b.len() - 1`.
pub(crate) fn convolve_full<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut fa: Vec<Complex<T>> = a
        .iter()
        .map(|&x| Complex::new(x, T::zero()))
        .chain(std::iter::repeat(Complex::new(T::zero(), T::zero())))
        .take(n)
        .collect();
    let mut fb: Vec<Complex<T>> = b
        .iter()
        .map(|&x| Complex::new(x, T::zero()))
        .chain(std::iter::repeat(Complex::new(T::zero(), T::zero())))
        .take(n)
        .collect();
    fft_in_place(&mut fa, false);
    fft_in_place(&mut fb, false);
    for (x, y) in fa.iter_mut().zip(fb.iter()) {
        *x = *x * *y;
    }
    fft_in_place(&mut fa, true);
    fa.truncate(out_len);
    fa.into_iter().map(|c| c.re).collect()
}

/// Convolves a signal with a room impulse response (full linear convolution).
pub fn fft_convolve<T: Scalar>(
    x: &TimeSignal<T>,
    h: &ImpulseResponse<T>,
) -> Result<TimeSignal<T>> {
    if x.sample_rate_hz != h.sample_rate_hz {
        return Err(Error::Contract(format!(
            "sample rate mismatch: signal {} Hz vs impulse response {} Hz",
            x.sample_rate_hz, h.sample_rate_hz
        )));
    }
    Ok(TimeSignal {
        samples: convolve_full(&x.samples, &h.taps),
        sample_rate_hz: x.sample_rate_hz,
    })
}

/// Adds white Gaussian noise at exactly `snr_db` relative to the realized
/// sample energy of `x`. The noise is drawn from a ChaCha12 stream seeded
/// with `seed` and shaped by the Box-Muller transform, so the output is
/// reproducible from the seed alone.
pub fn add_white_noise<T: Scalar>(x: &TimeSignal<T>, snr_db: f64, seed: u64) -> Result<TimeSignal<T>> {
    if !snr_db.is_finite() {
        return Err(Error::Contract("snr_db must be finite".into()));
    }
    let signal_energy = x.energy().to_f64().unwrap();
    if signal_energy <= 0.0 {
        return Err(Error::Contract(
            "SNR is undefined for a zero-energy signal".into(),
        ));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let noise = standard_normal(&mut rng, x.len());
    let noise_energy: f64 = noise.iter().map(|n| n * n).sum();
    if noise_energy <= 0.0 {
        return Err(Error::Contract("degenerate zero-energy noise draw".into()));
    }
    // Scale so 10·log10(E_signal / E_noise) == snr_db on realized energies.
    let scale = (signal_energy / (noise_energy * 10f64.powf(snr_db / 10.0))).sqrt();
    let samples = x
        .samples
        .iter()
        .zip(noise.iter())
        .map(|(&s, &n)| s + T::of(n * scale))
        .collect();
    Ok(TimeSignal {
        samples,
        sample_rate_hz: x.sample_rate_hz,
    })
}

/// i.i.d. standard normal draws via the Box-Muller transform.
fn standard_normal<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len + 1);
    while out.len() < len {
        // u1 in (0, 1] so the log is finite.
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        out.push(r * theta.cos());
        out.push(r * theta.sin());
    }
    out.truncate(len);
    out
}

/// 10·log10(‖signal‖² / ‖noisy − signal‖²) in dB, capped to ±300.
pub fn measure_snr<T: Scalar>(signal: &TimeSignal<T>, noisy: &TimeSignal<T>) -> Result<T> {
    if signal.len() != noisy.len() {
        return Err(Error::Contract(format!(
            "length mismatch: {} vs {}",
            signal.len(),
            noisy.len()
        )));
    }
    let residual: T = signal
        .samples
        .iter()
        .zip(noisy.samples.iter())
        .map(|(&s, &n)| (n - s) * (n - s))
        .sum();
    let energy = signal.energy();
    if residual == T::zero() {
        return Ok(T::of(crate::scalar::DB_CAP));
    }
    Ok(db_capped(energy / residual))
}
