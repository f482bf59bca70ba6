//! Multiplicative transfer-function approximation error: how well per-frame
//! spectral multiplication stands in for time-domain convolution at a given
//! STFT resolution. The relative-L2 measure here is this bench's
//! operationalization; reports label it as such.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::roomsim::ImpulseResponse;
use crate::scalar::{db_capped, Scalar};
use crate::sigio::{fft_in_place, TimeSignal};
use crate::stft::{stft, StftConfig};

#[derive(Debug, Clone, Serialize)]
pub struct MtfaReport<T> {
    pub config: StftConfig,
    pub rir_length: usize,
    /// 10*log10(||R - A||^2 / ||R||^2) where R is the analyzed convolution
    /// and A the per-bin product approximation; capped at -300 dB.
    pub error_db: T,
    /// The same relative error per frame (frame energy in the denominator),
    /// capped to +-300 dB; silent, exactly-approximated frames report -300.
    pub per_frame_error_db: Vec<T>,
    /// Energy of the impulse response beyond `fft_size`, which the one-frame
    /// transfer function cannot represent.
    pub truncated_tail_energy: T,
}

/// Compares `stft(s * h)` against `H(f) . stft(s)` where `H` is the
/// `fft_size`-point transfer function of the first `fft_size` taps of `h`.
/// The dry signal is zero-padded to the convolved length so both analyses
/// share the same frame grid.
pub fn mtfa_error<T: Scalar>(
    s: &TimeSignal<T>,
    h: &ImpulseResponse<T>,
    cfg: &StftConfig,
) -> Result<MtfaReport<T>> {
    if s.is_empty() {
        return Err(Error::Contract("signal must be nonempty".into()));
    }
    if s.sample_rate_hz != h.sample_rate_hz {
        return Err(Error::Contract("signal/RIR sample rates differ".into()));
    }
    let reverberated = crate::sigio::fft_convolve(s, h)?;
    let padded = s.resized(reverberated.len());

    let reference = stft(&reverberated, cfg)?;
    let dry = stft(&padded, cfg)?;

    // One-sided transfer function of h truncated/zero-padded to fft_size.
    let fft_size = cfg.fft_size();
    let mut buf: Vec<Complex<T>> = (0..fft_size)
        .map(|i| Complex::new(h.taps.get(i).copied().unwrap_or_else(T::zero), T::zero()))
        .collect();
    fft_in_place(&mut buf, false);
    let transfer: Vec<Complex<T>> = buf[..cfg.num_bins()].to_vec();
    let truncated_tail_energy: T = h
        .taps
        .iter()
        .skip(fft_size)
        .map(|&t| t * t)
        .sum();

    let frames = reference.num_frames();
    let bins = reference.num_bins();
    let mut total_ref = T::zero();
    let mut total_diff = T::zero();
    let mut per_frame_error_db = Vec::with_capacity(frames);
    for t in 0..frames {
        let mut frame_ref = T::zero();
        let mut frame_diff = T::zero();
        for f in 0..bins {
            let r = reference.bins[(t, f)];
            let a = dry.bins[(t, f)] * transfer[f];
            frame_ref += r.norm_sqr();
            frame_diff += (r - a).norm_sqr();
        }
        total_ref += frame_ref;
        total_diff += frame_diff;
        per_frame_error_db.push(if frame_diff == T::zero() {
            -T::of(crate::scalar::DB_CAP)
        } else {
            db_capped(frame_diff / frame_ref)
        });
    }
    if !(total_ref > T::zero()) {
        return Err(Error::Contract("reference spectrogram has zero energy".into()));
    }
    let error_db = if total_diff == T::zero() {
        -T::of(crate::scalar::DB_CAP)
    } else {
        db_capped(total_diff / total_ref)
    };
    Ok(MtfaReport {
        config: cfg.clone(),
        rir_length: h.len(),
        error_db,
        per_frame_error_db,
        truncated_tail_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roomsim::{image_method_rir, RoomSpec};
    use crate::stft::WindowKind;

    fn noise(len: usize, seed: u64) -> TimeSignal<f64> {
        let mut state = seed.max(1);
        TimeSignal::new(
            (0..len)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                    (state >> 33) as f64 / (1u64 << 31) as f64 - 1.0
                })
                .collect(),
            8000,
        )
        .unwrap()
    }

    fn reverberant_rir(t60: f64, len: usize) -> ImpulseResponse<f64> {
        let spec = RoomSpec {
            dimensions: [6.0, 5.0, 3.5],
            source_positions: vec![[2.0, 3.0, 1.5]],
            mic_position: [3.5, 2.0, 1.7],
            t60,
            sample_rate_hz: 8000,
            rir_length: len,
            max_image_order: -1,
        };
        image_method_rir(&spec, 0).unwrap()
    }

    #[test]
    fn unit_impulse_is_exact() {
        let cfg = StftConfig::new(64, 16, WindowKind::SqrtHann).unwrap();
        let s = noise(1000, 1);
        let h = ImpulseResponse::<f64>::unit_impulse(8000);
        let report = mtfa_error(&s, &h, &cfg).unwrap();
        assert_eq!(report.error_db, -300.0);
        assert_eq!(report.truncated_tail_energy, 0.0);
        assert!(report.per_frame_error_db.iter().all(|&v| v == -300.0));
    }

    #[test]
    fn short_pure_delay_is_nearly_exact() {
        // Delay shorter than the shift, rectangular window, fft padding
        // beyond window + delay: the product is a clean linear phase.
        let cfg = StftConfig::with_fft_size(64, 64, 256, WindowKind::Rectangular).unwrap();
        let s = noise(2000, 2);
        let mut taps = vec![0.0; 9];
        taps[8] = 1.0;
        let h = ImpulseResponse::new(taps, 8000, 8, 0.0).unwrap();
        let report = mtfa_error(&s, &h, &cfg).unwrap();
        assert!(report.error_db < -40.0, "error {}", report.error_db);
    }

    #[test]
    fn error_decreases_with_window_size() {
        let h = reverberant_rir(0.3, 2400);
        let s = noise(8000, 3);
        let mut last = f64::INFINITY;
        for w in [16usize, 256, 512, 1024] {
            let cfg = StftConfig::new(w, w / 2, WindowKind::SqrtHann).unwrap();
            let report = mtfa_error(&s, &h, &cfg).unwrap();
            assert!(
                report.error_db < last,
                "window {w}: {} not below {last}",
                report.error_db
            );
            last = report.error_db;
        }
    }

    #[test]
    fn error_is_scale_invariant() {
        let h = reverberant_rir(0.2, 1200);
        let s = noise(4000, 4);
        let cfg = StftConfig::new(256, 128, WindowKind::SqrtHann).unwrap();
        let base = mtfa_error(&s, &h, &cfg).unwrap().error_db;
        let scaled_s = TimeSignal::new(s.samples.iter().map(|v| 7.5 * v).collect(), 8000).unwrap();
        let a = mtfa_error(&scaled_s, &h, &cfg).unwrap().error_db;
        let scaled_h = ImpulseResponse::new(
            h.taps.iter().map(|v| 0.03 * v).collect(),
            8000,
            h.direct_path_index,
            h.t60_nominal,
        )
        .unwrap();
        let b = mtfa_error(&s, &scaled_h, &cfg).unwrap().error_db;
        assert!((a - base).abs() <= 1e-6);
        assert!((b - base).abs() <= 1e-6);
    }

    #[test]
    fn tail_energy_reported_when_rir_exceeds_fft() {
        let h = reverberant_rir(0.3, 2400);
        let s = noise(4000, 5);
        let cfg = StftConfig::new(256, 128, WindowKind::SqrtHann).unwrap();
        let report = mtfa_error(&s, &h, &cfg).unwrap();
        assert!(report.truncated_tail_energy > 0.0);
        let wide = StftConfig::with_fft_size(256, 128, 4096, WindowKind::SqrtHann).unwrap();
        let report = mtfa_error(&s, &h, &wide).unwrap();
        assert_eq!(report.truncated_tail_energy, 0.0);
    }
}
