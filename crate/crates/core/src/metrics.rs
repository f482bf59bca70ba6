//! Evaluation and loss suite: BSS-eval SDR, scale-invariant SDR, the
//! soft-thresholded time-domain SDR loss, utterance-level permutation
//! resolution and W-disjoint orthogonality.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::masks::{ApplicationMode, MaskSet};
use crate::scalar::{db_capped, Scalar, DB_CAP};
use crate::sigio::{convolve_full, TimeSignal};
use crate::stft::Spectrogram;

/// Soft threshold for the time-domain SDR loss: `tau = 10^(-sdr_max_db/10)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig<T> {
    sdr_max_db: T,
    tau: T,
}

impl<T: Scalar> LossConfig<T> {
    pub fn new(sdr_max_db: T) -> Self {
        Self {
            sdr_max_db,
            tau: T::of(10.0).powf(-sdr_max_db / T::of(10.0)),
        }
    }

    pub fn sdr_max_db(&self) -> T {
        self.sdr_max_db
    }

    pub fn tau(&self) -> T {
        self.tau
    }
}

impl<T: Scalar> Default for LossConfig<T> {
    /// The 20 dB saturation used throughout the experiments.
    fn default() -> Self {
        Self::new(T::of(20.0))
    }
}

/// Soft-thresholded time-domain SDR loss over K estimate/reference pairs:
/// `10*log10( (1/K) * sum_k ( ||e_k - x_k||^2 / ||x_k||^2 + tau ) )`.
/// Lower is better; the floor `-sdr_max_db` is attained exactly when every
/// estimate equals its reference.
pub fn thresholded_sdr_loss<T: Scalar>(
    estimates: &[TimeSignal<T>],
    references: &[TimeSignal<T>],
    cfg: &LossConfig<T>,
) -> Result<T> {
    if estimates.len() != references.len() || estimates.is_empty() {
        return Err(Error::Contract("estimate/reference count mismatch".into()));
    }
    let mut acc = T::zero();
    for (est, reference) in estimates.iter().zip(references.iter()) {
        if est.len() != reference.len() {
            return Err(Error::Contract("estimate/reference length mismatch".into()));
        }
        let ref_energy = reference.energy();
        if !(ref_energy > T::zero()) {
            return Err(Error::Contract("reference has zero energy".into()));
        }
        let err_energy: T = est
            .samples
            .iter()
            .zip(reference.samples.iter())
            .map(|(&e, &x)| (e - x) * (e - x))
            .sum();
        acc += err_energy / ref_energy + cfg.tau;
    }
    Ok(T::of(10.0) * (acc / T::of_usize(estimates.len())).log10())
}

/// Scale-invariant SDR: both signals are mean-removed, the estimate is
/// projected onto the reference with a single scalar, and the ratio is
/// capped to +-300 dB.
pub fn si_sdr<T: Scalar>(estimate: &TimeSignal<T>, reference: &TimeSignal<T>) -> Result<T> {
    if estimate.len() != reference.len() || estimate.is_empty() {
        return Err(Error::Contract("estimate/reference length mismatch".into()));
    }
    let n = T::of_usize(reference.len());
    let mean_e: T = estimate.samples.iter().copied().sum::<T>() / n;
    let mean_r: T = reference.samples.iter().copied().sum::<T>() / n;
    let mut dot = T::zero();
    let mut ref_energy = T::zero();
    for (&e, &r) in estimate.samples.iter().zip(reference.samples.iter()) {
        let (e, r) = (e - mean_e, r - mean_r);
        dot += e * r;
        ref_energy += r * r;
    }
    if !(ref_energy > T::zero()) {
        return Err(Error::Contract("reference has zero energy".into()));
    }
    let alpha = dot / ref_energy;
    let mut target_energy = T::zero();
    let mut resid_energy = T::zero();
    for (&e, &r) in estimate.samples.iter().zip(reference.samples.iter()) {
        let (e, r) = (e - mean_e, r - mean_r);
        let t = alpha * r;
        target_energy += t * t;
        resid_energy += (e - t) * (e - t);
    }
    if resid_energy == T::zero() {
        return Ok(T::of(DB_CAP));
    }
    Ok(db_capped(target_energy / resid_energy))
}

/// Absolute diagonal loading applied to the BSS-eval normal equations.
pub const BSS_DIAGONAL_LOADING: f64 = 1e-10;

/// BSS-eval SDR: the estimate is projected onto the span of the reference
/// delayed by 0..filter_taps-1 samples (Toeplitz normal equations, direct
/// symmetric solve with diagonal loading); the distortion is everything the
/// projection cannot explain. Capped to +-300 dB. Identical signals skip the
/// solve and report the cap directly.
pub fn bss_eval_sdr<T: Scalar>(
    estimate: &TimeSignal<T>,
    reference: &TimeSignal<T>,
    filter_taps: usize,
) -> Result<T> {
    let n = reference.len();
    if estimate.len() != n {
        return Err(Error::Contract("estimate/reference length mismatch".into()));
    }
    if filter_taps == 0 || n < filter_taps {
        return Err(Error::Contract(format!(
            "signals of {n} samples cannot support a {filter_taps}-tap distortion filter"
        )));
    }
    if !(reference.energy() > T::zero()) {
        return Err(Error::Contract(
            "singular normal equations: reference has zero energy".into(),
        ));
    }
    if estimate.samples == reference.samples {
        return Ok(T::of(DB_CAP));
    }

    let x = &reference.samples;
    let reversed: Vec<T> = x.iter().rev().copied().collect();
    // Full correlations against the zero-padded reference: lag d of
    // conv(rev(x), y) sits at index n - 1 + d.
    let auto = convolve_full(&reversed, x);
    let cross = convolve_full(&reversed, &estimate.samples);
    let r: &[T] = &auto[n - 1..n - 1 + filter_taps];
    let rhs: Vec<T> = cross[n - 1..n - 1 + filter_taps].to_vec();

    let loading = T::of(BSS_DIAGONAL_LOADING);
    let coeffs = solve_toeplitz_loaded(r, &rhs, loading).ok_or_else(|| {
        Error::Contract("singular normal equations in the BSS-eval projection".into())
    })?;

    let mut s_target = convolve_full(x, &coeffs);
    s_target.resize(n + filter_taps - 1, T::zero());
    let mut target_energy = T::zero();
    let mut dist_energy = T::zero();
    for (i, &t) in s_target.iter().enumerate() {
        let e = if i < n { estimate.samples[i] } else { T::zero() };
        target_energy += t * t;
        dist_energy += (e - t) * (e - t);
    }
    if dist_energy == T::zero() {
        return Ok(T::of(DB_CAP));
    }
    Ok(db_capped(target_energy / dist_energy))
}

/// Cholesky solve of the symmetric Toeplitz system built from autocorrelation
/// lags `r`, with `loading` added to the diagonal.
fn solve_toeplitz_loaded<T: Scalar>(r: &[T], rhs: &[T], loading: T) -> Option<Vec<T>> {
    let n = r.len();
    let mut a = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            a[i * n + j] = r[i - j];
        }
        a[i * n + i] += loading;
    }
    // In-place lower Cholesky factorization.
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= a[i * n + k] * a[j * n + k];
            }
            if i == j {
                if !(sum > T::zero()) {
                    return None;
                }
                a[i * n + i] = sum.sqrt();
            } else {
                a[i * n + j] = sum / a[j * n + j];
            }
        }
    }
    // Forward then backward substitution.
    let mut y = rhs.to_vec();
    for i in 0..n {
        let mut sum = y[i];
        for k in 0..i {
            sum -= a[i * n + k] * y[k];
        }
        y[i] = sum / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= a[k * n + i] * y[k];
        }
        y[i] = sum / a[i * n + i];
    }
    Some(y)
}

/// Exhaustive utterance-level permutation search: returns the permutation of
/// the references minimizing `loss(estimates, permuted_references)` and the
/// minimal loss. Ties resolve to the lexicographically smallest permutation.
pub fn pit_resolve<T, F>(
    loss: F,
    estimates: &[TimeSignal<T>],
    references: &[TimeSignal<T>],
) -> Result<(Vec<usize>, T)>
where
    T: Scalar,
    F: Fn(&[TimeSignal<T>], &[TimeSignal<T>]) -> Result<T>,
{
    let k = estimates.len();
    if k == 0 || references.len() != k {
        return Err(Error::Contract("estimate/reference count mismatch".into()));
    }
    if k > 6 {
        return Err(Error::Contract(format!(
            "exhaustive permutation search supports up to 6 sources, got {k}"
        )));
    }
    let mut best: Option<(Vec<usize>, T)> = None;
    for perm in (0..k).permutations(k) {
        let permuted: Vec<TimeSignal<T>> = perm.iter().map(|&i| references[i].clone()).collect();
        let value = loss(estimates, &permuted)?;
        let better = match &best {
            None => true,
            Some((_, current)) => value < *current,
        };
        if better {
            best = Some((perm, value));
        }
    }
    Ok(best.expect("at least one permutation"))
}

/// Per-source W-disjoint orthogonality plus the energy-weighted scene score.
#[derive(Debug, Clone, Serialize)]
pub struct WdoReport<T> {
    pub per_source: Vec<T>,
    pub energy_weighted_mean: T,
}

/// W-disjoint orthogonality of the masks against the source images: per
/// source, (retained target energy - leaked interference energy) / total
/// target energy. Defined for shared-magnitude mask sets.
pub fn wdo<T: Scalar>(
    masks: &MaskSet<T>,
    source_specs: &[Spectrogram<T>],
    mixture: &Spectrogram<T>,
) -> Result<WdoReport<T>> {
    if masks.mode != ApplicationMode::SharedMagnitude {
        return Err(Error::Contract(
            "WDO is defined on shared-magnitude mask sets".into(),
        ));
    }
    let k = source_specs.len();
    if masks.masks.len() != k || k == 0 {
        return Err(Error::Contract("mask/source count mismatch".into()));
    }
    let shape = (mixture.num_frames(), mixture.num_bins());
    if source_specs
        .iter()
        .any(|s| (s.num_frames(), s.num_bins()) != shape)
        || masks.masks.iter().any(|m| (m.nrows(), m.ncols()) != shape)
    {
        return Err(Error::Contract("mask/source/mixture shapes differ".into()));
    }

    let powers: Vec<ndarray::Array2<T>> = source_specs
        .iter()
        .map(|s| s.bins.mapv(|c| c.norm_sqr()))
        .collect();
    let mut per_source = Vec::with_capacity(k);
    let mut energies = Vec::with_capacity(k);
    for (mask, power) in masks.masks.iter().zip(powers.iter()) {
        let total: T = power.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::Contract("a source has zero energy".into()));
        }
        let mut retained = T::zero();
        let mut leaked = T::zero();
        for t in 0..shape.0 {
            for f in 0..shape.1 {
                let m = mask[(t, f)];
                retained += m * power[(t, f)];
                for other in powers.iter() {
                    if std::ptr::eq(other, power) {
                        continue;
                    }
                    leaked += m * other[(t, f)];
                }
            }
        }
        per_source.push((retained - leaked) / total);
        energies.push(total);
    }
    let total_energy: T = energies.iter().copied().sum();
    let energy_weighted_mean = per_source
        .iter()
        .zip(energies.iter())
        .map(|(&w, &e)| w * e)
        .sum::<T>()
        / total_energy;
    Ok(WdoReport {
        per_source,
        energy_weighted_mean,
    })
}

/// Per-scene metric bundle for one (encoder config, mask) cell.
#[derive(Debug, Clone, Serialize)]
pub struct MetricReport<T> {
    /// `permutation[k]` is the reference index matched to estimate k.
    pub permutation: Vec<usize>,
    pub th_sdr_loss_db: Option<T>,
    pub bss_sdr_db: Option<Vec<T>>,
    pub si_sdr_db: Option<Vec<T>>,
    pub wdo: Option<Vec<T>>,
    pub wdo_weighted_mean: Option<T>,
    pub mtfa_error_db: Option<T>,
}

impl<T: Scalar> MetricReport<T> {
    pub fn mean(values: &[T]) -> T {
        values.iter().copied().sum::<T>() / T::of_usize(values.len().max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::masks::MaskKind;
    use crate::stft::{Spectrogram, StftConfig, WindowKind};
    use ndarray::Array2;
    use num_complex::Complex;
    use proptest::prelude::*;

    fn sig(samples: Vec<f64>) -> TimeSignal<f64> {
        TimeSignal::new(samples, 8000).unwrap()
    }

    fn noise(len: usize, seed: u64) -> TimeSignal<f64> {
        let mut state = seed.max(1);
        sig((0..len)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 33) as f64 / (1u64 << 31) as f64 - 1.0
            })
            .collect())
    }

    #[test]
    fn loss_floor_on_perfect_estimates() {
        let cfg = LossConfig::new(20.0);
        let refs = [noise(500, 1), noise(500, 2)];
        let loss = thresholded_sdr_loss(&refs, &refs, &cfg).unwrap();
        assert!((loss - (-20.0)).abs() <= 1e-9, "loss {loss}");
    }

    #[test]
    fn loss_zero_estimates() {
        let cfg = LossConfig::new(20.0);
        let refs = [noise(400, 3), noise(400, 4)];
        let zeros = [sig(vec![0.0; 400]), sig(vec![0.0; 400])];
        let loss = thresholded_sdr_loss(&zeros, &refs, &cfg).unwrap();
        assert!((loss - 10.0 * 1.01f64.log10()).abs() <= 1e-9, "loss {loss}");
    }

    #[test]
    fn loss_mixed_error_ratio() {
        // One perfect source, one with error ratio 0.1:
        // 10*log10((0.01 + 0.11) / 2) = -12.2185 dB.
        let r1 = noise(1000, 5);
        let r2 = noise(1000, 6);
        let e2_energy_target = 0.1 * r2.energy();
        let direction = noise(1000, 7);
        let scale = (e2_energy_target / direction.energy()).sqrt();
        let e2 = sig(r2
            .samples
            .iter()
            .zip(&direction.samples)
            .map(|(r, d)| r + scale * d)
            .collect());
        let cfg = LossConfig::new(20.0);
        let loss = thresholded_sdr_loss(&[r1.clone(), e2], &[r1, r2], &cfg).unwrap();
        let expect = 10.0 * ((0.01 + 0.1 + 0.01) / 2.0f64).log10();
        assert!((loss - expect).abs() <= 1e-9, "loss {loss} vs {expect}");
    }

    #[test]
    fn loss_rejects_zero_reference() {
        let cfg = LossConfig::default();
        let refs = [sig(vec![0.0; 10])];
        let ests = [sig(vec![1.0; 10])];
        assert!(thresholded_sdr_loss(&ests, &refs, &cfg).is_err());
    }

    #[test]
    fn loss_saturation_shrinks_well_separated_gradients() {
        // Removing a fixed perturbation buys less loss when the starting
        // error ratio is already below tau than when it is above 10*tau.
        let cfg = LossConfig::new(20.0);
        let tau = cfg.tau();
        assert!((tau - 0.01).abs() < 1e-15);
        let decrease = |ratio: f64| 10.0 * ((ratio + tau) / tau).log10();
        assert!(decrease(0.005) < decrease(0.2));
    }

    #[test]
    fn si_sdr_scale_invariance_and_caps() {
        let x = noise(2000, 9);
        for c in [0.01, 1.0, -3.0] {
            let scaled = sig(x.samples.iter().map(|v| c * v).collect());
            assert_eq!(si_sdr(&scaled, &x).unwrap(), 300.0);
        }
        // Orthogonal estimate: project out the reference direction.
        let y = noise(2000, 10);
        let dot: f64 = x.samples.iter().zip(&y.samples).map(|(a, b)| a * b).sum();
        let alpha = dot / x.energy();
        let orth = sig(y
            .samples
            .iter()
            .zip(&x.samples)
            .map(|(b, a)| b - alpha * a)
            .collect());
        // Mean-removal inside si_sdr perturbs exact orthogonality; remove
        // means first so the constructed signal stays orthogonal.
        let zm = |s: &TimeSignal<f64>| {
            let m = s.samples.iter().sum::<f64>() / s.len() as f64;
            sig(s.samples.iter().map(|v| v - m).collect())
        };
        let x0 = zm(&x);
        let y0 = zm(&orth);
        let dot: f64 = x0.samples.iter().zip(&y0.samples).map(|(a, b)| a * b).sum();
        let alpha = dot / x0.energy();
        let orth0 = sig(y0
            .samples
            .iter()
            .zip(&x0.samples)
            .map(|(b, a)| b - alpha * a)
            .collect());
        assert_eq!(si_sdr(&orth0, &x0).unwrap(), -300.0);
        assert_eq!(si_sdr(&sig(vec![0.0; 2000]), &x).unwrap(), -300.0);
    }

    #[test]
    fn si_sdr_orthogonal_noise_at_10_db() {
        let x = {
            let raw = noise(3000, 11);
            let m = raw.samples.iter().sum::<f64>() / raw.len() as f64;
            sig(raw.samples.iter().map(|v| v - m).collect())
        };
        let raw_n = {
            let raw = noise(3000, 12);
            let m = raw.samples.iter().sum::<f64>() / raw.len() as f64;
            sig(raw.samples.iter().map(|v| v - m).collect())
        };
        let dot: f64 = x.samples.iter().zip(&raw_n.samples).map(|(a, b)| a * b).sum();
        let alpha = dot / x.energy();
        let mut n: Vec<f64> = raw_n
            .samples
            .iter()
            .zip(&x.samples)
            .map(|(b, a)| b - alpha * a)
            .collect();
        let n_energy: f64 = n.iter().map(|v| v * v).sum();
        let scale = (0.1 * x.energy() / n_energy).sqrt();
        for v in n.iter_mut() {
            *v *= scale;
        }
        let est = sig(x.samples.iter().zip(&n).map(|(a, b)| a + b).collect());
        let got = si_sdr(&est, &x).unwrap();
        assert!((got - 10.0).abs() <= 1e-6, "si-SDR {got}");
    }

    #[test]
    fn bss_eval_exact_and_filtered_reference() {
        let x = noise(4000, 13);
        assert_eq!(bss_eval_sdr(&x, &x, 512).unwrap(), 300.0);

        // Estimate = reference through a 100-tap FIR; pad both to the full
        // convolution length so the estimate lies exactly in the span.
        let fir: Vec<f64> = noise(100, 14).samples;
        let full = convolve_full(&x.samples, &fir);
        let est = sig(full);
        let reference = x.resized(est.len());
        let sdr = bss_eval_sdr(&est, &reference, 512).unwrap();
        assert!(sdr >= 250.0, "filtered reference scored {sdr}");
    }

    #[test]
    fn bss_eval_controlled_residual() {
        // Reference with a zero tail; tail-supported distortion is exactly
        // orthogonal to every delayed copy of the reference.
        let mut samples = noise(4000, 15).samples;
        for v in samples.iter_mut().skip(4000 - 600) {
            *v = 0.0;
        }
        let x = sig(samples);
        let tail = noise(80, 16);
        let tail_scale = (0.1 * x.energy() / tail.energy()).sqrt();
        let mut est = x.samples.clone();
        for (i, v) in tail.samples.iter().enumerate() {
            est[4000 - 80 + i] += tail_scale * v;
        }
        let sdr = bss_eval_sdr(&sig(est), &x, 512).unwrap();
        assert!((sdr - 10.0).abs() <= 0.5, "sdr {sdr}");
    }

    #[test]
    fn bss_eval_contract_errors() {
        let x = noise(1000, 17);
        assert!(bss_eval_sdr(&x, &sig(vec![0.0; 1000]), 512).is_err());
        assert!(bss_eval_sdr(&x, &noise(400, 18), 512).is_err());
        assert!(bss_eval_sdr(&noise(400, 19), &noise(400, 20), 512).is_err());
    }

    #[test]
    fn pit_identity_and_swap() {
        let cfg = LossConfig::default();
        let refs = vec![noise(600, 21), noise(600, 22)];
        let loss_fn = |e: &[TimeSignal<f64>], r: &[TimeSignal<f64>]| {
            thresholded_sdr_loss(e, r, &cfg)
        };
        let (perm, loss) = pit_resolve(&loss_fn, &refs, &refs).unwrap();
        assert_eq!(perm, vec![0, 1]);
        assert!((loss + 20.0).abs() <= 1e-9);

        let swapped = vec![refs[1].clone(), refs[0].clone()];
        let (perm, loss_swapped) = pit_resolve(&loss_fn, &refs, &swapped).unwrap();
        assert_eq!(perm, vec![1, 0]);
        assert_eq!(loss, loss_swapped);
    }

    #[test]
    fn pit_matches_bruteforce_for_three_sources() {
        let cfg = LossConfig::default();
        let ests = vec![noise(300, 23), noise(300, 24), noise(300, 25)];
        let refs = vec![noise(300, 26), noise(300, 27), noise(300, 28)];
        let loss_fn = |e: &[TimeSignal<f64>], r: &[TimeSignal<f64>]| {
            thresholded_sdr_loss(e, r, &cfg)
        };
        let (_, got) = pit_resolve(&loss_fn, &ests, &refs).unwrap();
        // Independent brute force over all 6 permutations.
        let mut best = f64::INFINITY;
        for p in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let permuted: Vec<_> = p.iter().map(|&i| refs[i].clone()).collect();
            let v = loss_fn(&ests, &permuted).unwrap();
            if v < best {
                best = v;
            }
        }
        assert_eq!(got, best);
    }

    #[test]
    fn pit_rejects_large_k() {
        let cfg = LossConfig::default();
        let many: Vec<_> = (0..7).map(|i| noise(50, 30 + i)).collect();
        let loss_fn = |e: &[TimeSignal<f64>], r: &[TimeSignal<f64>]| {
            thresholded_sdr_loss(e, r, &cfg)
        };
        assert!(pit_resolve(&loss_fn, &many, &many).is_err());
    }

    fn toy_spec(values: [[f64; 2]; 2]) -> Spectrogram<f64> {
        let cfg = StftConfig::new(2, 2, WindowKind::Rectangular).unwrap();
        let mut bins = Array2::from_elem((2, 2), Complex::new(0.0, 0.0));
        for t in 0..2 {
            for f in 0..2 {
                bins[(t, f)] = Complex::new(values[t][f], 0.0);
            }
        }
        Spectrogram::from_bins(bins, cfg, 4, 8000).unwrap()
    }

    #[test]
    fn wdo_disjoint_zero_mask_and_identical_cases() {
        use crate::masks::ibm;
        // Disjoint sources with IBM: perfect retention, zero leakage.
        let s1 = toy_spec([[2.0, 0.0], [1.0, 0.0]]);
        let s2 = toy_spec([[0.0, 3.0], [0.0, 0.5]]);
        let mix = toy_spec([[2.0, 3.0], [1.0, 0.5]]);
        let set = ibm(&[s1.clone(), s2.clone()]).unwrap();
        let report = wdo(&set, &[s1.clone(), s2.clone()], &mix).unwrap();
        for v in &report.per_source {
            assert!((v - 1.0).abs() <= 1e-12);
        }
        assert!((report.energy_weighted_mean - 1.0).abs() <= 1e-12);

        // All-zero masks retain and leak nothing.
        let zero_set = MaskSet {
            masks: vec![Array2::zeros((2, 2)), Array2::zeros((2, 2))],
            imag_masks: None,
            kind: MaskKind::Ibm,
            mode: ApplicationMode::SharedMagnitude,
            clip_stats: None,
        };
        let report = wdo(&zero_set, &[s1.clone(), s2], &mix).unwrap();
        assert!(report.per_source.iter().all(|&v| v == 0.0));

        // Identical sources with the tie rule: the winner's retained and
        // leaked energies cancel, the loser's mask is empty.
        let set = ibm(&[s1.clone(), s1.clone()]).unwrap();
        let report = wdo(&set, &[s1.clone(), s1.clone()], &mix).unwrap();
        assert!(report.per_source.iter().all(|&v| v == 0.0));
        assert_eq!(report.energy_weighted_mean, 0.0);
    }

    #[test]
    fn wdo_rejects_zero_energy_source() {
        use crate::masks::ibm;
        let s1 = toy_spec([[1.0, 0.0], [0.0, 0.0]]);
        let s2 = toy_spec([[0.0, 0.0], [0.0, 0.0]]);
        let mix = s1.clone();
        let set = ibm(&[s1.clone(), s2.clone()]).unwrap();
        assert!(wdo(&set, &[s1, s2], &mix).is_err());
    }

    proptest! {
        #[test]
        fn loss_never_beats_the_floor(seed in 1u64..100, scale in -1.5f64..1.5) {
            let cfg = LossConfig::new(20.0);
            let r = noise(300, seed);
            let e = sig(r.samples.iter().map(|v| scale * v).collect());
            let loss = thresholded_sdr_loss(&[e], &[r.clone()], &cfg).unwrap();
            prop_assert!(loss >= -20.0 - 1e-12);
            let exact = thresholded_sdr_loss(&[r.clone()], &[r], &cfg).unwrap();
            prop_assert!((exact + 20.0).abs() <= 1e-9);
        }

        #[test]
        fn si_sdr_exactly_scale_invariant(seed in 1u64..100, c in prop_oneof![-8.0f64..-0.05, 0.05f64..8.0]) {
            let x = noise(500, seed);
            let e = noise(500, seed + 1000);
            let scaled = sig(e.samples.iter().map(|v| c * v).collect());
            let a = si_sdr(&e, &x).unwrap();
            let b = si_sdr(&scaled, &x).unwrap();
            prop_assert!((a - b).abs() <= 1e-6, "{} vs {}", a, b);
        }

        #[test]
        fn pit_minimum_is_permutation_invariant(seed in 1u64..50) {
            let cfg = LossConfig::default();
            let ests = vec![noise(200, seed), noise(200, seed + 100)];
            let refs = vec![noise(200, seed + 200), noise(200, seed + 300)];
            let loss_fn = |e: &[TimeSignal<f64>], r: &[TimeSignal<f64>]| {
                thresholded_sdr_loss(e, r, &cfg)
            };
            let (_, base) = pit_resolve(&loss_fn, &ests, &refs).unwrap();
            let shuffled = vec![refs[1].clone(), refs[0].clone()];
            let (_, other) = pit_resolve(&loss_fn, &ests, &shuffled).unwrap();
            prop_assert_eq!(base, other);
        }

        #[test]
        fn wdo_scale_invariant(c in 0.01f64..100.0) {
            use crate::masks::ibm;
            let s1 = toy_spec([[2.0, 0.3], [1.0, 0.1]]);
            let s2 = toy_spec([[0.4, 3.0], [0.2, 0.5]]);
            let mix = toy_spec([[2.4, 3.3], [1.2, 0.6]]);
            let scale_spec = |s: &Spectrogram<f64>| Spectrogram::from_bins(
                s.bins.mapv(|v| v * c), s.config.clone(), s.original_length, s.sample_rate_hz
            ).unwrap();
            let set = ibm(&[s1.clone(), s2.clone()]).unwrap();
            let a = wdo(&set, &[s1.clone(), s2.clone()], &mix).unwrap();
            let scaled = [scale_spec(&s1), scale_spec(&s2)];
            let set2 = ibm(&scaled).unwrap();
            let b = wdo(&set2, &scaled, &scale_spec(&mix)).unwrap();
            for (x, y) in a.per_source.iter().zip(b.per_source.iter()) {
                prop_assert!((x - y).abs() <= 1e-9);
            }
        }
    }
}
