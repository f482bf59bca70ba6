//! Oracle mask computation from ground-truth source spectrograms, the
//! per-bin dominance map, and mask application in the shared-magnitude and
//! per-part (separate real/imaginary) modes.

use ndarray::Array2;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stft::Spectrogram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskKind {
    Ibm,
    Irm,
    Wiener,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApplicationMode {
    /// One real mask per source scales the complex mixture bin, i.e. both
    /// real and imaginary parts (the magnitude-input configuration).
    SharedMagnitude,
    /// Independent real masks scale the real and imaginary parts of the
    /// mixture separately (the real+imag-input configuration).
    PerPart,
}

/// Signed per-part oracle ratios are clipped to this range; the raw ratio is
/// unbounded near zero crossings of the mixture part.
pub const PER_PART_CLIP: (f64, f64) = (-1.0, 2.0);

/// Which source dominates each time-frequency bin (0-based indices).
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceMap {
    pub indices: Array2<usize>,
}

/// How many per-part mask entries hit the clip range.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipStats {
    pub clipped: usize,
    pub total: usize,
}

/// K oracle masks over (frame, bin). `imag_masks` is present exactly in
/// per-part mode; `masks` then holds the real-part masks.
#[derive(Debug, Clone)]
pub struct MaskSet<T> {
    pub masks: Vec<Array2<T>>,
    pub imag_masks: Option<Vec<Array2<T>>>,
    pub kind: MaskKind,
    pub mode: ApplicationMode,
    pub clip_stats: Option<ClipStats>,
}

impl<T: Scalar> MaskSet<T> {
    pub fn num_sources(&self) -> usize {
        self.masks.len()
    }
}

fn check_shapes<T: Scalar>(specs: &[Spectrogram<T>]) -> Result<(usize, usize)> {
    let first = specs
        .first()
        .ok_or_else(|| Error::Contract("need at least one source spectrogram".into()))?;
    let shape = (first.num_frames(), first.num_bins());
    for s in specs {
        if (s.num_frames(), s.num_bins()) != shape || s.config != first.config {
            return Err(Error::Contract(
                "source spectrograms must share shape and analysis config".into(),
            ));
        }
    }
    Ok(shape)
}

/// argmax over sources of |s_k(t,f)|, ties broken toward the smaller index.
pub fn dominance_map<T: Scalar>(source_specs: &[Spectrogram<T>]) -> Result<DominanceMap> {
    let (frames, bins) = check_shapes(source_specs)?;
    let mut indices = Array2::zeros((frames, bins));
    for t in 0..frames {
        for f in 0..bins {
            let mut best = 0usize;
            let mut best_mag = source_specs[0].bins[(t, f)].norm_sqr();
            for (k, s) in source_specs.iter().enumerate().skip(1) {
                let mag = s.bins[(t, f)].norm_sqr();
                if mag > best_mag {
                    best = k;
                    best_mag = mag;
                }
            }
            indices[(t, f)] = best;
        }
    }
    Ok(DominanceMap { indices })
}

/// Ideal binary masks: one-hot on the dominance map.
pub fn ibm<T: Scalar>(source_specs: &[Spectrogram<T>]) -> Result<MaskSet<T>> {
    oracle_masks(source_specs, MaskKind::Ibm, ApplicationMode::SharedMagnitude)
}

/// Ideal ratio masks |s_k| / sum_j |s_j|; all-silent bins get uniform 1/K.
pub fn irm<T: Scalar>(source_specs: &[Spectrogram<T>]) -> Result<MaskSet<T>> {
    oracle_masks(source_specs, MaskKind::Irm, ApplicationMode::SharedMagnitude)
}

/// Wiener-like masks |s_k|^2 / sum_j |s_j|^2; all-silent bins get uniform 1/K.
pub fn wiener<T: Scalar>(source_specs: &[Spectrogram<T>]) -> Result<MaskSet<T>> {
    oracle_masks(source_specs, MaskKind::Wiener, ApplicationMode::SharedMagnitude)
}

/// Oracle mask computation for any kind/mode combination. The sources must
/// be the single-speaker images analyzed with the mixture's config.
pub fn oracle_masks<T: Scalar>(
    source_specs: &[Spectrogram<T>],
    kind: MaskKind,
    mode: ApplicationMode,
) -> Result<MaskSet<T>> {
    match mode {
        ApplicationMode::SharedMagnitude => {
            let values = part_values(source_specs, |c| c.norm())?;
            let masks = masks_from_parts(&values, kind, &mut ClipStats::default());
            Ok(MaskSet {
                masks,
                imag_masks: None,
                kind,
                mode,
                clip_stats: None,
            })
        }
        ApplicationMode::PerPart => {
            let re = part_values(source_specs, |c| c.re)?;
            let im = part_values(source_specs, |c| c.im)?;
            let mut stats = ClipStats::default();
            let masks = masks_from_parts(&re, kind, &mut stats);
            let imag = masks_from_parts(&im, kind, &mut stats);
            Ok(MaskSet {
                masks,
                imag_masks: Some(imag),
                kind,
                mode,
                clip_stats: Some(stats),
            })
        }
    }
}

fn part_values<T: Scalar>(
    specs: &[Spectrogram<T>],
    part: impl Fn(Complex<T>) -> T,
) -> Result<Vec<Array2<T>>> {
    check_shapes(specs)?;
    Ok(specs.iter().map(|s| s.bins.mapv(|c| part(c))).collect())
}

/// Mask formulas on one real-valued decomposition of the sources.
///
/// For magnitudes this realizes the textbook IBM/IRM/Wiener definitions. On
/// the signed real/imaginary parts of the per-part mode, IBM keeps the
/// dominance one-hot of |part|, Wiener the part-power ratio, and IRM the
/// signed amplitude ratio part_k / sum_j part_j clipped to [`PER_PART_CLIP`]
/// (the clipped entries are counted in `stats`). Bins whose parts are all
/// zero get uniform 1/K ratio masks.
fn masks_from_parts<T: Scalar>(
    parts: &[Array2<T>],
    kind: MaskKind,
    stats: &mut ClipStats,
) -> Vec<Array2<T>> {
    let k = parts.len();
    let (frames, bins) = (parts[0].nrows(), parts[0].ncols());
    let uniform = T::one() / T::of_usize(k);
    let mut masks = vec![Array2::zeros((frames, bins)); k];
    for t in 0..frames {
        for f in 0..bins {
            match kind {
                MaskKind::Ibm => {
                    let mut best = 0usize;
                    let mut best_mag = parts[0][(t, f)].abs();
                    for (j, p) in parts.iter().enumerate().skip(1) {
                        let mag = p[(t, f)].abs();
                        if mag > best_mag {
                            best = j;
                            best_mag = mag;
                        }
                    }
                    masks[best][(t, f)] = T::one();
                }
                MaskKind::Irm => {
                    let denom: T = parts.iter().map(|p| p[(t, f)]).sum();
                    if denom == T::zero() {
                        for m in masks.iter_mut() {
                            m[(t, f)] = uniform;
                        }
                    } else {
                        for (j, m) in masks.iter_mut().enumerate() {
                            let ratio = parts[j][(t, f)] / denom;
                            stats.total += 1;
                            let lo = T::of(PER_PART_CLIP.0);
                            let hi = T::of(PER_PART_CLIP.1);
                            let clipped = if ratio < lo {
                                lo
                            } else if ratio > hi {
                                hi
                            } else {
                                ratio
                            };
                            if clipped != ratio {
                                stats.clipped += 1;
                            }
                            m[(t, f)] = clipped;
                        }
                    }
                }
                MaskKind::Wiener => {
                    let denom: T = parts.iter().map(|p| p[(t, f)] * p[(t, f)]).sum();
                    if denom == T::zero() {
                        for m in masks.iter_mut() {
                            m[(t, f)] = uniform;
                        }
                    } else {
                        for (j, m) in masks.iter_mut().enumerate() {
                            let p = parts[j][(t, f)];
                            m[(t, f)] = p * p / denom;
                        }
                    }
                }
            }
        }
    }
    masks
}

/// Applies a mask set to the mixture spectrogram, returning one estimated
/// spectrogram per source.
pub fn apply_mask<T: Scalar>(y: &Spectrogram<T>, masks: &MaskSet<T>) -> Result<Vec<Spectrogram<T>>> {
    let shape = (y.num_frames(), y.num_bins());
    if masks.masks.is_empty() {
        return Err(Error::Contract("mask set is empty".into()));
    }
    if masks
        .masks
        .iter()
        .any(|m| (m.nrows(), m.ncols()) != shape)
    {
        return Err(Error::Contract("mask shape does not match the mixture".into()));
    }
    match masks.mode {
        ApplicationMode::SharedMagnitude => {
            if masks.imag_masks.is_some() {
                return Err(Error::Contract(
                    "shared-magnitude mode must not carry imaginary masks".into(),
                ));
            }
            masks
                .masks
                .iter()
                .map(|m| {
                    let bins = ndarray::Zip::from(&y.bins)
                        .and(m)
                        .map_collect(|&c, &w| c * w);
                    Spectrogram::from_bins(bins, y.config.clone(), y.original_length, y.sample_rate_hz)
                })
                .collect()
        }
        ApplicationMode::PerPart => {
            let imag = masks.imag_masks.as_ref().ok_or_else(|| {
                Error::Contract("per-part mode requires imaginary masks".into())
            })?;
            if imag.len() != masks.masks.len()
                || imag.iter().any(|m| (m.nrows(), m.ncols()) != shape)
            {
                return Err(Error::Contract(
                    "per-part real/imaginary mask counts or shapes differ".into(),
                ));
            }
            masks
                .masks
                .iter()
                .zip(imag.iter())
                .map(|(mr, mi)| {
                    let bins = ndarray::Zip::from(&y.bins)
                        .and(mr)
                        .and(mi)
                        .map_collect(|&c, &wr, &wi| Complex::new(c.re * wr, c.im * wi));
                    Spectrogram::from_bins(bins, y.config.clone(), y.original_length, y.sample_rate_hz)
                })
                .collect()
        }
    }
}
