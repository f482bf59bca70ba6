//! Reverberant single-channel source-separation test bench.
//!
//! The crate renders seeded two-speaker mixtures in simulated rooms, computes
//! oracle time-frequency masks from the ground-truth source images, separates
//! the mixture by masking an STFT encoder/decoder of sweepable resolution,
//! and scores the result with a BSS-eval/si-SDR/thresholded-SDR/WDO metric
//! suite. All signal math is generic over the scalar type; the type aliases
//! below pin the common f64 and f32 instantiations.

pub mod error;
pub mod scalar;

pub mod masks;
pub mod metrics;
pub mod mtfa;
pub mod roomsim;
pub mod sigio;
pub mod stft;

pub mod bench;

pub use error::{Error, Result};
pub use scalar::{db_capped, Scalar, DB_CAP};

pub type TimeSignal32 = sigio::TimeSignal<f32>;
pub type TimeSignal64 = sigio::TimeSignal<f64>;
pub type Spectrogram32 = stft::Spectrogram<f32>;
pub type Spectrogram64 = stft::Spectrogram<f64>;
pub type ImpulseResponse32 = roomsim::ImpulseResponse<f32>;
pub type ImpulseResponse64 = roomsim::ImpulseResponse<f64>;
pub type MixtureScene32 = roomsim::MixtureScene<f32>;
pub type MixtureScene64 = roomsim::MixtureScene<f64>;
pub type MaskSet32 = masks::MaskSet<f32>;
pub type MaskSet64 = masks::MaskSet<f64>;
