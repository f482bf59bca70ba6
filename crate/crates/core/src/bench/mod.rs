//! Configuration-driven experiment runner: corpus construction, encoder/mask
//! sweeps across anechoic and reverberant conditions, and table emission.

pub mod synth;
mod sweep;

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::masks::{ApplicationMode, MaskKind};
use crate::roomsim::{
    draw_room_geometry, image_method_rir, ImpulseResponse, RoomRandomization, RoomSpec,
};
use crate::scalar::Scalar;
use crate::sigio::{read_wav, TimeSignal};
use crate::stft::{StftConfig, WindowKind};

pub use sweep::{eval_pair, EvalReport, SweepOutputs};
pub use synth::SyntheticKind;

/// Version stamped into every CSV row and JSON report.
pub const SCHEMA_VERSION: u32 = 1;

/// ChaCha12 stream namespace for room geometry draws.
const STREAM_GEOMETRY: u64 = 1 << 41;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    BssSdr,
    SiSdr,
    ThSdrLoss,
    Wdo,
    Mtfa,
}

/// Which signal the metrics score against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// The source convolved with the early part of its RIR.
    Early,
    /// The source convolved with the direct-path-only RIR of the same
    /// geometry (the default: reverberation counts as distortion).
    Anechoic,
    /// The full reverberated image.
    Reverberant,
}

/// Which images the mask oracle observes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskOracleKind {
    /// Full reverberated source images (the mixture's exact decomposition).
    Reverberant,
    /// Early-reverberated images (mirrors training against early targets).
    Early,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub kind: MaskKind,
    pub mode: ApplicationMode,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceSpec {
    /// WAV files; all must share one sample rate.
    Files {
        paths: Vec<PathBuf>,
        #[serde(default)]
        channel: Option<usize>,
    },
    /// Seeded synthetic sources (no external data needed).
    Synthetic {
        count: usize,
        duration_s: f64,
        sample_rate_hz: u32,
        kind: SyntheticKind,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RoomBankConfig {
    /// Number of RIR tuples (geometries) in the bank.
    pub bank_size: usize,
    /// Sources per scene (K).
    pub sources_per_scene: usize,
    pub randomization: RoomRandomization,
    pub max_image_order: i32,
    /// RIR length in seconds; if unset, 0.1 + 1.25 * t60 per condition.
    pub rir_seconds: Option<f64>,
}

impl Default for RoomBankConfig {
    fn default() -> Self {
        Self {
            bank_size: 6,
            sources_per_scene: 2,
            randomization: RoomRandomization::default(),
            max_image_order: -1,
            rir_seconds: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    pub sources: SourceSpec,
    pub rooms: RoomBankConfig,
    pub scene_count: usize,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            sources: SourceSpec::Synthetic {
                count: 12,
                duration_s: 2.5,
                sample_rate_hz: 8000,
                kind: SyntheticKind::SpeechLike,
            },
            rooms: RoomBankConfig::default(),
            scene_count: 50,
            seed: 7240,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub corpus: CorpusConfig,
    pub sweep: Vec<StftConfig>,
    pub masks: Vec<MaskSpec>,
    /// T60 per condition in seconds; 0 selects the anechoic variant of the
    /// same simulation.
    pub conditions: Vec<f64>,
    /// When set, white Gaussian noise at this SNR is added to every estimate
    /// before metric evaluation (off by default; 25 dB is the paper setting).
    pub noise_snr_db: Option<f64>,
    pub metrics: Vec<MetricKind>,
    pub target: TargetKind,
    pub mask_oracle: MaskOracleKind,
    /// Early/late split point after the direct-path peak, in milliseconds.
    pub target_boundary_ms: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let sweep = [(16, 8), (256, 8), (256, 16), (256, 64), (512, 16), (512, 128)]
            .into_iter()
            .map(|(w, r)| StftConfig::new(w, r, WindowKind::SqrtHann).expect("valid sweep config"))
            .collect();
        Self {
            corpus: CorpusConfig::default(),
            sweep,
            masks: vec![
                MaskSpec {
                    kind: MaskKind::Ibm,
                    mode: ApplicationMode::SharedMagnitude,
                },
                MaskSpec {
                    kind: MaskKind::Irm,
                    mode: ApplicationMode::SharedMagnitude,
                },
                MaskSpec {
                    kind: MaskKind::Wiener,
                    mode: ApplicationMode::SharedMagnitude,
                },
                MaskSpec {
                    kind: MaskKind::Irm,
                    mode: ApplicationMode::PerPart,
                },
            ],
            conditions: vec![0.0, 0.3],
            noise_snr_db: None,
            metrics: vec![
                MetricKind::BssSdr,
                MetricKind::SiSdr,
                MetricKind::ThSdrLoss,
                MetricKind::Wdo,
            ],
            target: TargetKind::Anechoic,
            mask_oracle: MaskOracleKind::Reverberant,
            target_boundary_ms: 50.0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep.is_empty() {
            return Err(Error::Config("sweep must name at least one STFT config".into()));
        }
        if self.masks.is_empty() {
            return Err(Error::Config("at least one mask kind/mode".into()));
        }
        if self.conditions.is_empty() {
            return Err(Error::Config("at least one T60 condition".into()));
        }
        if self.conditions.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
            return Err(Error::Config("conditions must be finite and >= 0".into()));
        }
        if self.corpus.scene_count == 0 {
            return Err(Error::Config("scene count must be positive".into()));
        }
        if self.corpus.rooms.sources_per_scene < 2 {
            return Err(Error::Config("scenes need at least two sources".into()));
        }
        if self.corpus.rooms.bank_size == 0 {
            return Err(Error::Config("RIR bank must be nonempty".into()));
        }
        if let Some(snr) = self.noise_snr_db {
            if !snr.is_finite() {
                return Err(Error::Config("noise_snr_db must be finite".into()));
            }
        }
        if !(self.target_boundary_ms >= 0.0) {
            return Err(Error::Config("target_boundary_ms must be >= 0".into()));
        }
        match &self.corpus.sources {
            SourceSpec::Files { paths, .. } => {
                if paths.len() < self.corpus.rooms.sources_per_scene {
                    return Err(Error::Config("source pool smaller than sources per scene".into()));
                }
            }
            SourceSpec::Synthetic { count, duration_s, sample_rate_hz, .. } => {
                if *count < self.corpus.rooms.sources_per_scene {
                    return Err(Error::Config("source pool smaller than sources per scene".into()));
                }
                if !(*duration_s > 0.0) || *sample_rate_hz == 0 {
                    return Err(Error::Config("synthetic sources need a positive duration and rate".into()));
                }
            }
        }
        Ok(())
    }

    fn rir_length(&self, t60: f64, sample_rate_hz: u32) -> usize {
        let seconds = self
            .corpus
            .rooms
            .rir_seconds
            .unwrap_or(0.1 + 1.25 * t60);
        (seconds * sample_rate_hz as f64).ceil() as usize
    }
}

/// Materialized corpus: the source pool plus, per condition, a bank of RIR
/// tuples rendered from shared geometries, and the direct-path renders of
/// the same geometries for anechoic references.
pub struct Corpus<T> {
    pub pool: Vec<TimeSignal<T>>,
    /// `banks[condition][tuple][source_slot]`
    pub banks: Vec<Vec<Vec<ImpulseResponse<T>>>>,
    /// `direct[tuple][source_slot]`, rendered with t60 = 0.
    pub direct: Vec<Vec<ImpulseResponse<T>>>,
    pub sample_rate_hz: u32,
}

/// Loads or synthesizes the source pool (RMS-normalized) and renders every
/// RIR bank. Geometries depend only on the seed, never on the condition, so
/// conditions differ in T60 alone.
pub fn materialize_corpus<T: Scalar>(cfg: &ExperimentConfig) -> Result<Corpus<T>> {
    cfg.validate()?;
    let pool: Vec<TimeSignal<T>> = match &cfg.corpus.sources {
        SourceSpec::Files { paths, channel } => {
            let mut pool = Vec::with_capacity(paths.len());
            let mut missing = Vec::new();
            for p in paths {
                if !p.exists() {
                    missing.push(p.display().to_string());
                }
            }
            if !missing.is_empty() {
                return Err(Error::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("missing source files: {}", missing.join(", ")),
                )));
            }
            for p in paths {
                let mut s: TimeSignal<T> = read_wav(p, *channel)?;
                let rms = s.rms().to_f64().unwrap();
                if rms <= 0.0 {
                    return Err(Error::Contract(format!("silent source file {}", p.display())));
                }
                let scale = T::of(synth::SOURCE_RMS / rms);
                for v in s.samples.iter_mut() {
                    *v = *v * scale;
                }
                pool.push(s);
            }
            let rate = pool[0].sample_rate_hz;
            if pool.iter().any(|s| s.sample_rate_hz != rate) {
                return Err(Error::Contract("source files must share one sample rate".into()));
            }
            pool
        }
        SourceSpec::Synthetic {
            count,
            duration_s,
            sample_rate_hz,
            kind,
        } => synth::synthesize_pool(*count, *duration_s, *sample_rate_hz, *kind, cfg.corpus.seed)?,
    };
    let sample_rate_hz = pool[0].sample_rate_hz;

    let k = cfg.corpus.rooms.sources_per_scene;
    let mut geometry_rng = ChaCha12Rng::seed_from_u64(cfg.corpus.seed);
    geometry_rng.set_stream(STREAM_GEOMETRY);
    let geometries: Vec<_> = (0..cfg.corpus.rooms.bank_size)
        .map(|_| draw_room_geometry(&mut geometry_rng, &cfg.corpus.rooms.randomization, k))
        .collect();

    let render = |t60: f64| -> Result<Vec<Vec<ImpulseResponse<T>>>> {
        geometries
            .iter()
            .map(|(dims, sources, mic)| {
                let spec = RoomSpec {
                    dimensions: *dims,
                    source_positions: sources.clone(),
                    mic_position: *mic,
                    t60,
                    sample_rate_hz,
                    rir_length: cfg.rir_length(t60, sample_rate_hz),
                    max_image_order: cfg.corpus.rooms.max_image_order,
                };
                (0..k).map(|s| image_method_rir(&spec, s)).collect()
            })
            .collect()
    };

    let banks = cfg
        .conditions
        .iter()
        .map(|&t60| render(t60))
        .collect::<Result<Vec<_>>>()?;
    let direct = render(0.0)?;

    Ok(Corpus {
        pool,
        banks,
        direct,
        sample_rate_hz,
    })
}

/// Runs the full sweep and writes per-scene CSV rows, the aggregated
/// summary CSV and a JSON summary under `out_dir`. `jobs` bounds the worker
/// pool; results are identical for any job count.
pub fn run_sweep(cfg: &ExperimentConfig, out_dir: &Path, jobs: usize) -> Result<SweepOutputs> {
    sweep::run_sweep(cfg, out_dir, jobs)
}

/// Renders every scene of every condition to WAV files plus a JSON-lines
/// manifest. Rebuilding with the same config and seed reproduces the bytes.
pub fn build_corpus(cfg: &ExperimentConfig, out_dir: &Path) -> Result<PathBuf> {
    sweep::build_corpus(cfg, out_dir)
}

/// Writes the MTFA error table (window size x T60) as CSV plus a
/// human-readable summary. Requires at least one reverberant condition.
pub fn report_mtfa(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    sweep::report_mtfa(cfg, out_dir)
}
