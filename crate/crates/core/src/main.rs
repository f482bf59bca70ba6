use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use revsep::bench::{self, ExperimentConfig};
use revsep::Error;

#[derive(Parser)]
#[command(name = "revsep", version, about = "Reverberant source-separation test bench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Experiment config (JSON); the built-in default synthetic experiment
    /// is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the corpus seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Restricts the run to these T60 conditions (repeatable).
    #[arg(long = "condition")]
    conditions: Vec<f64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Render scenes to WAV files plus a JSON-lines manifest.
    BuildCorpus {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep encoder geometries and mask types; emit CSV/JSON tables.
    RunSweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Worker threads (default: all cores). Results do not depend on it.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Add white Gaussian noise at this SNR (dB) to every estimate
        /// before metric evaluation; pass the flag alone for 25 dB.
        #[arg(long, num_args = 0..=1, default_missing_value = "25")]
        noise_snr_db: Option<f64>,
    },
    /// Tabulate the transfer-function approximation error per window/T60.
    ReportMtfa {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Score a single estimate WAV against a reference WAV.
    Eval {
        #[arg(long)]
        estimate: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        /// BSS-eval distortion filter length in samples.
        #[arg(long, default_value_t = 512)]
        filter_taps: usize,
        /// Channel to read from multichannel files.
        #[arg(long)]
        channel: Option<usize>,
    },
}

fn load_config(common: &CommonArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.corpus.seed = seed;
    }
    if !common.conditions.is_empty() {
        cfg.conditions = common.conditions.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::BuildCorpus { common } => {
            let cfg = load_config(&common)?;
            let manifest = bench::build_corpus(&cfg, &common.out)?;
            println!("wrote {}", manifest.display());
        }
        Command::RunSweep {
            common,
            jobs,
            noise_snr_db,
        } => {
            let mut cfg = load_config(&common)?;
            if noise_snr_db.is_some() {
                cfg.noise_snr_db = noise_snr_db;
            }
            let outputs = bench::run_sweep(&cfg, &common.out, jobs)?;
            println!("wrote {}", outputs.per_scene_csv.display());
            println!("wrote {}", outputs.summary_csv.display());
            println!("wrote {}", outputs.summary_json.display());
        }
        Command::ReportMtfa { common } => {
            let cfg = load_config(&common)?;
            let (csv, txt) = bench::report_mtfa(&cfg, &common.out)?;
            println!("wrote {}", csv.display());
            println!("wrote {}", txt.display());
        }
        Command::Eval {
            estimate,
            reference,
            filter_taps,
            channel,
        } => {
            let report = bench::eval_pair(&estimate, &reference, filter_taps, channel)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
