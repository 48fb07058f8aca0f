//! `softgrand` — Monte Carlo driver for GRAND soft-output experiments.
//!
//! Both subcommands accept an optional TOML config; any flag given on the
//! command line overrides the corresponding config value. Without a config,
//! flags and built-in defaults describe the whole experiment.

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use softgrand::decoder::DecodeMode;
use softgrand::sim::{
    run_to_csv, ChannelSpec, CodeFamily, CodeSpec, DecoderSpec, ExperimentConfig, ExperimentKind, ExperimentSpec,
};
use softgrand::softoutput::Estimator;

const DEFAULT_TRIALS: u64 = 10_000;

#[derive(Parser)]
#[command(name = "softgrand", version, about = "GRAND decoding with soft output: calibration and erasure experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bin predicted error probabilities against observed decoding errors.
    Calibrate(CommonArgs),
    /// Block and undetected error rates under erasure thresholds.
    Erasure(CommonArgs),
    /// Print the fully resolved config as TOML instead of running it.
    ShowConfig {
        #[arg(value_enum)]
        kind: Kind,
        #[command(flatten)]
        args: CommonArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Calibrate,
    Erasure,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Rlc,
    Crc,
    Ebch,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Soft,
    Hard,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML experiment config.
    #[arg(short, long)]
    config: Option<PathBuf>,

    /// Code family.
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(short = 'n', long)]
    n: Option<usize>,
    #[arg(short = 'k', long)]
    k: Option<usize>,
    /// Seed used to draw a random linear code.
    #[arg(long)]
    code_seed: Option<u64>,
    /// CRC generator polynomial in full form, e.g. 0x14d.
    #[arg(long, value_parser = parse_u64)]
    poly: Option<u64>,
    /// Parity-check matrix file for `--family file`.
    #[arg(long)]
    code_file: Option<PathBuf>,

    /// Comma-separated Eb/N0 points in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ebn0: Option<Vec<f64>>,
    /// Channel noise seed.
    #[arg(long)]
    seed: Option<u64>,

    /// List size L.
    #[arg(short = 'L', long = "list-size")]
    list_size: Option<usize>,
    #[arg(long)]
    max_queries: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,

    /// Trials per Eb/N0 point.
    #[arg(short, long)]
    trials: Option<u64>,
    /// Comma-separated estimators: exact, approx_list, approx_single, forney.
    #[arg(long, value_delimiter = ',', value_parser = parse_estimator)]
    estimators: Option<Vec<Estimator>>,
    /// Number of uniform calibration bins on [0, 1].
    #[arg(long)]
    bins: Option<usize>,
    /// Explicit comma-separated bin edges; overrides --bins.
    #[arg(long, value_delimiter = ',')]
    bin_edges: Option<Vec<f64>>,
    /// Bins with fewer samples are not reported.
    #[arg(long)]
    min_bin_count: Option<u64>,
    /// Comma-separated erasure thresholds.
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// Add detection-only baseline rows to erasure output.
    #[arg(long)]
    detection_baseline: bool,

    /// CSV destination; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_u64(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid integer {s:?}: {e}"))
}

fn parse_estimator(s: &str) -> Result<Estimator, String> {
    Estimator::parse(s).ok_or_else(|| format!("unknown estimator {s:?}"))
}

fn base_config(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        code: CodeSpec { family: CodeFamily::Rlc, n: 64, k: 57, seed: 0, poly: None, path: None },
        channel: ChannelSpec { ebn0_db: vec![2.0, 4.0], seed: 0 },
        decoder: DecoderSpec::default(),
        experiment: ExperimentSpec {
            kind,
            trials: DEFAULT_TRIALS,
            estimators: vec![Estimator::ApproxSingle],
            bins: 20,
            bin_edges: None,
            min_bin_count: 50,
            epsilons: vec![0.025, 0.1, 0.5],
            detection_baseline: false,
        },
        output: None,
        threads: None,
    }
}

fn resolve(kind: ExperimentKind, args: CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let cfg: ExperimentConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            if cfg.experiment.kind != kind {
                bail!("{} describes a {:?} experiment", path.display(), cfg.experiment.kind);
            }
            cfg
        }
        None => base_config(kind),
    };

    if let Some(f) = args.family {
        cfg.code.family = match f {
            Family::Rlc => CodeFamily::Rlc,
            Family::Crc => CodeFamily::Crc,
            Family::Ebch => CodeFamily::Ebch,
            Family::File => CodeFamily::File,
        };
    }
    set(&mut cfg.code.n, args.n);
    set(&mut cfg.code.k, args.k);
    set(&mut cfg.code.seed, args.code_seed);
    if args.poly.is_some() {
        cfg.code.poly = args.poly;
    }
    if args.code_file.is_some() {
        cfg.code.path = args.code_file;
    }
    set(&mut cfg.channel.ebn0_db, args.ebn0);
    set(&mut cfg.channel.seed, args.seed);
    set(&mut cfg.decoder.list_size, args.list_size);
    set(&mut cfg.decoder.max_queries, args.max_queries);
    if let Some(m) = args.mode {
        cfg.decoder.mode = match m {
            Mode::Soft => DecodeMode::Soft,
            Mode::Hard => DecodeMode::Hard,
        };
    }
    let exp = &mut cfg.experiment;
    set(&mut exp.trials, args.trials);
    set(&mut exp.estimators, args.estimators);
    if let Some(b) = args.bins {
        exp.bins = b;
        exp.bin_edges = None;
    }
    if args.bin_edges.is_some() {
        exp.bin_edges = args.bin_edges;
    }
    set(&mut exp.min_bin_count, args.min_bin_count);
    set(&mut exp.epsilons, args.epsilons);
    exp.detection_baseline |= args.detection_baseline;
    if args.output.is_some() {
        cfg.output = args.output;
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }

    cfg.validate()?;
    Ok(cfg)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn run(cli: Cli) -> Result<()> {
    let (kind, args) = match cli.command {
        Command::Calibrate(a) => (ExperimentKind::Calibration, a),
        Command::Erasure(a) => (ExperimentKind::Erasure, a),
        Command::ShowConfig { kind, args } => {
            let kind = match kind {
                Kind::Calibrate => ExperimentKind::Calibration,
                Kind::Erasure => ExperimentKind::Erasure,
            };
            print!("{}", resolve(kind, args)?.to_toml());
            return Ok(());
        }
    };
    let cfg = resolve(kind, args)?;
    let start = Instant::now();
    run_to_csv(&cfg, &mut io::stdout().lock())?;
    eprintln!(
        "{:?}: {} trials x {} point(s) in {:.1}s",
        kind,
        cfg.experiment.trials,
        cfg.channel.ebn0_db.len(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
