//! `gama`: decomposition dumps, synthetic logs, training, evaluation, latency
//! benchmarks and wavelet sweeps from one binary.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "gama", version, about = "Wavelet exposure-sequence encoder experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` config file; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_name = "U64")]
    seed: Option<String>,

    /// Wavelet base: haar, db2, db3, db4, coif1, coif2, coif3.
    #[arg(long, global = true, value_name = "NAME")]
    base: Option<String>,

    /// Decomposition level J.
    #[arg(long, global = true, value_name = "J")]
    level: Option<String>,

    #[arg(long, global = true, value_name = "avg|att")]
    aggregator: Option<String>,

    #[arg(long, global = true, value_name = "on|off")]
    gate: Option<String>,

    /// Kept components, e.g. `d1,d2,a3`.
    #[arg(long, global = true, value_name = "LIST")]
    keep: Option<String>,

    #[arg(long, global = true, value_name = "N")]
    exposure_len: Option<String>,

    /// Output file or directory.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Any other config key, repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decompose a d×N signal CSV into wavelet components.
    Decompose {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "periodic|zero")]
        boundary: Option<String>,
    },
    /// Write a synthetic interaction log.
    Synth,
    /// Train a model and save a checkpoint.
    Train {
        /// Interaction log CSV; a synthetic log is generated when absent.
        #[arg(long, value_name = "PATH")]
        log: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on the full and cold test splits.
    Eval {
        #[arg(long, value_name = "PATH")]
        model: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        log: Option<PathBuf>,
        /// Base-model AUC for RelaImpr.
        #[arg(long, value_name = "AUC")]
        base_auc: Option<f64>,
        /// Report RelaImpr for this AUC instead of evaluating a model.
        #[arg(long, value_name = "AUC")]
        auc: Option<f64>,
    },
    /// Time the encoders over several sequence lengths.
    Bench,
    /// Train the wavelet model for every base and level on one synthetic log.
    Sweep,
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let flags = [
        ("seed", &cli.seed),
        ("base", &cli.base),
        ("level", &cli.level),
        ("aggregator", &cli.aggregator),
        ("gate", &cli.gate),
        ("keep", &cli.keep),
        ("exposure_len", &cli.exposure_len),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            config.set(key, v)?;
        }
    }
    if let Command::Decompose { boundary: Some(b), .. } = &cli.command {
        config.set("boundary", b)?;
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        config.set(k.trim(), v.trim())?;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = resolve(&cli)?;
    let out = |default: &str| cli.out.clone().unwrap_or_else(|| PathBuf::from(default));
    match &cli.command {
        Command::Decompose { input, .. } => commands::decompose_cmd(&config, input, &out("decomposition")),
        Command::Synth => commands::synth_cmd(&config, &out("synth.csv")),
        Command::Train { log } => commands::train_cmd(&config, log.as_deref(), &out("model.gama")),
        Command::Eval {
            model,
            log,
            base_auc,
            auc,
        } => commands::eval_cmd(
            &config,
            model.as_deref(),
            log.as_deref(),
            *auc,
            *base_auc,
            cli.out.as_deref(),
        ),
        Command::Bench => commands::bench_cmd(&config, &out("bench.csv")),
        Command::Sweep => commands::sweep_cmd(&config, &out("sweep.csv")),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gama: {e}");
            e.exit_code()
        }
    }
}
