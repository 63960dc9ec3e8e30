//! `shortpkt` — analytic curves, optimal designs, Monte Carlo validation,
//! and the adaptive-rate scheme for short-packet detection/decoding
//! tradeoffs, emitted as CSV.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on numerical
//! failures.

mod config;
mod run;

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CommandKind, ConfigError};

#[derive(Parser)]
#[command(name = "shortpkt", version, about = "Short-packet detection/decoding tradeoff toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic error breakdown over an overhead sweep or at a fixed design
    Analyze(CommonArgs),
    /// PER-optimal overhead and threshold per SNR point
    Optimize(CommonArgs),
    /// Seeded Monte Carlo estimate of the PER for a (fixed or optimized) design
    Simulate(CommonArgs),
    /// Adaptive-coding-rate preamble scheme: one codebook per 1 dB interval
    Pragmatic(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat `key = value` config file; command-line flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Packet structure: preamble | superimposed
    #[arg(long)]
    structure: Option<String>,
    /// Packet length N in channel uses
    #[arg(long)]
    n: Option<String>,
    /// Payload size b in bits
    #[arg(long)]
    bits: Option<String>,
    /// Recovery time t_r in channel uses
    #[arg(long)]
    recovery: Option<String>,
    /// SNR grid in dB: a value, a comma list, or start:step:stop
    #[arg(long)]
    snr_db: Option<String>,
    /// Preamble length: odd integer, `sweep`, or `optimize`
    #[arg(long)]
    np: Option<String>,
    /// Detection power fraction: value in (0,1), `sweep`, or `optimize`
    #[arg(long)]
    alpha: Option<String>,
    /// Detection threshold: nonnegative value or `optimize`
    #[arg(long)]
    delta: Option<String>,
    /// Monte Carlo trial count (simulate)
    #[arg(long)]
    trials: Option<String>,
    /// Base seed for the per-trial random streams
    #[arg(long)]
    seed: Option<String>,
    /// Output path, `-` for stdout
    #[arg(long)]
    out: Option<String>,
    /// Keep each anchor's threshold across its interval (pragmatic)
    #[arg(long)]
    freeze_delta: bool,
}

impl CommonArgs {
    /// File values first, flags override.
    fn merged(&self) -> Result<HashMap<String, String>, ConfigError> {
        let mut map = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    ConfigError(format!("cannot read config file {}: {e}", path.display()))
                })?;
                config::parse_file(&text)?
            }
            None => HashMap::new(),
        };
        let overrides = [
            ("structure", &self.structure),
            ("n", &self.n),
            ("bits", &self.bits),
            ("recovery", &self.recovery),
            ("snr_db", &self.snr_db),
            ("np", &self.np),
            ("alpha", &self.alpha),
            ("delta", &self.delta),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("out", &self.out),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                map.insert(key.to_string(), v.clone());
            }
        }
        Ok(map)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Analyze(a) => (CommandKind::Analyze, a),
        Command::Optimize(a) => (CommandKind::Optimize, a),
        Command::Simulate(a) => (CommandKind::Simulate, a),
        Command::Pragmatic(a) => (CommandKind::Pragmatic, a),
    };

    let cfg = match args
        .merged()
        .and_then(|map| config::resolve(kind, &map, args.freeze_delta))
    {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("shortpkt: config error: {e}");
            return ExitCode::from(2);
        }
    };

    let output = match run::execute(&cfg) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("shortpkt: numerical failure: {e}");
            return ExitCode::from(3);
        }
    };

    let write_result = if cfg.out == "-" {
        std::io::stdout().write_all(output.as_bytes())
    } else {
        std::fs::write(&cfg.out, output.as_bytes())
    };
    if let Err(e) = write_result {
        eprintln!("shortpkt: cannot write output to {}: {e}", cfg.out);
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
