//! `mcle` — reproducible simulation studies for cubic-surrogate likelihood
//! inference.
//!
//! Every run writes a `manifest.txt` echoing the fully resolved
//! configuration (defaults and seed included); feeding that manifest back
//! through `--config` reproduces the outputs byte for byte, at any
//! `--threads` setting.

mod config;
mod run;

use std::fs;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;

use config::{parse_config, RunConfig, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "mcle", version, about = "Simulation-based likelihood inference studies")]
struct Cli {
    /// Study to run: fit | scale | figure1 | rlan-check | snr
    subcommand: Subcommand,

    /// Path to the run configuration (key = value lines with [section] headers)
    #[arg(long)]
    config: String,

    /// Output directory (overrides [output] dir)
    #[arg(long)]
    out: Option<String>,

    /// Master seed (overrides the config seed)
    #[arg(long)]
    seed: Option<u64>,

    /// Worker thread cap; 0 means the library default. Results are identical
    /// for any value.
    #[arg(long)]
    threads: Option<usize>,
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let text = fs::read_to_string(&cli.config)
        .with_context(|| format!("reading config {}", cli.config))?;
    let mut cfg = parse_config(&text).with_context(|| format!("parsing {}", cli.config))?;
    match cfg.subcommand {
        Some(sub) if sub != cli.subcommand => {
            bail!("config names subcommand `{}` but `{}` was invoked", sub.name(), cli.subcommand.name())
        }
        _ => cfg.subcommand = Some(cli.subcommand),
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match resolve(&cli).and_then(|cfg| run::run(&cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
