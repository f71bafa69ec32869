//! `artcloud`: generate workloads, train ART2 networks, and compare
//! on-demand provisioning against ART2-driven pre-allocation.
//!
//! Exit codes: 0 success, 2 malformed input or usage, 3 invalid input,
//! 4 I/O or runtime failure.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use artcloud_core::experiment::Arm;
use artcloud_core::{Art2Params, SimConfig, Slack};
use clap::{Args, Parser, Subcommand};

use crate::commands::{ClusterArgs, CompareArgs, GenArgs, SimulateArgs};
use crate::error::CliError;
use crate::manifest::load_document;

#[derive(Parser)]
#[command(name = "artcloud", version, about = "ART2 pre-allocation experiments for a simulated cloud")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic trace, its labels, request log and session patterns.
    Gen {
        /// Workload spec (TOML, or JSON by extension).
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 2000.0)]
        duration: f64,
        /// Session window used for the pattern vectors.
        #[arg(long, default_value_t = 1000.0)]
        window: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train an ART2 network over session patterns.
    Cluster {
        /// JSON array of {client_id, session_id, values}.
        #[arg(long)]
        patterns: PathBuf,
        #[command(flatten)]
        params: ParamFlags,
        /// Passes over the whole pattern set.
        #[arg(long, default_value_t = 1)]
        epochs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one simulation over a workload file.
    Simulate {
        /// Workload CSV as written by `gen`.
        #[arg(long)]
        workload: PathBuf,
        /// Simulator config (TOML, or JSON by extension).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "art2")]
        arm: Arm,
        #[arg(long, default_value = "tight")]
        slack: Slack,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        catalog: Option<usize>,
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long)]
        startup_delay: Option<f64>,
        #[arg(long)]
        fetch_delay: Option<f64>,
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the replication x duration x arm x slack matrix.
    Compare {
        /// Run manifest (TOML); defaults reproduce the reference matrix.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ParamFlags {
    /// ART2 parameter file (TOML, or JSON by extension).
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    e: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    etp: Option<f64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    max_nodes: Option<usize>,
    #[arg(long)]
    f1_max_iters: Option<usize>,
}

impl ParamFlags {
    fn resolve(self) -> Result<Art2Params, CliError> {
        let mut p: Art2Params = match &self.params {
            Some(path) => load_document(path)?,
            None => Art2Params::default(),
        };
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.a, self.a);
        set(&mut p.b, self.b);
        set(&mut p.c, self.c);
        set(&mut p.d, self.d);
        set(&mut p.e, self.e);
        set(&mut p.theta, self.theta);
        set(&mut p.rho, self.rho);
        set(&mut p.etp, self.etp);
        set(&mut p.learning_rate, self.learning_rate);
        if let Some(v) = self.max_nodes {
            p.max_f2_nodes = v;
        }
        if let Some(v) = self.f1_max_iters {
            p.f1_max_iters = v;
        }
        Ok(p)
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    let stdout = &mut std::io::stdout().lock();
    match command {
        Command::Gen { spec, seed, duration, window, out } => {
            commands::gen(GenArgs { spec, seed, duration, window, out }, stdout)
        }
        Command::Cluster { patterns, params, epochs, out } => {
            let params = params.resolve()?;
            commands::cluster(ClusterArgs { patterns, params, epochs, out }, stdout)
        }
        Command::Simulate {
            workload,
            config,
            arm,
            slack,
            duration,
            catalog,
            rate,
            startup_delay,
            fetch_delay,
            top_k,
            rho,
            out,
        } => {
            let mut config: SimConfig = match &config {
                Some(path) => load_document(path)?,
                None => SimConfig::default(),
            };
            config.duration = duration.unwrap_or(config.duration);
            config.catalog_size = catalog.unwrap_or(config.catalog_size);
            config.rate = rate.unwrap_or(config.rate);
            config.startup_delay = startup_delay.unwrap_or(config.startup_delay);
            config.fetch_delay = fetch_delay.unwrap_or(config.fetch_delay);
            config.prefetch_top_k = top_k.unwrap_or(config.prefetch_top_k);
            config.art2.rho = rho.unwrap_or(config.art2.rho);
            commands::simulate(SimulateArgs { workload, config, arm, slack, out }, stdout)
        }
        Command::Compare { manifest, workers, out } => {
            commands::compare(CompareArgs { manifest, workers, out }, stdout)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("artcloud: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
