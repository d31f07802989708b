//! `voc`: batch front end for Volterra advertising control experiments.
//!
//! Exit codes: 0 success, 2 configuration or parameter error, 3 numeric
//! range or domain error, 4 simulation error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_order, Order, Overrides, RunConfig};
use output::Output;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<voc_core::Error> for Failure {
    fn from(e: voc_core::Error) -> Self {
        use voc_core::Error::*;
        let code = match e {
            InvalidParameter(_) | MetadataRequired(_) => 2,
            Domain(_) | NumericRange(_) => 3,
            Simulation(_) => 4,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "voc",
    version,
    about = "Near-optimal advertising controls for Volterra goodwill models"
)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Bernstein degree; replaces approx.n and approx.n_list.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Truncation order, an integer or "auto".
    #[arg(long, global = true, value_parser = parse_order)]
    m: Option<Order>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    n_paths: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Bernstein approximation of the kernel and its error against the bound.
    KernelApprox,
    /// Truncated control polynomial and predicted optimal value.
    Control,
    /// Sample paths under the approximate control and under zero control.
    Simulate,
    /// Objective gap to the discretized oracle along approx.n_list.
    Convergence,
    /// Discretized LQ optimum compared with the control polynomial.
    Oracle,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("VOC_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        Failure::config(format!(
            "VOC_THREADS must be a positive integer, got \"{raw}\""
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::config(format!("cannot size thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    cfg.apply(&Overrides {
        output_dir: cli.output_dir,
        seed: cli.seed,
        n: cli.n,
        order: cli.m,
        dt: cli.dt,
        n_paths: cli.n_paths,
    });
    let out = Output::create(&cfg.output.dir)?;
    match cli.command {
        Command::KernelApprox => commands::kernel_approx(&cfg, &out),
        Command::Control => commands::control(&cfg, &out),
        Command::Simulate => commands::simulate(&cfg, &out),
        Command::Convergence => commands::convergence(&cfg, &out),
        Command::Oracle => commands::oracle(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
