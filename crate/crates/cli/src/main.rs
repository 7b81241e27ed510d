//! `chainproof` command-line front end.

mod commands;
mod error;
mod output;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use chainproof::Mode;
use clap::{Args, Parser, Subcommand};

use crate::error::{CliError, ExitKind};
use crate::output::Format;

/// Exact analysis of discrete-time Markov chains, with the ZeroConf and
/// Crowds case studies built in.
#[derive(Parser, Debug)]
#[command(name = "chainproof", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Exact rational arithmetic (the default).
    #[arg(long, global = true, conflicts_with = "float")]
    pub exact: bool,
    /// Floating-point arithmetic.
    #[arg(long, global = true)]
    pub float: bool,
    /// Print the report as JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// Print the report as CSV.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    pub timing: bool,
    /// Default arithmetic mode when neither --exact nor --float is given.
    #[arg(long, env = "CHAINPROOF_MODE", default_value = "exact", hide = true, global = true)]
    pub default_mode: String,
}

impl GlobalOpts {
    pub fn mode(&self) -> Result<Mode, CliError> {
        if self.exact {
            return Ok(Mode::Exact);
        }
        if self.float {
            return Ok(Mode::Float);
        }
        self.default_mode
            .parse()
            .map_err(|_| CliError::usage(format!("CHAINPROOF_MODE=`{}` is not exact or float", self.default_mode)))
    }

    pub fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else if self.csv {
            Format::Csv
        } else {
            Format::Table
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Until probability, zero/almost-sure verdicts and expected cost.
    Solve(SolveArgs),
    /// ZeroConf address allocation: closed forms next to solver values.
    Zeroconf(ZeroconfArgs),
    /// Crowds anonymity: closed forms, probable innocence, information leak.
    Crowds(CrowdsArgs),
    /// Monte Carlo estimate of an until event, a cost, or Crowds routes.
    Simulate(SimulateArgs),
    /// Check a model file.
    Validate(ValidateArgs),
    /// Print a preset as a model file.
    Export(ExportArgs),
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Model file, or a preset such as `zeroconf:paper-typical`.
    pub model: String,
    /// `PHI=>PSI`, each a comma-separated label list or `ALL`.
    #[arg(long)]
    pub until: String,
    #[arg(long, default_value = "Start")]
    pub start: String,
    /// Also compute the expected cost accumulated before reaching PHI.
    #[arg(long, value_name = "PHI")]
    pub cost: Option<String>,
}

#[derive(Args, Debug)]
pub struct ZeroconfArgs {
    /// Starting values for unspecified parameters.
    #[arg(long, default_value = "paper-typical", value_parser = ["paper-typical"])]
    pub preset: String,
    /// Index N of the last probe (N + 1 probes in total).
    #[arg(long)]
    pub probes: Option<String>,
    /// Probability a probe or its reply is lost.
    #[arg(long)]
    pub p: Option<String>,
    /// Probability the chosen address is in use.
    #[arg(long, conflicts_with = "hosts")]
    pub q: Option<String>,
    /// Number of configured hosts; sets q = hosts/65024.
    #[arg(long)]
    pub hosts: Option<String>,
    /// Cost of one probe round.
    #[arg(long)]
    pub r: Option<String>,
    /// Cost of an address collision.
    #[arg(long = "E")]
    pub e: Option<String>,
    /// Parameter grid, e.g. `p=1/100,1/10;probes=1,2,3`. One CSV row per point.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Add Monte Carlo estimates of P_err and the expected cost.
    #[arg(long)]
    pub simulate: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
}

#[derive(Args, Debug)]
pub struct CrowdsArgs {
    /// Total number of jondos J.
    #[arg(long)]
    pub jondos: Option<String>,
    /// Number of collaborators.
    #[arg(long)]
    pub colls: Option<String>,
    /// Forwarding probability.
    #[arg(long)]
    pub pf: Option<String>,
    /// JSON object mapping honest jondo labels (J1, J2, ...) to initiator
    /// probabilities.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Parameter grid over `jondos`, `colls`, `pf`.
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Model file or preset (`zeroconf:paper-typical`, `crowds:fig3`,
    /// `zeroconf:probes=1,p=1/2,q=1/2`, ...).
    pub model: String,
    #[arg(long, default_value = "Start")]
    pub start: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = chainproof::simulate::DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
    /// `until:PHI=>PSI`, `cost:PHI`, or `routes` (Crowds presets only).
    #[arg(long)]
    pub event: String,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    pub model: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    /// `zeroconf:...` or `crowds:...` preset.
    pub preset: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { ExitKind::Usage.code() as u8 } else { 0 });
        }
    };
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(&cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            output::print_error(&e, cli.global.format());
            ExitCode::from(e.kind.code() as u8)
        }
    }
}
