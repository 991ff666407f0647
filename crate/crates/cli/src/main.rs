//! `olgdebt`: steady states, analytic multipliers, perfect-foresight
//! experiments and the empirical calibration from the command line.

mod commands;
mod config;
mod reference;

use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, ColorChoice, CommandFactory, FromArgMatches, Parser, Subcommand};

use olgdebt_core::linear::SweepAxis;
use olgdebt_core::{Instrument, MultiplierMethod, PlanKind, PreferenceKind, Regime, Scenario};

#[derive(Debug, Parser)]
#[command(name = "olgdebt", version, about = "Debt multipliers in a New Keynesian model with finitely lived households")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

/// Flags shared by every subcommand; they override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON experiment configuration.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Preference kind: loglog or ghh.
    #[arg(long, global = true)]
    pub pref: Option<PreferenceKind>,
    /// Survival probability.
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Steady-state debt over quarterly output (2.4 is 60% of annual output).
    #[arg(long, global = true)]
    pub by: Option<f64>,
    /// Persistence of the short-run state in the linear model.
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// Fiscal plan: none, temporary or permanent.
    #[arg(long, global = true)]
    pub plan: Option<PlanKind>,
    /// Regime: normal or zlb.
    #[arg(long, global = true)]
    pub regime: Option<Regime>,
    /// Recession scenario: normal or zlb.
    #[arg(long, global = true)]
    pub scenario: Option<Scenario>,
    /// Multiplier method: local or full_step.
    #[arg(long, global = true)]
    pub method: Option<MultiplierMethod>,
    /// Simulation horizon in quarters.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Worker threads for grid evaluation.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Print the zero-inflation steady state as JSON.
    Ss,
    /// Print the eight closed-form multipliers for one mu.
    Multiplier,
    /// Print the largest determinate mu per preference kind and regime.
    Determinacy,
    /// Write a CSV of analytic multipliers along a parameter grid.
    Sweep {
        /// Axis: q, debt_to_gdp (quarterly) or mu.
        #[arg(long)]
        axis: Option<SweepAxis>,
        /// Comma-separated grid.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        /// Instrument: debt or spending.
        #[arg(long, default_value = "debt")]
        instrument: Instrument,
    },
    /// Write a simulated path as CSV.
    Simulate {
        #[command(flatten)]
        shock: ShockArgs,
    },
    /// Write the multiplier report of one experiment as JSON.
    Experiment {
        #[command(flatten)]
        shock: ShockArgs,
    },
    /// Hold the shock fixed and vary the initial debt ratio; writes CSV.
    DebtLevels {
        /// Comma-separated annual debt ratios; the shock is calibrated at the first.
        #[arg(long, value_delimiter = ',', default_value = "0.6,0.8,1.0,1.12,1.2,1.5,2.0")]
        levels: Vec<f64>,
        /// Impact output drop the shock is calibrated to.
        #[arg(long, default_value_t = Scenario::ZLB_OUTPUT_DROP)]
        drop: f64,
        /// Quarters of responses written per level.
        #[arg(long, default_value_t = 20)]
        periods: usize,
    },
    /// Fit the debt/real-rate line to a country panel.
    FitData {
        /// CSV with header country,debt_to_gdp,real_rate[,n_years].
        #[arg(long, value_name = "FILE")]
        data: PathBuf,
    },
    /// Fit the line and solve for (beta, q) matching it at 60% and 100% debt.
    Calibrate {
        #[arg(long, value_name = "FILE")]
        data: PathBuf,
    },
    /// Recompute the multiplier table, thresholds and rate anchors and compare
    /// them with the reference values.
    Repro,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ShockArgs {
    /// Calibrate the shock to this impact output drop.
    #[arg(long, conflicts_with = "shock_size")]
    pub drop: Option<f64>,
    /// Per-quarter growth of the preference shifter during the recession.
    #[arg(long)]
    pub shock_size: Option<f64>,
    /// Recession length in quarters.
    #[arg(long)]
    pub length: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(olgdebt_core::Error),
}

impl From<olgdebt_core::Error> for CliError {
    fn from(e: olgdebt_core::Error) -> Self {
        CliError::Domain(e)
    }
}

fn color_allowed() -> bool {
    std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty())
}

fn main() -> ExitCode {
    let color = color_allowed();
    let mut cmd = Cli::command();
    if !color {
        cmd = cmd.color(ColorChoice::Never);
    }
    let cli = cmd
        .try_get_matches()
        .and_then(|m| Cli::from_arg_matches(&m))
        .unwrap_or_else(|e| e.exit());

    let label = |text: &str| {
        if color && std::io::stderr().is_terminal() {
            format!("\x1b[1;31m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("{}: {msg}", label("usage error"));
            eprintln!("run `olgdebt --help` or `olgdebt <command> --help` for valid flags");
            ExitCode::from(2)
        }
        Err(CliError::Domain(e)) => {
            eprintln!("{}: {}: {e}", label("error"), e.name());
            ExitCode::from(1)
        }
    }
}
