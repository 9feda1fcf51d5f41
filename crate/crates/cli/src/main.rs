//! `diagnet`: simulate diagonal linear networks and solve the matching
//! max-margin problems from the command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{ObjectiveKind, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "diagnet", version, about = "Diagonal linear network simulator and max-margin solvers")]
struct Cli {
    #[command(flatten)]
    common: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run gradient descent and write the trajectory.
    Simulate {
        /// Record tangent-kernel distance from initialization.
        #[arg(long)]
        kernel_distance: bool,
        /// Check the stability condition on the finished run.
        #[arg(long)]
        condition: bool,
    },
    /// Solve one max-margin problem.
    Solve {
        #[arg(long, value_enum)]
        objective: Option<ObjectiveKind>,
        /// Start for the lq objective, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        start: Option<Vec<f64>>,
    },
    /// Trace the Q_mu solutions over a log-spaced mu grid.
    Path {
        #[arg(long)]
        mu_max: Option<f64>,
        #[arg(long)]
        mu_min: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Run a grid of depths, scales and stopping rules.
    Sweep {
        #[arg(long)]
        keep_trajectories: bool,
    },
    /// Check the stability condition on a saved trajectory.
    CheckCondition {
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[arg(long)]
        rho0: Option<f64>,
        /// γ̃ window as LO,HI.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        window: Option<Vec<f64>>,
        /// Reference direction, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        w_hat: Option<Vec<f64>>,
    },
    /// Simulate and report tangent-kernel distance from initialization.
    KernelDistance {
        #[arg(long, value_delimiter = ',')]
        threshold: Option<Vec<f64>>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::resolve(&cli.common)?;
    match cli.command {
        Command::Simulate { kernel_distance, condition } => {
            cfg.metrics.kernel_distance |= kernel_distance;
            cfg.metrics.condition |= condition;
            commands::simulate(&cfg)
        }
        Command::Solve { objective, start } => {
            if let Some(o) = objective {
                cfg.solve.objective = o;
            }
            if start.is_some() {
                cfg.solve.start = start;
            }
            commands::solve(&cfg)
        }
        Command::Path { mu_max, mu_min, points } => {
            cfg.path.mu_max = mu_max.unwrap_or(cfg.path.mu_max);
            cfg.path.mu_min = mu_min.unwrap_or(cfg.path.mu_min);
            cfg.path.points = points.unwrap_or(cfg.path.points);
            commands::path(&cfg)
        }
        Command::Sweep { keep_trajectories } => {
            cfg.sweep.keep_trajectories |= keep_trajectories;
            if let Some(d) = cli.common.depth {
                cfg.sweep.depths = vec![d];
            }
            if let Some(a) = cli.common.alpha {
                cfg.sweep.alphas = vec![a];
            }
            if cli.common.gamma_tilde.is_some() || cli.common.mu.is_some() {
                cfg.sweep.gamma_tildes.clear();
                cfg.sweep.mus.clear();
            }
            commands::sweep(&cfg)
        }
        Command::CheckCondition { trajectory, rho0, window, w_hat } => {
            if trajectory.is_some() {
                cfg.condition.trajectory = trajectory;
            }
            cfg.condition.rho0 = rho0.unwrap_or(cfg.condition.rho0);
            if let Some(w) = window {
                cfg.condition.window = Some((w[0], w[1]));
            }
            if w_hat.is_some() {
                cfg.condition.w_hat = w_hat;
            }
            commands::check_condition(&cfg)
        }
        Command::KernelDistance { threshold } => {
            if let Some(t) = threshold {
                cfg.kernel.thresholds = t;
            }
            commands::kernel(&cfg)
        }
    }
}
