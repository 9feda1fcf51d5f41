//! Regime measurements: stopping schedules, distances to the reference
//! max-margin solutions, the stability condition on support vectors,
//! accuracy-vs-initialization fits and parameter sweeps.

mod condition;
mod fit;
mod metrics;
mod schedule;
mod sweep;

use thiserror::Error;

use crate::data::DataError;
use crate::dynamics::DynamicsError;
use crate::margins::MarginError;

pub use condition::{condition1_check, condition1_check_window, default_window, ConditionReport};
pub use fit::{accuracy_vs_init_fit, gamma_tilde_at_threshold, linear_fit, LineFit};
pub use metrics::{excess_norms, first_exceeding, rescale_to_margin, sphere_coords};
pub use schedule::{schedule_target, RuleKind, StoppingRule};
pub use sweep::{run_sweep, simulate_cell, DatasetSource, MetricSelection, SweepCell, SweepResult, SweepSpec};

#[derive(Debug, Error)]
pub enum RegimeError {
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("zero vector")]
    ZeroVector,
    #[error("predictor does not separate the data (min margin {0})")]
    NotSeparating(f64),
    #[error("records span gamma_tilde [{first}, {last}], window is [{lo}, {hi}]")]
    NotCovered { lo: f64, hi: f64, first: f64, last: f64 },
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Margin(#[from] MarginError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
