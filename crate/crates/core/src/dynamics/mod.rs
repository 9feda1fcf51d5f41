//! Diagonal network model and gradient-descent simulation.
//!
//! All loss quantities are carried through `γ̃ = −log L` and the normalized
//! residual weights `p`, so runs can continue long after `L` underflows.
//! Flow time is stored as `ln t`.

mod closed_form;
mod export;
mod kernel;
mod linearized;
mod model;
mod serde_float;
mod stepper;

use thiserror::Error;

pub use closed_form::{closed_form_residual, loss_bound_floor, w_inf_ceiling};
pub use export::{
    read_trajectory_csv, trajectory_from_json, trajectory_to_json, write_records_csv, write_trajectory_csv,
};
pub use kernel::{kernel_distance, tangent_kernel};
pub use linearized::{linearized_flow_step, linearized_normalized_step, linearized_run};
pub use model::{loss_gradient, margins, normalized_direction, predictor, MarginState, NetParams};
pub use stepper::{run, run_observed, step, StepMode, StepperConfig, Trajectory, TrajectoryRecord};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("data is not linearly separable")]
    NotSeparable,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid stepper config: {0}")]
    InvalidConfig(String),
    #[error("loss underflows at gamma_tilde = {gamma_tilde}; use normalized mode")]
    Underflow { gamma_tilde: f64 },
    #[error("no acceptable step at step {step} (eta shrank to {eta:e})")]
    StepUnderflow { step: u64, eta: f64 },
    #[error("budget exhausted after {steps} steps at gamma_tilde = {gamma_tilde} (target {target})")]
    BudgetExhausted { steps: u64, gamma_tilde: f64, target: f64, partial: Box<Trajectory> },
    #[error("s_accum[{index}] = {value} is outside (-1, 1)")]
    Domain { index: usize, value: f64 },
    #[error("kernel has zero norm")]
    ZeroKernel,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
