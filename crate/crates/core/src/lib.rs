//! Simulation and reference solvers for gradient descent on depth-D diagonal
//! linear networks trained with the exponential loss on separable data.
//!
//! The predictor is `w = u₊^D − u₋^D` (elementwise powers) with `u₊ = u₋ = α·1`
//! at initialization. All loss-dependent quantities are carried in the log
//! domain through the smoothed margin `γ̃ = −log L`, so trajectories can be
//! followed to losses far below the smallest representable `f64`.
//!
//! Modules:
//!
//! - [`data`]: dataset ingestion, label absorption and the fixed statistics
//!   (ℓ2 margin, `x̄`, `x_max`).
//! - [`dynamics`]: the model, log-domain margins, plain and normalized gradient
//!   descent, closed-form consistency checks, tangent kernel and the linearized
//!   comparison flow.
//! - [`penalty`]: the `Q^D_μ` penalty family and the `h_D` function.
//! - [`margins`]: certified ℓ2, ℓ1 and `Q^D_μ` max-margin solvers, the `Q_μ`
//!   path and local ℓ_{2/D} stationary points.
//! - [`regimes`]: stopping schedules, regime metrics, the support-vector
//!   stability check, accuracy-vs-initialization fits and sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod dynamics;
pub mod io;
pub mod linalg;
pub mod margins;
pub mod penalty;
pub mod regimes;

pub use data::{compute_stats, load_dataset, DataError, DataFormat, DataStats, Dataset};
pub use dynamics::{DynamicsError, NetParams, StepMode, StepperConfig, Trajectory, TrajectoryRecord};
pub use margins::{KktResiduals, MarginError, MarginSolution, Objective, UniqueHint};
pub use penalty::{PenaltyError, PenaltySpec};
pub use regimes::{StoppingRule, SweepResult, SweepSpec};
