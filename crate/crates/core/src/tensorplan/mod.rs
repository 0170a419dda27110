//! The TensorPlan planner for `v*`-realizable MDPs with few actions.
//!
//! At the start of an episode the planner picks the most optimistic parameter that
//! is consistent with all recorded failures, rolls out its induced policy, and
//! records a new failure (a tensor product of TD vectors) whenever some visited
//! state has no action whose TD residual is close to zero. Every later call picks
//! the action with the smallest residual under the final parameter.

mod config;
mod constraint;
mod planner;
mod solver;
mod td;

pub use config::{tp_constants, SolverConfig, TpConfig, TpConstants};
pub use constraint::{ConstraintTensor, MATERIALIZE_LIMIT};
pub use planner::{tp_get_action, tp_init, TensorPlan, TpState};
pub use solver::{optimistic_select, Selection};
pub use td::{approx_td, most_consistent_action, residual};
