//! Online planning with linearly realizable value functions.
//!
//! The crate bundles four layers that build on each other:
//!
//! * [`mdp`]: fixed-horizon featurized MDPs, a query-counting simulator with
//!   local/global access rules, episode execution and exact dynamic programming.
//! * [`game`] and [`hard`]: the hypercube abstract game and the family of hard
//!   MDPs whose optimal values are linear in known features but whose secret
//!   parameter is expensive to discover.
//! * [`tensorplan`] and [`reduction`]: the TensorPlan planner and the delayed-MDP
//!   reduction from q*-realizable deterministic MDPs to v*-realizable ones.
//! * [`oracle`] and [`harness`]: brute-force verifiers and the experiment harness
//!   behind the `linplan` binary.

pub mod error;
pub mod fixtures;
pub mod game;
pub mod hard;
pub mod harness;
pub mod linalg;
pub mod mdp;
pub mod oracle;
pub mod reduction;
pub mod rng;
pub mod tensorplan;

pub use error::{Error, Result};
