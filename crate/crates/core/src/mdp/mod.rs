//! Fixed-horizon featurized MDPs.
//!
//! Stages are encoded in the states themselves: every transition from stage `h`
//! lands in stage `h + 1` or in the absorbing terminal state, which is the only
//! state at stage `H` and pays nothing forever.

mod dp;
mod episode;
mod simulator;
mod table;

pub use dp::{dp_solve, dp_solve_table, policy_value, policy_values, bellman_residual, ValueTable};
pub use episode::{run_episode, Episode, EpisodeStep, FnPlanner, Planner};
pub use simulator::{simulate, Oracle, QueryLedger, Simulator};
pub use table::{TableMdp, TableMdpBuilder};

use std::fmt::Debug;
use std::hash::Hash;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Which feature maps an MDP exposes to planners.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    State,
    Action,
    Both,
}

impl FeatureKind {
    pub fn has_state(self) -> bool {
        matches!(self, FeatureKind::State | FeatureKind::Both)
    }

    pub fn has_action(self) -> bool {
        matches!(self, FeatureKind::Action | FeatureKind::Both)
    }
}

/// Simulator access protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccessMode {
    /// Queries only at states previously returned by the simulator or shown to the planner.
    Local,
    Global,
}

/// A reward law, kept symbolic so exact solvers can use the mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reward {
    Deterministic(f64),
    Bernoulli(f64),
}

impl Reward {
    pub fn mean(self) -> f64 {
        match self {
            Reward::Deterministic(r) | Reward::Bernoulli(r) => r,
        }
    }

    pub fn sample(self, rng: &mut StreamRng) -> f64 {
        match self {
            Reward::Deterministic(r) => r,
            Reward::Bernoulli(p) => {
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// One branch of a transition law.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome<S> {
    pub prob: f64,
    pub reward: Reward,
    pub next: S,
}

/// Feature payload delivered alongside a state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Features {
    pub v: Option<Vec<f64>>,
    /// One vector per action.
    pub q: Option<Vec<Vec<f64>>>,
}

/// Result of one simulator query.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionSample<S> {
    pub reward: f64,
    pub next: S,
    pub next_features: Features,
}

/// A fixed-horizon MDP with features.
pub trait Mdp {
    type State: Clone + Eq + Hash + Debug;

    fn num_actions(&self) -> usize;
    fn horizon(&self) -> usize;
    /// Feature dimension `d`.
    fn dim(&self) -> usize;
    fn feature_kind(&self) -> FeatureKind;
    fn initial_state(&self) -> Self::State;
    fn terminal_state(&self) -> Self::State;
    fn is_terminal(&self, s: &Self::State) -> bool;
    /// Stage index; the terminal state reports `horizon()`.
    fn stage(&self, s: &Self::State) -> usize;
    /// State features, or `None` when the MDP does not expose them.
    fn phi_v(&self, s: &Self::State) -> Option<Vec<f64>>;
    /// State-action features, or `None` when the MDP does not expose them.
    fn phi_q(&self, s: &Self::State, a: usize) -> Option<Vec<f64>>;
    /// Transition law at a non-terminal state; probabilities sum to one.
    fn outcomes(&self, s: &Self::State, a: usize) -> Result<Vec<Outcome<Self::State>>>;

    /// Draw `(reward, next)` from the law at a non-terminal state.
    fn sample(&self, s: &Self::State, a: usize, rng: &mut StreamRng) -> Result<(f64, Self::State)> {
        let outcomes = self.outcomes(s, a)?;
        let pick = if outcomes.len() == 1 {
            0
        } else {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut idx = outcomes.len() - 1;
            for (i, o) in outcomes.iter().enumerate() {
                acc += o.prob;
                if u < acc {
                    idx = i;
                    break;
                }
            }
            idx
        };
        let o = &outcomes[pick];
        Ok((o.reward.sample(rng), o.next.clone()))
    }

    /// Exact tabular view, if the state space is small enough to enumerate.
    fn enumeration(&self) -> Option<&dyn Tabular> {
        None
    }

    fn features(&self, s: &Self::State) -> Features {
        let kind = self.feature_kind();
        Features {
            v: if kind.has_state() { self.phi_v(s) } else { None },
            q: if kind.has_action() {
                (0..self.num_actions()).map(|a| self.phi_q(s, a)).collect()
            } else {
                None
            },
        }
    }

    fn check_action(&self, a: usize) -> Result<()> {
        if a < self.num_actions() {
            Ok(())
        } else {
            Err(Error::ActionOutOfRange { action: a, num_actions: self.num_actions() })
        }
    }
}

/// Successor in a tabular law.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Succ {
    Bottom,
    State(usize),
}

/// Exact enumeration of an MDP. Non-terminal states are numbered so that every
/// successor has a larger index than its predecessor (for example, by stage).
pub trait Tabular {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn initial_index(&self) -> usize {
        0
    }
    /// Expected reward of `(s, a)`; appends the successor distribution to `succ`.
    fn expected(&self, s: usize, a: usize, succ: &mut Vec<(f64, Succ)>) -> Result<f64>;
}
