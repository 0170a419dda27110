use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{AccessMode, Features, Mdp, TransitionSample};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Query counts of one planning session.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLedger {
    pub queries_this_call: u64,
    pub queries_total: u64,
    pub calls: u64,
    /// Queries issued during each planner call, in order.
    pub per_call: Vec<u64>,
    /// Environment transitions taken by the episode runner (not planning queries).
    pub env_transitions: u64,
}

impl QueryLedger {
    pub fn begin_call(&mut self) {
        self.calls += 1;
        self.queries_this_call = 0;
        self.per_call.push(0);
    }

    pub fn record_query(&mut self) {
        self.queries_this_call += 1;
        self.queries_total += 1;
        if let Some(last) = self.per_call.last_mut() {
            *last += 1;
        }
    }

    pub fn max_per_call(&self) -> u64 {
        self.per_call.iter().copied().max().unwrap_or(0)
    }
}

/// One query against the MDP, ignoring access rules and accounting.
pub fn simulate<M: Mdp + ?Sized>(
    mdp: &M,
    s: &M::State,
    a: usize,
    rng: &mut StreamRng,
) -> Result<TransitionSample<M::State>> {
    mdp.check_action(a)?;
    let (reward, next) = if mdp.is_terminal(s) {
        (0.0, mdp.terminal_state())
    } else {
        mdp.sample(s, a, rng)?
    };
    let next_features = mdp.features(&next);
    Ok(TransitionSample { reward, next, next_features })
}

/// Planner-facing query interface: `(reward, next state, state features of next)`.
pub trait Oracle {
    type State: Clone;
    fn num_actions(&self) -> usize;
    fn query(&mut self, s: &Self::State, a: usize) -> Result<(f64, Self::State, Vec<f64>)>;
}

/// Access-controlled, query-counting simulator handed to planners.
pub struct Simulator<'m, M: Mdp> {
    mdp: &'m M,
    access: AccessMode,
    observed: HashSet<M::State>,
    ledger: QueryLedger,
    rng: StreamRng,
}

impl<'m, M: Mdp> Simulator<'m, M> {
    pub fn new(mdp: &'m M, access: AccessMode, rng: StreamRng) -> Self {
        Self { mdp, access, observed: HashSet::new(), ledger: QueryLedger::default(), rng }
    }

    pub fn mdp(&self) -> &'m M {
        self.mdp
    }

    pub fn access(&self) -> AccessMode {
        self.access
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn ledger_mut(&mut self) -> &mut QueryLedger {
        &mut self.ledger
    }

    pub fn into_ledger(self) -> QueryLedger {
        self.ledger
    }

    /// Mark a state as legal under local access.
    pub fn observe(&mut self, s: &M::State) {
        if self.access == AccessMode::Local {
            self.observed.insert(s.clone());
        }
    }

    pub fn is_observed(&self, s: &M::State) -> bool {
        self.access == AccessMode::Global || self.mdp.is_terminal(s) || self.observed.contains(s)
    }

    pub fn simulate(&mut self, s: &M::State, a: usize) -> Result<TransitionSample<M::State>> {
        self.mdp.check_action(a)?;
        if !self.is_observed(s) {
            return Err(Error::IllegalLocalQuery(format!("{s:?}")));
        }
        let out = simulate(self.mdp, s, a, &mut self.rng)?;
        self.ledger.record_query();
        self.observe(&out.next);
        Ok(out)
    }

    pub fn features(&self, s: &M::State) -> Features {
        self.mdp.features(s)
    }
}

impl<M: Mdp> Oracle for Simulator<'_, M> {
    type State = M::State;

    fn num_actions(&self) -> usize {
        self.mdp.num_actions()
    }

    fn query(&mut self, s: &M::State, a: usize) -> Result<(f64, M::State, Vec<f64>)> {
        let out = self.simulate(s, a)?;
        let phi = match out.next_features.v {
            Some(v) => v,
            None if self.mdp.is_terminal(&out.next) => vec![0.0; self.mdp.dim()],
            None => self
                .mdp
                .phi_v(&out.next)
                .ok_or_else(|| Error::InvalidParams("mdp exposes no state features".into()))?,
        };
        Ok((out.reward, out.next, phi))
    }
}
