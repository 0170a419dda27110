//! Reduction from deterministic-transition `q*`-realizable MDPs to `v*`-realizable ones.
//!
//! The delayed MDP carries the pending action in its state: taking `a'` in the
//! pair `(s, a)` pays `R(s, a)` and moves to `(f(s, a), a')`. A single extra start
//! state pays nothing and fixes the first pending action, so the delayed MDP has
//! horizon `H + 1` and one extra feature coordinate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::mdp::{
    dp_solve_table, FeatureKind, Features, Mdp, Oracle, Outcome, Planner, Reward, Simulator, Succ, Tabular,
};
use crate::rng::StreamRng;
use crate::tensorplan::{TensorPlan, TpConfig, TpState};

/// A state of the delayed MDP.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DelayedState<S> {
    /// The unique initial state `(s0, 0)`.
    Start(S),
    /// An original state with the action about to be applied there.
    Pair(S, usize),
    Bottom,
}

/// `[1, 0^d]`.
pub fn start_features(d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d + 1];
    v[0] = 1.0;
    v
}

/// `[0, phi]`.
pub fn pair_features(phi_q: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(phi_q.len() + 1);
    v.push(0.0);
    v.extend_from_slice(phi_q);
    v
}

/// `(v*(s0), theta*)`.
pub fn delayed_theta(v0: f64, theta: &[f64]) -> Vec<f64> {
    let mut v = pair_features(theta);
    v[0] = v0;
    v
}

fn action_feature(features: &Features, a: usize) -> Result<Vec<f64>> {
    features
        .q
        .as_ref()
        .and_then(|q| q.get(a).cloned())
        .ok_or_else(|| Error::InvalidParams("the base MDP exposes no state-action features".into()))
}

/// Counts of the three branches taken by the adapter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterCounts {
    pub start_calls: u64,
    pub pair_calls: u64,
    pub bottom_calls: u64,
    /// Queries forwarded to the base simulator.
    pub base_queries: u64,
}

impl AdapterCounts {
    pub fn calls(&self) -> u64 {
        self.start_calls + self.pair_calls + self.bottom_calls
    }
}

/// The delayed simulator: answers queries about the delayed MDP with at most one base query each.
pub struct DelayedOracle<'a, 'm, M: Mdp> {
    sim: &'a mut Simulator<'m, M>,
    counts: AdapterCounts,
}

impl<'a, 'm, M: Mdp> DelayedOracle<'a, 'm, M> {
    pub fn new(sim: &'a mut Simulator<'m, M>) -> Self {
        Self { sim, counts: AdapterCounts::default() }
    }

    pub fn counts(&self) -> AdapterCounts {
        self.counts
    }

    fn zeros(&self) -> Vec<f64> {
        vec![0.0; self.sim.mdp().dim() + 1]
    }
}

/// One query of the delayed MDP: `(reward, next, features of next)`.
pub fn simulate_prime<M: Mdp>(
    sim: &mut Simulator<'_, M>,
    bar_s: &DelayedState<M::State>,
    a_next: usize,
) -> Result<(f64, DelayedState<M::State>, Vec<f64>)> {
    let mut oracle = DelayedOracle::new(sim);
    oracle.query(bar_s, a_next)
}

impl<M: Mdp> Oracle for DelayedOracle<'_, '_, M> {
    type State = DelayedState<M::State>;

    fn num_actions(&self) -> usize {
        self.sim.mdp().num_actions()
    }

    fn query(&mut self, bar_s: &Self::State, a_next: usize) -> Result<(f64, Self::State, Vec<f64>)> {
        self.sim.mdp().check_action(a_next)?;
        match bar_s {
            DelayedState::Bottom => {
                self.counts.bottom_calls += 1;
                Ok((0.0, DelayedState::Bottom, self.zeros()))
            }
            DelayedState::Start(s) => {
                self.counts.start_calls += 1;
                let phi = action_feature(&self.sim.features(s), a_next)?;
                Ok((0.0, DelayedState::Pair(s.clone(), a_next), pair_features(&phi)))
            }
            DelayedState::Pair(s, a) => {
                self.counts.pair_calls += 1;
                self.counts.base_queries += 1;
                let out = self.sim.simulate(s, *a)?;
                if self.sim.mdp().is_terminal(&out.next) {
                    return Ok((out.reward, DelayedState::Bottom, self.zeros()));
                }
                let phi = action_feature(&out.next_features, a_next)?;
                Ok((out.reward, DelayedState::Pair(out.next, a_next), pair_features(&phi)))
            }
        }
    }
}

/// The delayed MDP as a lazily evaluated [`Mdp`] over a base MDP with action features.
pub struct DelayedMdp<'m, M: Mdp> {
    base: &'m M,
}

impl<'m, M: Mdp> DelayedMdp<'m, M> {
    pub fn new(base: &'m M) -> Result<Self> {
        if !base.feature_kind().has_action() {
            return Err(Error::InvalidParams("the base MDP exposes no state-action features".into()));
        }
        Ok(Self { base })
    }

    pub fn base(&self) -> &'m M {
        self.base
    }
}

impl<M: Mdp> Mdp for DelayedMdp<'_, M> {
    type State = DelayedState<M::State>;

    fn num_actions(&self) -> usize {
        self.base.num_actions()
    }

    fn horizon(&self) -> usize {
        self.base.horizon() + 1
    }

    fn dim(&self) -> usize {
        self.base.dim() + 1
    }

    fn feature_kind(&self) -> FeatureKind {
        FeatureKind::State
    }

    fn initial_state(&self) -> Self::State {
        DelayedState::Start(self.base.initial_state())
    }

    fn terminal_state(&self) -> Self::State {
        DelayedState::Bottom
    }

    fn is_terminal(&self, s: &Self::State) -> bool {
        matches!(s, DelayedState::Bottom)
    }

    fn stage(&self, s: &Self::State) -> usize {
        match s {
            DelayedState::Start(_) => 0,
            DelayedState::Pair(s, _) => self.base.stage(s) + 1,
            DelayedState::Bottom => self.horizon(),
        }
    }

    fn phi_v(&self, s: &Self::State) -> Option<Vec<f64>> {
        match s {
            DelayedState::Start(_) => Some(start_features(self.base.dim())),
            DelayedState::Pair(s, a) => self.base.phi_q(s, *a).map(|phi| pair_features(&phi)),
            DelayedState::Bottom => Some(vec![0.0; self.dim()]),
        }
    }

    fn phi_q(&self, _: &Self::State, _: usize) -> Option<Vec<f64>> {
        None
    }

    fn outcomes(&self, s: &Self::State, a_next: usize) -> Result<Vec<Outcome<Self::State>>> {
        self.check_action(a_next)?;
        match s {
            DelayedState::Bottom => Err(Error::InvalidParams("the terminal state has no transition law here".into())),
            DelayedState::Start(s) => Ok(vec![Outcome {
                prob: 1.0,
                reward: Reward::Deterministic(0.0),
                next: DelayedState::Pair(s.clone(), a_next),
            }]),
            DelayedState::Pair(s, a) => Ok(self
                .base
                .outcomes(s, *a)?
                .into_iter()
                .map(|o| Outcome {
                    prob: o.prob,
                    reward: o.reward,
                    next: if self.base.is_terminal(&o.next) {
                        DelayedState::Bottom
                    } else {
                        DelayedState::Pair(o.next, a_next)
                    },
                })
                .collect()),
        }
    }
}

/// TensorPlan run on the delayed MDP, driven by calls from the base MDP.
pub struct TpPrime<S> {
    inner: TensorPlan,
    /// The previous state and the action returned for it.
    memory: Option<(S, usize, Vec<f64>)>,
    counts: AdapterCounts,
    bar_states: Vec<DelayedState<S>>,
}

impl<S: Clone> TpPrime<S> {
    /// `base` is the configuration of the base class `(d, A, H, delta, B)`; the wrapped
    /// planner runs with `(d + 1, H + 1, 2B)`.
    pub fn new(base: &TpConfig, rng: StreamRng) -> Result<Self> {
        let mut cfg = base.clone();
        cfg.d = base.d + 1;
        cfg.h = base.h + 1;
        cfg.b = 2.0 * base.b;
        Ok(Self { inner: TensorPlan::new(cfg, rng)?, memory: None, counts: AdapterCounts::default(), bar_states: Vec::new() })
    }

    pub fn inner_config(&self) -> &TpConfig {
        self.inner.config()
    }

    pub fn tp_state(&self) -> Option<&TpState> {
        self.inner.state()
    }

    /// Adapter branch counts accumulated since construction.
    pub fn counts(&self) -> AdapterCounts {
        self.counts
    }

    /// Delayed states handed to TensorPlan, in call order.
    pub fn bar_states(&self) -> &[DelayedState<S>] {
        &self.bar_states
    }
}

impl<M: Mdp> Planner<M> for TpPrime<M::State> {
    fn act(&mut self, s: &M::State, features: &Features, episode_start: bool, sim: &mut Simulator<'_, M>) -> Result<usize> {
        let d = sim.mdp().dim();
        let (bar_s, bar_phi) = if episode_start {
            (DelayedState::Start(s.clone()), start_features(d))
        } else {
            let (prev, a, phi) = self.memory.take().ok_or(Error::MissingPlannerState("previous action"))?;
            (DelayedState::Pair(prev, a), pair_features(&phi))
        };
        let mut oracle = DelayedOracle::new(sim);
        let action = self.inner.act_with(&bar_s, &bar_phi, episode_start, &mut oracle)?;
        let c = oracle.counts();
        self.counts.start_calls += c.start_calls;
        self.counts.pair_calls += c.pair_calls;
        self.counts.bottom_calls += c.bottom_calls;
        self.counts.base_queries += c.base_queries;
        self.bar_states.push(bar_s);
        self.memory = Some((s.clone(), action, action_feature(features, action)?));
        Ok(action)
    }
}

/// The delayed MDP of an enumerable deterministic base, materialized.
///
/// Index 0 is the start state and `1 + s * A + a` is the pair `(s, a)`.
pub struct DelayedTable<'a, T: Tabular + ?Sized> {
    base: &'a T,
}

impl<'a, T: Tabular + ?Sized> DelayedTable<'a, T> {
    pub fn new(base: &'a T) -> Self {
        Self { base }
    }

    pub fn pair_index(&self, s: usize, a: usize) -> usize {
        1 + s * self.base.num_actions() + a
    }

    fn base_step(&self, s: usize, a: usize) -> Result<(f64, Succ)> {
        let mut succ = Vec::with_capacity(2);
        let r = self.base.expected(s, a, &mut succ)?;
        match succ.as_slice() {
            [(p, next)] if (*p - 1.0).abs() <= 1e-12 => Ok((r, *next)),
            _ => Err(Error::NotDeterministic(s)),
        }
    }
}

impl<T: Tabular + ?Sized> Tabular for DelayedTable<'_, T> {
    fn num_states(&self) -> usize {
        1 + self.base.num_states() * self.base.num_actions()
    }

    fn num_actions(&self) -> usize {
        self.base.num_actions()
    }

    fn expected(&self, s: usize, a_next: usize, succ: &mut Vec<(f64, Succ)>) -> Result<f64> {
        if s == 0 {
            succ.push((1.0, Succ::State(self.pair_index(self.base.initial_index(), a_next))));
            return Ok(0.0);
        }
        let na = self.base.num_actions();
        let (r, next) = self.base_step((s - 1) / na, (s - 1) % na)?;
        succ.push((1.0, match next {
            Succ::Bottom => Succ::Bottom,
            Succ::State(n) => Succ::State(self.pair_index(n, a_next)),
        }));
        Ok(r)
    }
}

/// Outcome of [`delayed_dp_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub base_states: usize,
    pub delayed_states: usize,
    /// `max |v̄*((s,a)) - q*(s,a)|`.
    pub pair_error: f64,
    /// `|v̄*(start) - v*(s0)|`.
    pub start_error: f64,
    /// `max |v̄*((s,a)) - r(s,a)|` over pairs whose base successor is terminal.
    pub last_stage_error: f64,
    /// `max |<φ̄, θ̄*> - v̄*|` over all delayed states.
    pub realization_error: f64,
    pub max_feature_norm: f64,
    pub theta_bar_norm: f64,
    pub norm_bound: f64,
    pub v0: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Materialize the delayed MDP of a deterministic enumerable base and verify the reduction identities.
///
/// `phi_q(s, a)` must be the base features and `theta` the base parameter with norm bound `b`.
pub fn delayed_dp_check<T: Tabular + ?Sized>(
    base: &T,
    phi_q: impl Fn(usize, usize) -> Vec<f64>,
    theta: &[f64],
    b: f64,
    tol: f64,
) -> Result<ReductionReport> {
    let na = base.num_actions();
    let base_values = dp_solve_table(base)?;
    let delayed = DelayedTable::new(base);
    let bar = dp_solve_table(&delayed)?;
    let s0 = base.initial_index();
    let v0 = base_values.v[s0];
    let theta_bar = delayed_theta(v0, theta);

    let mut pair_error: f64 = 0.0;
    let mut last_stage_error: f64 = 0.0;
    let mut realization_error = (dot(&start_features(theta.len()), &theta_bar) - bar.v[0]).abs();
    let mut max_feature_norm: f64 = 1.0;
    for s in 0..base.num_states() {
        for a in 0..na {
            let idx = delayed.pair_index(s, a);
            let v = bar.v[idx];
            pair_error = pair_error.max((v - base_values.q_at(s, a)).abs());
            let (r, next) = delayed.base_step(s, a)?;
            if next == Succ::Bottom {
                last_stage_error = last_stage_error.max((v - r).abs());
            }
            let phi = pair_features(&phi_q(s, a));
            max_feature_norm = max_feature_norm.max(norm(&phi));
            realization_error = realization_error.max((dot(&phi, &theta_bar) - v).abs());
        }
    }
    let start_error = (bar.v[0] - v0).abs();
    let theta_bar_norm = norm(&theta_bar);
    let norm_bound = 2.0 * b;
    let pass = pair_error <= tol
        && start_error <= tol
        && last_stage_error <= tol
        && realization_error <= tol
        && max_feature_norm <= 1.0 + 1e-12
        && theta_bar_norm <= norm_bound;
    Ok(ReductionReport {
        base_states: base.num_states(),
        delayed_states: delayed.num_states(),
        pair_error,
        start_error,
        last_stage_error,
        realization_error,
        max_feature_norm,
        theta_bar_norm,
        norm_bound,
        v0,
        tolerance: tol,
        pass,
    })
}
