use serde::{Deserialize, Serialize};

use super::config::{tp_constants, TpConfig, TpConstants};
use super::constraint::ConstraintTensor;
use super::solver::optimistic_select;
use super::td::{approx_td, most_consistent_action, residual};
use crate::error::{Error, Result};
use crate::mdp::{Features, Mdp, Oracle, Planner, Simulator};
use crate::rng::StreamRng;

/// Memory carried from Init to the GetAction calls of one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TpState {
    pub theta_plus: Vec<f64>,
    pub constraints: Vec<ConstraintTensor>,
    pub constants: TpConstants,
    /// Whether the final iteration finished a clean pass.
    pub clean: bool,
    /// Number of consistency iterations run.
    pub iterations: u64,
    /// Optimistic value `<phi(s0), theta_tau>` of every iteration.
    pub optimistic_values: Vec<f64>,
    /// Some optimistic choice fell back to the zero vector.
    pub solver_fallback: bool,
    /// States at which TD vectors were estimated during Init.
    pub visited: u64,
}

/// The consistency loop run at the start of every episode.
pub fn tp_init<O: Oracle>(
    s0: &O::State,
    phi_s0: &[f64],
    cfg: &TpConfig,
    constants: &TpConstants,
    oracle: &mut O,
    rng: &mut StreamRng,
) -> Result<TpState> {
    let gap = cfg.delta / (4.0 * cfg.h as f64);
    let mut constraints: Vec<ConstraintTensor> = Vec::new();
    let mut theta: Option<Vec<f64>> = None;
    let mut values = Vec::new();
    let mut clean = false;
    let mut fallback = false;
    let mut iterations = 0;
    let mut visited = 0;
    for _ in 0..constants.iterations {
        iterations += 1;
        let sel = optimistic_select(
            &constraints,
            phi_s0,
            cfg.b,
            constants.sol_tol,
            cfg.feasibility_slack,
            theta.as_deref(),
            &cfg.solver,
            rng,
        );
        fallback |= sel.fallback;
        values.push(sel.value);
        let th = sel.theta;
        clean = true;
        for _ in 0..constants.n1_used {
            let mut s = s0.clone();
            let mut phi = phi_s0.to_vec();
            for _ in 0..cfg.h {
                let deltas = approx_td(oracle, &s, &phi, constants.n2_used)?;
                visited += 1;
                let min_res = deltas.iter().map(|d| residual(d, &th).abs()).fold(f64::INFINITY, f64::min);
                if clean && min_res > gap {
                    let refined = approx_td(oracle, &s, &phi, constants.n3_used)?;
                    constraints.push(ConstraintTensor::new(refined));
                    clean = false;
                }
                let a = most_consistent_action(&deltas, &th);
                let (_, next, phi_next) = oracle.query(&s, a)?;
                s = next;
                phi = phi_next;
            }
        }
        theta = Some(th);
        if clean {
            break;
        }
    }
    Ok(TpState {
        theta_plus: theta.unwrap_or_else(|| vec![0.0; phi_s0.len()]),
        constraints,
        constants: constants.clone(),
        clean,
        iterations,
        optimistic_values: values,
        solver_fallback: fallback,
        visited,
    })
}

/// One planner call: Init on episode start, then the most consistent action under `theta+`.
pub fn tp_get_action<O: Oracle>(
    s: &O::State,
    phi_s: &[f64],
    episode_start: bool,
    cfg: &TpConfig,
    oracle: &mut O,
    state: &mut Option<TpState>,
    rng: &mut StreamRng,
) -> Result<usize> {
    if episode_start {
        let constants = tp_constants(cfg)?;
        *state = Some(tp_init(s, phi_s, cfg, &constants, oracle, rng)?);
    }
    let st = state.as_ref().ok_or(Error::MissingPlannerState("theta+ before Init"))?;
    let deltas = approx_td(oracle, s, phi_s, st.constants.n2_used)?;
    Ok(most_consistent_action(&deltas, &st.theta_plus))
}

/// TensorPlan as a [`Planner`] over MDPs that expose state features.
pub struct TensorPlan {
    config: TpConfig,
    state: Option<TpState>,
    rng: StreamRng,
}

impl TensorPlan {
    pub fn new(config: TpConfig, rng: StreamRng) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, state: None, rng })
    }

    pub fn config(&self) -> &TpConfig {
        &self.config
    }

    pub fn state(&self) -> Option<&TpState> {
        self.state.as_ref()
    }

    /// Planner call against any oracle.
    pub fn act_with<O: Oracle>(&mut self, s: &O::State, phi_s: &[f64], episode_start: bool, oracle: &mut O) -> Result<usize> {
        tp_get_action(s, phi_s, episode_start, &self.config, oracle, &mut self.state, &mut self.rng)
    }
}

impl<M: Mdp> Planner<M> for TensorPlan {
    fn act(&mut self, s: &M::State, features: &Features, episode_start: bool, sim: &mut Simulator<'_, M>) -> Result<usize> {
        let phi = features
            .v
            .as_ref()
            .ok_or_else(|| Error::InvalidParams("TensorPlan needs state features".into()))?;
        self.act_with(s, phi, episode_start, sim)
    }
}
