//! The hard featurized MDP family built on the hypercube game.
//!
//! States are nodes of an action tree with `K` rounds of `p` steps. Each round
//! compiles one hypercube weight by sign flips; a round's weight that lands close
//! to the secret ends the episode with a Bernoulli payoff.

mod features;
mod params;
mod state;
mod table;
mod via_game;

pub use features::{
    completion_blocks, phi_q, phi_v, poly_mul, quadratic_blocks, round_payoff, theta_star, v_prime,
    value_factor_blocks, THETA_SCALE,
};
pub use params::{block_dim, HardMdpParams, Variant, B_HARD};
pub use state::{format_actions, Advance, HardState, NodeState, RoundStats};
pub use table::{HardInstance, HardTable, MAX_NODES, ZERO_FEATURE};
pub use via_game::{simulate_via_game, GameBackedHardMdp, GameRouted};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{in_wstar, is_close, SignVector};
use crate::linalg::{argmax, dot};
use crate::mdp::{FeatureKind, Mdp, Outcome, Reward, Tabular};

/// Which of the four transition cases applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Routing {
    /// The last completed weight is close to the secret: deterministic reward, episode over.
    Unreachable,
    /// The round just completed lands close to the secret.
    Hit,
    /// The final step of the final round.
    LastStep,
    /// Ordinary move along the tree (possibly into the terminal state for an illegal repeat).
    Continue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReachClass {
    Reach,
    NotReach,
}

/// `NotReach` iff the state's last completed weight is within `p/4` of the secret.
pub fn reachable_class(s: &HardState, secret: &SignVector) -> ReachClass {
    match s.stats() {
        Some(st) if st.k > 0 && is_close(st.w0.hamming_unchecked(secret), secret.p()) => ReachClass::NotReach,
        _ => ReachClass::Reach,
    }
}

/// Law of one transition.
#[derive(Clone, Debug, PartialEq)]
pub struct HardLaw {
    pub routing: Routing,
    pub reward: Reward,
    pub next: HardState,
}

/// One hard MDP: parameters, secret and the derived hidden parameter.
pub struct HardMdp {
    params: HardMdpParams,
    secret: SignVector,
    theta: Vec<f64>,
    enumerated: Option<HardInstance>,
}

impl HardMdp {
    pub fn new(params: HardMdpParams, secret: SignVector) -> Result<Self> {
        if secret.p() != params.p {
            return Err(Error::DimensionMismatch { expected: params.p, got: secret.p() });
        }
        if !in_wstar(&secret) {
            return Err(Error::InvalidParams(format!("secret {secret} is not admissible")));
        }
        if params.d < block_dim(params.p) {
            return Err(Error::InvalidParams(format!("d = {} is below {}", params.d, block_dim(params.p))));
        }
        Ok(Self { params, secret, theta: theta_star(&params, &secret), enumerated: None })
    }

    /// An instance that also exposes an exact enumeration for dynamic programming.
    pub fn with_table(table: Arc<HardTable>, secret: SignVector, variant: Variant) -> Result<Self> {
        let params = table.params().with_variant(variant);
        let mut mdp = Self::new(params, secret)?;
        mdp.enumerated = Some(HardInstance::new(table, secret, variant)?);
        Ok(mdp)
    }

    pub fn params(&self) -> &HardMdpParams {
        &self.params
    }

    pub fn secret(&self) -> SignVector {
        self.secret
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn instance(&self) -> Option<&HardInstance> {
        self.enumerated.as_ref()
    }

    fn zeros(&self) -> Vec<f64> {
        vec![0.0; self.params.d]
    }

    pub fn phi_v_of(&self, s: &HardState) -> Vec<f64> {
        s.stats().map_or_else(|| self.zeros(), |st| phi_v(&self.params, st))
    }

    pub fn phi_q_of(&self, s: &HardState, a: usize) -> Vec<f64> {
        s.stats().map_or_else(|| self.zeros(), |st| phi_q(&self.params, st, a))
    }

    /// Deterministic reward paid from the unreachable class.
    pub fn unreachable_reward(&self, s: &HardState, a: usize) -> f64 {
        let phi = if self.params.variant.case1_uses_phi_q() { self.phi_q_of(s, a) } else { self.phi_v_of(s) };
        dot(&phi, &self.theta)
    }

    /// Exact transition law at a non-terminal state.
    pub fn law(&self, s: &HardState, a: usize) -> Result<HardLaw> {
        self.check_action(a)?;
        let Some(st) = s.stats() else {
            return Err(Error::InvalidParams("the terminal state has no transition law here".into()));
        };
        let p = self.params.p;
        if st.k > 0 && is_close(st.w0.hamming_unchecked(&self.secret), p) {
            let r = self.unreachable_reward(s, a);
            return Ok(HardLaw { routing: Routing::Unreachable, reward: Reward::Deterministic(r), next: HardState::Bottom });
        }
        if st.i + 1 == p {
            let hit = is_close(st.w_after(a).hamming_unchecked(&self.secret), p);
            if hit || st.k + 1 == self.params.k {
                let f = round_payoff(&self.params, st, a, &self.secret);
                let routing = if hit { Routing::Hit } else { Routing::LastStep };
                return Ok(HardLaw { routing, reward: Reward::Bernoulli(f), next: HardState::Bottom });
            }
        }
        Ok(HardLaw { routing: Routing::Continue, reward: Reward::Deterministic(0.0), next: s.child(&self.params, a) })
    }

    /// The optimal policy that knows the secret.
    pub fn policy(&self, s: &HardState) -> usize {
        let Some(st) = s.stats() else { return 0 };
        if reachable_class(s, &self.secret) == ReachClass::NotReach {
            let values: Vec<f64> = (0..self.params.p).map(|a| dot(&self.phi_q_of(s, a), &self.theta)).collect();
            return argmax(&values);
        }
        table::greedy_flip(st, &self.secret, self.params.mask())
    }

    pub fn v_prime_of(&self, s: &HardState) -> Option<f64> {
        s.stats().map(|st| v_prime(&self.params, st, &self.secret))
    }
}

impl Mdp for HardMdp {
    type State = HardState;

    fn num_actions(&self) -> usize {
        self.params.p
    }

    fn horizon(&self) -> usize {
        self.params.h
    }

    fn dim(&self) -> usize {
        self.params.d
    }

    fn feature_kind(&self) -> FeatureKind {
        match self.params.variant {
            Variant::V => FeatureKind::State,
            Variant::Q => FeatureKind::Action,
            Variant::VqReach => FeatureKind::Both,
        }
    }

    fn initial_state(&self) -> HardState {
        HardState::root(&self.params)
    }

    fn terminal_state(&self) -> HardState {
        HardState::Bottom
    }

    fn is_terminal(&self, s: &HardState) -> bool {
        s.is_bottom()
    }

    fn stage(&self, s: &HardState) -> usize {
        s.stats().map_or(self.params.h, |st| st.stage(self.params.p))
    }

    fn phi_v(&self, s: &HardState) -> Option<Vec<f64>> {
        self.feature_kind().has_state().then(|| self.phi_v_of(s))
    }

    fn phi_q(&self, s: &HardState, a: usize) -> Option<Vec<f64>> {
        self.feature_kind().has_action().then(|| self.phi_q_of(s, a))
    }

    fn outcomes(&self, s: &HardState, a: usize) -> Result<Vec<Outcome<HardState>>> {
        let law = self.law(s, a)?;
        Ok(vec![Outcome { prob: 1.0, reward: law.reward, next: law.next }])
    }

    fn enumeration(&self) -> Option<&dyn Tabular> {
        self.enumerated.as_ref().map(|t| t as &dyn Tabular)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::g_unchecked;

    fn p2() -> (HardMdpParams, SignVector) {
        (HardMdpParams::desk(2, 3, Variant::V).unwrap(), "-+".parse().unwrap())
    }

    #[test]
    fn first_step_flips() {
        let (params, secret) = p2();
        let mdp = HardMdp::new(params, secret).unwrap();
        let law = mdp.law(&mdp.initial_state(), 0).unwrap();
        assert_eq!(law.routing, Routing::Continue);
        assert_eq!(law.reward, Reward::Deterministic(0.0));
        assert_eq!(law.next.stats().unwrap().w, "-+".parse().unwrap());
    }

    #[test]
    fn legal_repeat_hits_secret() {
        let (params, secret) = p2();
        let mdp = HardMdp::new(params, secret).unwrap();
        let s = HardState::from_actions(&params, &[0]).unwrap();
        let law = mdp.law(&s, 0).unwrap();
        assert_eq!(law.routing, Routing::Hit);
        assert_eq!(law.reward, Reward::Bernoulli(g_unchecked(1, 2) * g_unchecked(0, 2)));
        assert_eq!(law.reward, Reward::Bernoulli(0.5));
        assert!(law.next.is_bottom());
    }

    #[test]
    fn repeat_routing_depends_on_critical_prefix() {
        let secret4: SignVector = "--++".parse().unwrap();
        let p4 = HardMdpParams::desk(4, 2, Variant::V).unwrap();
        let mdp4 = HardMdp::new(p4, secret4).unwrap();
        let s = HardState::from_actions(&p4, &[1]).unwrap();
        let law = mdp4.law(&s, 1).unwrap();
        assert!(law.next.stats().unwrap().frozen);

        let secret8: SignVector = "----++++".parse().unwrap();
        let p8 = HardMdpParams::desk(8, 1, Variant::V).unwrap();
        let mdp8 = HardMdp::new(p8, secret8).unwrap();
        let s = HardState::from_actions(&p8, &[1]).unwrap();
        let law = mdp8.law(&s, 1).unwrap();
        assert_eq!(law.routing, Routing::Continue);
        assert!(law.next.is_bottom());
        assert_eq!(law.reward, Reward::Deterministic(0.0));
    }

    #[test]
    fn policy_examples() {
        let (params, secret) = p2();
        let mdp = HardMdp::new(params, secret).unwrap();
        assert_eq!(mdp.policy(&mdp.initial_state()), 0);
        assert_eq!(mdp.policy(&HardState::Bottom), 0);
        let s = HardState::from_actions(&params, &[0]).unwrap();
        assert_eq!(mdp.policy(&s), 0);
    }

    #[test]
    fn reach_classes() {
        let (params, secret) = p2();
        assert_eq!(reachable_class(&HardState::Bottom, &secret), ReachClass::Reach);
        let s = HardState::from_actions(&params, &[0, 0]).unwrap();
        assert_eq!(s.stats().unwrap().w0, secret);
        assert_eq!(reachable_class(&s, &secret), ReachClass::NotReach);
    }
}
