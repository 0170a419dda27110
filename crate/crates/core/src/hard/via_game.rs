use super::{HardLaw, HardMdp, HardState, Routing};
use crate::error::{Error, Result};
use crate::game::{AbstractGame, SignVector};
use crate::mdp::{FeatureKind, Mdp, Outcome, Reward};
use crate::rng::StreamRng;

/// Result of a game-backed transition.
#[derive(Clone, Debug, PartialEq)]
pub struct GameRouted {
    pub law: HardLaw,
    pub game_queries: u64,
}

enum ZSource<'r> {
    Law,
    Sample(&'r mut StreamRng),
}

fn route(mdp: &HardMdp, s: &HardState, a: usize, game: &AbstractGame, mut z: ZSource<'_>) -> Result<GameRouted> {
    let params = mdp.params();
    let gp = game.params();
    if gp.p != params.p || gp.k != params.k {
        return Err(Error::InvalidParams(format!(
            "game (p = {}, K = {}) does not match the mdp (p = {}, K = {})",
            gp.p, gp.k, params.p, params.k
        )));
    }
    mdp.check_action(a)?;
    let node = s.node().ok_or_else(|| Error::InvalidParams("no game routing from the terminal state".into()))?;
    let st = node.stats();
    let p = params.p;
    let completes = st.i + 1 == p;
    if st.k == 0 && !completes {
        let law = HardLaw { routing: Routing::Continue, reward: Reward::Deterministic(0.0), next: s.child(params, a) };
        return Ok(GameRouted { law, game_queries: 0 });
    }

    let mut seq: Vec<SignVector> = node.starts().to_vec();
    if completes {
        seq.push(st.w_after(a));
    }
    let before = game.queries();
    let l = seq.len();
    let (u, v, reward) = match &mut z {
        ZSource::Law => {
            let law = game.law(l, &seq)?;
            (law.u, law.v, Reward::Bernoulli(law.z_prob))
        }
        ZSource::Sample(rng) => {
            let resp = game.step(l, &seq, rng)?;
            (resp.u, resp.v, Reward::Deterministic(if resp.z { 1.0 } else { 0.0 }))
        }
    };
    let game_queries = game.queries() - before;

    let last_round_close = if completes { u } else { v };
    let law = if st.k > 0 && last_round_close {
        HardLaw {
            routing: Routing::Unreachable,
            reward: Reward::Deterministic(mdp.unreachable_reward(s, a)),
            next: HardState::Bottom,
        }
    } else if completes && (v || l == gp.k) {
        HardLaw { routing: if v { Routing::Hit } else { Routing::LastStep }, reward, next: HardState::Bottom }
    } else {
        HardLaw { routing: Routing::Continue, reward: Reward::Deterministic(0.0), next: s.child(params, a) }
    };
    Ok(GameRouted { law, game_queries })
}

/// Simulate one hard-MDP transition through at most one abstract-game query.
///
/// With `rng` the reward is the game's sampled `Z`; without it the returned law
/// carries the Bernoulli parameter the game would use. The unreachable-class
/// reward is computed locally from the features.
pub fn simulate_via_game(
    mdp: &HardMdp,
    s: &HardState,
    a: usize,
    game: &AbstractGame,
    rng: Option<&mut StreamRng>,
) -> Result<GameRouted> {
    match rng {
        Some(r) => route(mdp, s, a, game, ZSource::Sample(r)),
        None => route(mdp, s, a, game, ZSource::Law),
    }
}

/// A hard MDP whose secret-dependent behaviour comes from an abstract game.
pub struct GameBackedHardMdp<'a> {
    mdp: &'a HardMdp,
    game: &'a AbstractGame,
}

impl<'a> GameBackedHardMdp<'a> {
    pub fn new(mdp: &'a HardMdp, game: &'a AbstractGame) -> Result<Self> {
        if game.params().secret != mdp.secret() {
            return Err(Error::InvalidParams("game and mdp secrets differ".into()));
        }
        Ok(Self { mdp, game })
    }

    pub fn game(&self) -> &AbstractGame {
        self.game
    }
}

impl Mdp for GameBackedHardMdp<'_> {
    type State = HardState;

    fn num_actions(&self) -> usize {
        self.mdp.num_actions()
    }

    fn horizon(&self) -> usize {
        self.mdp.horizon()
    }

    fn dim(&self) -> usize {
        self.mdp.dim()
    }

    fn feature_kind(&self) -> FeatureKind {
        self.mdp.feature_kind()
    }

    fn initial_state(&self) -> HardState {
        self.mdp.initial_state()
    }

    fn terminal_state(&self) -> HardState {
        HardState::Bottom
    }

    fn is_terminal(&self, s: &HardState) -> bool {
        s.is_bottom()
    }

    fn stage(&self, s: &HardState) -> usize {
        self.mdp.stage(s)
    }

    fn phi_v(&self, s: &HardState) -> Option<Vec<f64>> {
        self.mdp.phi_v(s)
    }

    fn phi_q(&self, s: &HardState, a: usize) -> Option<Vec<f64>> {
        self.mdp.phi_q(s, a)
    }

    fn outcomes(&self, s: &HardState, a: usize) -> Result<Vec<Outcome<HardState>>> {
        let law = simulate_via_game(self.mdp, s, a, self.game, None)?.law;
        Ok(vec![Outcome { prob: 1.0, reward: law.reward, next: law.next }])
    }

    fn sample(&self, s: &HardState, a: usize, rng: &mut StreamRng) -> Result<(f64, HardState)> {
        let law = simulate_via_game(self.mdp, s, a, self.game, Some(rng))?.law;
        Ok((law.reward.mean(), law.next))
    }
}
