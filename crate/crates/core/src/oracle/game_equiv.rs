use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::{enumerate_wstar, AbstractGame, GameParams};
use crate::hard::{simulate_via_game, HardMdp, HardTable, Variant};
use crate::mdp::Reward;

const REWARD_TOL: f64 = 1e-14;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GameEquivalenceReport {
    pub p: usize,
    pub k: usize,
    pub secrets: usize,
    pub pairs_checked: u64,
    pub routing_mismatches: u64,
    pub next_state_mismatches: u64,
    pub reward_mismatches: u64,
    pub max_reward_diff: f64,
    /// Transitions that used more than one game query.
    pub over_budget: u64,
    /// Transitions whose query count differs from the expected 0 (first round, mid-round) or 1.
    pub query_count_mismatches: u64,
    pub max_queries_per_transition: u64,
    pub witnesses: Vec<String>,
    pub pass: bool,
}

/// Compare the game-backed simulator with the direct transition law on every enumerated pair.
pub fn check_game_equivalence(table: &Arc<HardTable>, variants: &[Variant]) -> Result<GameEquivalenceReport> {
    let params = *table.params();
    let (p, k) = (params.p, params.k);
    let secrets = enumerate_wstar(p)?;
    let mut rep = GameEquivalenceReport { p, k, secrets: secrets.len(), ..Default::default() };
    for &secret in &secrets {
        for &variant in variants {
            let mdp = HardMdp::with_table(table.clone(), secret, variant)?;
            let game = AbstractGame::new(GameParams::new(p, k, secret)?);
            for s in 0..table.num_nodes() {
                let state = table.state(s);
                let st = table.stats(s);
                for a in 0..p {
                    rep.pairs_checked += 1;
                    let direct = mdp.law(&state, a)?;
                    let routed = simulate_via_game(&mdp, &state, a, &game, None)?;
                    let mut bad = Vec::new();
                    if routed.law.routing != direct.routing {
                        rep.routing_mismatches += 1;
                        bad.push("routing");
                    }
                    if routed.law.next != direct.next {
                        rep.next_state_mismatches += 1;
                        bad.push("next");
                    }
                    // Same distribution family; parameters agree up to summation order.
                    let same_reward = match (routed.law.reward, direct.reward) {
                        (Reward::Bernoulli(x), Reward::Bernoulli(y)) | (Reward::Deterministic(x), Reward::Deterministic(y)) => {
                            rep.max_reward_diff = rep.max_reward_diff.max((x - y).abs());
                            (x - y).abs() <= REWARD_TOL
                        }
                        _ => false,
                    };
                    if !same_reward {
                        rep.reward_mismatches += 1;
                        bad.push("reward");
                    }
                    let expected = u64::from(!(st.k == 0 && st.i + 1 < p));
                    if routed.game_queries > 1 {
                        rep.over_budget += 1;
                        bad.push("budget");
                    }
                    if routed.game_queries != expected {
                        rep.query_count_mismatches += 1;
                        bad.push("query-count");
                    }
                    rep.max_queries_per_transition = rep.max_queries_per_transition.max(routed.game_queries);
                    if !bad.is_empty() && rep.witnesses.len() < super::MAX_WITNESSES {
                        rep.witnesses.push(format!("secret={secret} state={state} a={a}: {}", bad.join(",")));
                    }
                }
            }
        }
    }
    rep.pass = rep.routing_mismatches == 0
        && rep.next_state_mismatches == 0
        && rep.reward_mismatches == 0
        && rep.over_budget == 0
        && rep.query_count_mismatches == 0;
    Ok(rep)
}
