//! The delayed-MDP reduction: exact identities on a deterministic q*-realizable MDP,
//! then TensorPlan run through the adapter.
//!
//! `cargo run --release --example qstar_reduction -- [episodes] [seed]`

use linplan::fixtures::toy_q_deterministic;
use linplan::harness::{evaluate, summarize_episodes};
use linplan::mdp::{dp_solve_table, Mdp};
use linplan::reduction::{delayed_dp_check, TpPrime};
use linplan::rng::Streams;
use linplan::tensorplan::TpConfig;

fn main() -> linplan::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let episodes = *args.first().unwrap_or(&5);
    let seed = *args.get(1).unwrap_or(&0);

    let fx = toy_q_deterministic();
    let report = delayed_dp_check(&fx.mdp, |s, a| fx.mdp.phi_q(&s, a).unwrap_or_default(), &fx.theta, fx.b, 1e-12)?;
    println!("{}", serde_json::to_string_pretty(&report)?);

    let v_star = dp_solve_table(&fx.mdp)?.v[0];
    let cfg = TpConfig::new(fx.mdp.dim(), fx.mdp.num_actions(), fx.mdp.horizon(), 0.3, fx.b).with_scales(1e-4, 1e-6, 1e-18);
    let streams = Streams::new(seed);
    let planners = streams.child("planner", 0);
    let records = evaluate(&fx.mdp, v_star, episodes, &streams, false, |e| {
        TpPrime::new(&cfg, planners.stream("episode", e))
    })?;
    let summary = summarize_episodes(&records, v_star, cfg.delta);
    println!(
        "v* = {v_star:.4}; mean return {:.4}; mean queries per episode {:.0}",
        summary.total_reward.mean, summary.mean_queries_total
    );
    Ok(())
}
