//! TensorPlan on a small v*-realizable MDP, with sample sizes scaled down to desk size.
//!
//! `cargo run --release --example tensorplan_toy -- [episodes] [seed]`

use linplan::fixtures::toy_v_realizable;
use linplan::harness::{evaluate, summarize_episodes};
use linplan::mdp::{dp_solve_table, Mdp};
use linplan::rng::Streams;
use linplan::tensorplan::{tp_constants, TensorPlan, TpConfig};

fn main() -> linplan::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let episodes = *args.first().unwrap_or(&20);
    let seed = *args.get(1).unwrap_or(&0);

    let fx = toy_v_realizable();
    let v_star = dp_solve_table(&fx.mdp)?.v[0];
    let cfg = TpConfig::new(fx.mdp.dim(), fx.mdp.num_actions(), fx.mdp.horizon(), 0.3, fx.b).with_scales(1e-4, 1e-5, 1e-17);
    let c = tp_constants(&cfg)?;
    println!("E_d = {}, eps = {:.3e}, sample sizes used: n1 = {}, n2 = {}, n3 = {}", c.e_d, c.eps, c.n1_used, c.n2_used, c.n3_used);

    let streams = Streams::new(seed);
    let planners = streams.child("planner", 0);
    let records = evaluate(&fx.mdp, v_star, episodes, &streams, false, |e| {
        TensorPlan::new(cfg.clone(), planners.stream("episode", e))
    })?;
    let summary = summarize_episodes(&records, v_star, cfg.delta);
    println!(
        "v* = {v_star:.4}; mean return {:.4} (95% lower {:.4}); mean queries {:.0}",
        summary.total_reward.mean, summary.total_reward.lower95, summary.mean_queries_total
    );
    println!("delta-sound: {}", summary.sound);
    Ok(())
}
