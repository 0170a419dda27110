//! A planner that never queries the game cannot beat the trivial output by much.
//!
//! `cargo run --release --example hardness_smoke -- [p] [K] [trials] [seed]`

use linplan::oracle::{hardness_smoke, SmokePlanner};
use linplan::rng::Streams;

fn main() -> linplan::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let p = *args.first().unwrap_or(&12) as usize;
    let k = *args.get(1).unwrap_or(&10) as usize;
    let trials = *args.get(2).unwrap_or(&2000);
    let seed = *args.get(3).unwrap_or(&0);
    for planner in [SmokePlanner::FixedOutput, SmokePlanner::RandomOutput] {
        let r = hardness_smoke(p, k, planner, trials, &mut Streams::new(seed).stream("smoke", 0))?;
        println!(
            "{planner:?}: mean payoff {:.4}, mean f(()) {:.4}, gap {:.4} +- {:.4}, pass {}",
            r.mean_payoff, r.mean_f_empty, r.gap, r.gap_stderr, r.pass
        );
    }
    Ok(())
}
