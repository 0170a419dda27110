//! Exhaustive realizability check of the hard MDP family at a desk size.
//!
//! `cargo run --release --example hard_mdp_realizability -- [p] [K]`

use std::sync::Arc;

use linplan::hard::{HardMdpParams, HardTable, Variant};
use linplan::oracle::{hard_sweep, SweepOptions};

fn main() -> linplan::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let p = *args.first().unwrap_or(&3);
    let k = *args.get(1).unwrap_or(&2);
    let params = HardMdpParams::desk(p, k, Variant::V)?;
    for w in params.warnings() {
        println!("note: {w}");
    }
    let table = Arc::new(HardTable::build(&params)?);
    println!("p = {p}, K = {k}: {} states, {} distinct feature vectors", table.num_nodes(), table.num_features());
    let report = hard_sweep(&table, &SweepOptions::default())?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
