//! Brute-force checks of the hypercube inequalities behind the lower bound.
//!
//! `cargo run --release --example lemma_checks -- [p_max] [samples]`

use linplan::oracle::{check_close_count, check_f_bounds, check_optimise_ks};
use linplan::rng::Streams;

fn main() -> linplan::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let p_max = *args.first().unwrap_or(&6) as usize;
    let samples = *args.get(1).unwrap_or(&10_000);
    let reports = [
        check_optimise_ks(p_max, 3)?,
        check_f_bounds(&[4, 8], samples, &mut Streams::new(0).stream("lemmas", 0))?,
        check_close_count(16)?,
    ];
    for r in &reports {
        println!("{}", serde_json::to_string(r)?);
    }
    Ok(())
}
