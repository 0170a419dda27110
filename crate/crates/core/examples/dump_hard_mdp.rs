//! Every state of a tiny hard MDP with its optimal value, as CSV on standard output.
//!
//! `cargo run --example dump_hard_mdp -- [p] [K] [secret_index]`

use linplan::harness::{cmd_dump, ExperimentConfig};

fn main() -> linplan::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let cfg = ExperimentConfig {
        command: "dump".into(),
        target: "hardmdp".into(),
        p: *args.first().unwrap_or(&2),
        k: *args.get(1).unwrap_or(&2),
        secret_index: *args.get(2).unwrap_or(&0),
        ..Default::default()
    };
    let rows = cmd_dump(&cfg, std::io::stdout().lock())?;
    eprintln!("{rows} rows");
    Ok(())
}
