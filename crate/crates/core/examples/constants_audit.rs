//! Formula-exact TensorPlan constants next to an independent log-space recomputation.
//!
//! `cargo run --example constants_audit -- [d] [A] [H] [delta] [B]`

use linplan::oracle::reference_constants;
use linplan::tensorplan::{tp_constants, TpConfig};

fn main() -> linplan::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let get = |i: usize, default: f64| *args.get(i).unwrap_or(&default);
    let cfg = TpConfig::new(get(0, 2.0) as usize, get(1, 2.0) as usize, get(2, 3.0) as usize, get(3, 0.3), get(4, 2.0));
    let main = tp_constants(&cfg)?;
    let reference = reference_constants(&cfg)?;
    println!("{:>10} {:>28} {:>28}", "", "planner", "reference");
    println!("{:>10} {:>28} {:>28}", "E_d", main.e_d, reference.e_d);
    println!("{:>10} {:>28.6e} {:>28.6e}", "eps", main.eps, reference.eps);
    println!("{:>10} {:>28} {:>28}", "n1", main.n1, reference.n1);
    println!("{:>10} {:>28} {:>28}", "n2", main.n2, reference.n2);
    println!("{:>10} {:>28} {:>28}", "n3", main.n3, reference.n3);
    println!("{:>10} {:>28.6e} {:>28.6e}", "sol_tol", main.sol_tol, reference.sol_tol);
    println!("{}", serde_json::to_string(&reference.compare(&main, 1e-12))?);
    Ok(())
}
