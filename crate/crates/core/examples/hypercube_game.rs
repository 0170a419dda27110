//! The hypercube payoff and the abstract game at a small dimension.
//!
//! `cargo run --example hypercube_game -- [p] [K] [seed]`

use linplan::game::{enumerate_wstar, f, g, game_finalize, sample_wstar, AbstractGame, GameParams, SignVector, OUTPUT_LEN};
use linplan::rng::Streams;

fn main() -> linplan::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let p = *args.first().unwrap_or(&8) as usize;
    let k = *args.get(1).unwrap_or(&3) as usize;
    let seed = *args.get(2).unwrap_or(&1);
    let streams = Streams::new(seed);

    println!("g(x) for p = {p}:");
    for x in 0..=p {
        println!("  g({x}) = {:.6}", g(x as i64, p)?);
    }
    if p <= 16 {
        println!("|W*| = {}", enumerate_wstar(p)?.len());
    }

    let secret = sample_wstar(p, &mut streams.stream("secret", 0))?;
    println!("secret {secret}, f(()) = {:.6}", f(&[], &secret)?);

    // Walk away from the start by flipping disjoint quarters of the coordinates.
    let step = p.div_ceil(4);
    let mut seq = Vec::new();
    let mut w = SignVector::ones(p);
    for l in 0..k {
        for j in 0..step {
            w = w.flipped((l * step + j) % p);
        }
        seq.push(w);
    }
    let game = AbstractGame::new(GameParams::new(p, k, secret)?);
    let mut rng = streams.stream("game", 0);
    for l in 1..=k {
        let law = game.law(l, &seq[..l])?;
        let r = game.step(l, &seq[..l], &mut rng)?;
        println!("query L={l} {}: U={} V={} P(Z)={:.6} sampled Z={}", seq[l - 1], law.u, law.v, law.z_prob, r.z);
    }
    println!("{} queries issued", game.queries());

    let mut output = Vec::with_capacity(OUTPUT_LEN);
    let mut w = SignVector::ones(p);
    for l in 0..OUTPUT_LEN {
        for j in 0..step {
            w = w.flipped((l * step + j) % p);
        }
        output.push(w);
    }
    println!("final payoff of a fixed output: {:.6}", game_finalize(game.params(), &output)?);
    Ok(())
}
