//! Hypercube weight algebra and the abstract game.
//!
//! Points of `W = {-1, 1}^p` are packed into a `u64` (bit `j` set means component
//! `j` is `-1`), so `p <= 64`.

mod exact;
mod sign;

pub use exact::{f_exact, g_exact};
pub use sign::SignVector;

use std::cell::Cell;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Length of a planner's final output in the game.
pub const OUTPUT_LEN: usize = 8;

/// Hamming distance `(p - <w1, w2>) / 2`.
pub fn hamming(w1: &SignVector, w2: &SignVector) -> Result<u32> {
    if w1.p() != w2.p() {
        return Err(Error::DimensionMismatch { expected: w1.p(), got: w2.p() });
    }
    Ok(w1.hamming_unchecked(w2))
}

/// `diff < p/4`, evaluated in integers.
#[inline]
pub fn is_close(diff: u32, p: usize) -> bool {
    (4 * diff as usize) < p
}

/// `diff >= p/4`, evaluated in integers.
#[inline]
pub fn is_far(diff: u32, p: usize) -> bool {
    !is_close(diff, p)
}

/// The quadratic `g(x) = 1 - x/p + (x-1)x/(2p^2)` without range checks.
#[inline]
pub fn g_unchecked(x: u32, p: usize) -> f64 {
    let x = f64::from(x);
    let p = p as f64;
    1.0 - x / p + (x - 1.0) * x / (2.0 * p * p)
}

/// `g(x)` for `0 <= x <= p`.
pub fn g(x: i64, p: usize) -> Result<f64> {
    if x < 0 || x > p as i64 {
        return Err(Error::OutOfRange { value: x, max: p as i64 });
    }
    Ok(g_unchecked(x as u32, p))
}

/// Whether consecutive items (starting from the all-ones vector) are at least `p/4` apart.
pub fn wcirc_check(seq: &[SignVector]) -> bool {
    let Some(first) = seq.first() else { return true };
    let p = first.p();
    let mut prev = SignVector::ones(p);
    for w in seq {
        if w.p() != p || is_close(prev.hamming_unchecked(w), p) {
            return false;
        }
        prev = *w;
    }
    true
}

fn require_wcirc(seq: &[SignVector], p: usize) -> Result<()> {
    if seq.iter().any(|w| w.p() != p) {
        return Err(Error::InvalidSequence(format!("items must have dimension {p}")));
    }
    if !wcirc_check(seq) {
        return Err(Error::InvalidSequence("consecutive items closer than p/4".into()));
    }
    Ok(())
}

/// Payoff function: product of `g` over consecutive distances, times `g` of the
/// distance from the last item to the secret. Evaluated left to right.
pub fn f(seq: &[SignVector], secret: &SignVector) -> Result<f64> {
    let p = secret.p();
    require_wcirc(seq, p)?;
    Ok(f_unchecked(seq, secret))
}

pub(crate) fn f_unchecked(seq: &[SignVector], secret: &SignVector) -> f64 {
    let p = secret.p();
    let mut prev = SignVector::ones(p);
    let mut prod = 1.0;
    for w in seq {
        prod *= g_unchecked(prev.hamming_unchecked(w), p);
        prev = *w;
    }
    prod * g_unchecked(prev.hamming_unchecked(secret), p)
}

/// Whether `w` is an admissible secret: `p/4 <= diff(1, w) <= 3p/4`.
pub fn in_wstar(w: &SignVector) -> bool {
    let d = w.count_negative() as usize;
    let p = w.p();
    4 * d >= p && 4 * d <= 3 * p
}

/// All admissible secrets, in increasing bit order (small `p` only).
pub fn enumerate_wstar(p: usize) -> Result<Vec<SignVector>> {
    if !(2..=24).contains(&p) {
        return Err(Error::Budget(format!("cannot enumerate W* for p = {p}")));
    }
    Ok((0..1u64 << p)
        .map(|b| SignVector::from_bits(b, p))
        .filter(in_wstar)
        .collect())
}

/// Uniform draw from the admissible secrets by rejection.
pub fn sample_wstar(p: usize, rng: &mut StreamRng) -> Result<SignVector> {
    if !(2..=64).contains(&p) {
        return Err(Error::InvalidParams(format!("p = {p} must be in [2, 64]")));
    }
    loop {
        let w = SignVector::from_bits(rng.random::<u64>(), p);
        if in_wstar(&w) {
            return Ok(w);
        }
    }
}

/// Exact `|{v : diff(v, w) < p/4}|` as a binomial sum.
pub fn wclose_count(p: usize) -> Result<u64> {
    if !(1..=20).contains(&p) {
        return Err(Error::Budget(format!("exact close count is capped at p = 20, got {p}")));
    }
    let mut total = 0u64;
    let mut binom = 1u64;
    for j in 0..=p {
        if !is_close(j as u32, p) {
            break;
        }
        total += binom;
        binom = binom * (p - j) as u64 / (j + 1) as u64;
    }
    Ok(total)
}

/// Reporting constants of the lower-bound argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameConstants {
    pub n: i64,
    pub eps: f64,
}

impl GameConstants {
    pub fn new(p: usize, k: usize) -> Self {
        let eps = (25.0f64 / 32.0).powi(k as i32 + 1);
        let a = (p as f64 / 8.0).exp() / 16.0 - 5.0;
        let b = (1.0 / eps - 1.0) / 7.5;
        Self { n: a.min(b).floor() as i64, eps }
    }
}

/// Static game parameters; the secret must be admissible.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameParams {
    pub p: usize,
    pub k: usize,
    pub secret: SignVector,
}

impl GameParams {
    pub fn new(p: usize, k: usize, secret: SignVector) -> Result<Self> {
        if secret.p() != p {
            return Err(Error::DimensionMismatch { expected: p, got: secret.p() });
        }
        if !in_wstar(&secret) {
            return Err(Error::InvalidParams(format!("secret {secret} is not admissible")));
        }
        if k == 0 {
            return Err(Error::InvalidParams("K must be positive".into()));
        }
        Ok(Self { p, k, secret })
    }
}

/// Feedback bits of one game query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameResponse {
    pub u: bool,
    pub v: bool,
    pub z: bool,
}

/// The exact law of a query's response: `U`, `V` and the success probability of `Z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameLaw {
    pub u: bool,
    pub v: bool,
    pub z_prob: f64,
}

/// A game instance that counts its queries.
#[derive(Debug)]
pub struct AbstractGame {
    params: GameParams,
    queries: Cell<u64>,
}

impl AbstractGame {
    pub fn new(params: GameParams) -> Self {
        Self { params, queries: Cell::new(0) }
    }

    pub fn params(&self) -> &GameParams {
        &self.params
    }

    pub fn queries(&self) -> u64 {
        self.queries.get()
    }

    /// Response law of the query `(L, seq)`; counts as one query.
    pub fn law(&self, l: usize, seq: &[SignVector]) -> Result<GameLaw> {
        let GameParams { p, k, secret } = self.params;
        if l == 0 || l > k {
            return Err(Error::InvalidQuery(format!("length {l} not in [1, {k}]")));
        }
        if seq.len() != l {
            return Err(Error::InvalidQuery(format!("sequence has {} items, expected {l}", seq.len())));
        }
        require_wcirc(seq, p)?;
        self.queries.set(self.queries.get() + 1);
        let penultimate = if l == 1 { SignVector::ones(p) } else { seq[l - 2] };
        let u = is_close(penultimate.hamming_unchecked(&secret), p);
        let v = is_close(seq[l - 1].hamming_unchecked(&secret), p);
        let z_prob = if v || l == k { f_unchecked(seq, &secret) } else { 0.0 };
        Ok(GameLaw { u, v, z_prob })
    }

    /// Sampled response to the query `(L, seq)`.
    pub fn step(&self, l: usize, seq: &[SignVector], rng: &mut StreamRng) -> Result<GameResponse> {
        let law = self.law(l, seq)?;
        let z = law.z_prob > 0.0 && rng.random::<f64>() < law.z_prob;
        Ok(GameResponse { u: law.u, v: law.v, z })
    }
}

/// The secret-free game: every response is zero.
pub fn game0_step(_l: usize, _seq: &[SignVector]) -> GameResponse {
    GameResponse { u: false, v: false, z: false }
}

/// Expected payoff of a final output: `f` of its prefix up to the first item close
/// to the secret (or all eight items).
pub fn game_finalize(params: &GameParams, output: &[SignVector]) -> Result<f64> {
    if output.len() != OUTPUT_LEN {
        return Err(Error::InvalidSequence(format!("output must have {OUTPUT_LEN} items")));
    }
    require_wcirc(output, params.p)?;
    let secret = params.secret;
    let k_star = output
        .iter()
        .position(|w| is_close(w.hamming_unchecked(&secret), params.p))
        .map_or(OUTPUT_LEN, |i| i + 1);
    Ok(f_unchecked(&output[..k_star], &secret))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Streams;

    fn sv(s: &str) -> SignVector {
        s.parse().unwrap()
    }

    #[test]
    fn hamming_examples() {
        let w = sv("+-+-");
        assert_eq!(hamming(&w, &w).unwrap(), 0);
        assert_eq!(hamming(&SignVector::ones(4), &sv("----")).unwrap(), 4);
        assert_eq!(hamming(&sv("++++"), &sv("-+-+")).unwrap(), 2);
        assert!(hamming(&sv("++"), &sv("+++")).is_err());
    }

    #[test]
    fn g_examples() {
        assert_eq!(g(0, 4).unwrap(), 1.0);
        assert_eq!(g(4, 4).unwrap(), 0.375);
        assert_eq!(g(1, 2).unwrap(), 0.5);
        assert!(g(5, 4).is_err());
        assert!(g(-1, 4).is_err());
        for p in [4usize, 8, 16] {
            assert!(g((p / 4) as i64, p).unwrap() < 25.0 / 32.0);
        }
    }

    #[test]
    fn f_examples() {
        assert_eq!(f(&[], &sv("--++")).unwrap(), 0.5625);
        assert!(f(&[sv("+-++++++")], &sv("----++++")).is_err());
    }

    #[test]
    fn wcirc_examples() {
        assert!(wcirc_check(&[]));
        assert!(wcirc_check(&[sv("-+")]));
        assert!(!wcirc_check(&[sv("--++++++"), sv("---+++++")]));
    }

    #[test]
    fn wstar_p2_is_the_two_mixed_vectors() {
        assert_eq!(enumerate_wstar(2).unwrap(), vec![sv("-+"), sv("+-")]);
        let mut rng = Streams::new(1).stream("wstar", 0);
        for _ in 0..200 {
            assert!(in_wstar(&sample_wstar(4, &mut rng).unwrap()));
        }
        assert!(sample_wstar(1, &mut rng).is_err());
    }

    #[test]
    fn close_counts() {
        assert_eq!(wclose_count(2).unwrap(), 1);
        assert_eq!(wclose_count(8).unwrap(), 9);
        assert!(wclose_count(21).is_err());
    }

    #[test]
    fn game_responses() {
        let params = GameParams::new(2, 3, sv("-+")).unwrap();
        let game = AbstractGame::new(params);
        let mut rng = Streams::new(3).stream("game", 0);
        let r = game.step(1, &[sv("-+")], &mut rng).unwrap();
        assert!(r.v && !r.u);
        let law = game.law(2, &[sv("+-"), sv("-+")]).unwrap();
        assert!(law.v);
        assert_eq!(game.queries(), 2);
        let params8 = GameParams::new(8, 3, sv("----++++")).unwrap();
        let game8 = AbstractGame::new(params8);
        let far = [sv("++++----"), sv("+++++++-")];
        assert_eq!(game8.step(2, &far, &mut rng).unwrap(), GameResponse { u: false, v: false, z: false });
        assert!(game8.step(0, &[], &mut rng).is_err());
        assert!(game8.step(2, &[sv("-+++++++"), sv("++++----")], &mut rng).is_err());
    }

    #[test]
    fn finalize_examples() {
        let params = GameParams::new(2, 8, sv("-+")).unwrap();
        let out: Vec<_> = (0..8).map(|i| if i % 2 == 0 { sv("-+") } else { sv("+-") }).collect();
        assert_eq!(game_finalize(&params, &out).unwrap(), 0.5);
        assert!(game_finalize(&params, &out[..7]).is_err());
        assert_eq!(game0_step(1, &out[..1]), GameResponse { u: false, v: false, z: false });
    }

    #[test]
    fn constants() {
        let c = GameConstants::new(64, 10);
        assert_eq!(c.eps, (25.0f64 / 32.0).powi(11));
        assert!(c.n >= 1);
    }
}
