//! Monte Carlo check that a planner without game access cannot match the
//! empty-sequence payoff.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{close_ref, diff_bits, g_ref};
use crate::error::{Error, Result};
use crate::game::{game_finalize, sample_wstar, GameParams, SignVector, OUTPUT_LEN};
use crate::rng::StreamRng;

/// Secret-blind output strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmokePlanner {
    /// One admissible output drawn once and reused for every trial.
    FixedOutput,
    /// A fresh admissible output per trial.
    RandomOutput,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardnessReport {
    pub p: usize,
    pub k: usize,
    pub planner: SmokePlanner,
    pub trials: u64,
    pub mean_payoff: f64,
    pub mean_f_empty: f64,
    /// Mean of `f(()) - payoff` per trial.
    pub gap: f64,
    pub gap_stderr: f64,
    /// One-sided 95% lower confidence bound on the gap.
    pub gap_lower: f64,
    /// Mean payoff of a planner that knows the secret and outputs it first.
    pub cheating_mean: f64,
    /// Trials where the library's finalizer disagreed with the local payoff.
    pub finalize_mismatches: u64,
    pub pass: bool,
}

/// Required lower bound on the gap.
pub const GAP_THRESHOLD: f64 = 0.01;
const Z95: f64 = 1.6448536269514722;

fn random_output(p: usize, rng: &mut StreamRng) -> Vec<u64> {
    let mask = if p == 64 { u64::MAX } else { (1u64 << p) - 1 };
    let mut out = Vec::with_capacity(OUTPUT_LEN);
    let mut prev = 0u64;
    while out.len() < OUTPUT_LEN {
        let w = rng.random::<u64>() & mask;
        if !close_ref(diff_bits(prev, w), p) {
            out.push(w);
            prev = w;
        }
    }
    out
}

/// Payoff of an output: `f` of the prefix through the first item close to the secret.
fn payoff(output: &[u64], secret: u64, p: usize) -> f64 {
    let mut prev = 0u64;
    let mut prod = 1.0;
    for &w in output {
        prod *= g_ref(diff_bits(prev, w), p);
        prev = w;
        if close_ref(diff_bits(w, secret), p) {
            break;
        }
    }
    prod * g_ref(diff_bits(prev, secret), p)
}

/// Outcome of one smoke trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmokeTrial {
    pub payoff: f64,
    pub f_empty: f64,
    pub cheating_payoff: f64,
    /// The library finalizer disagreed with the local payoff.
    pub finalize_mismatch: bool,
}

/// Run `trials` independent smoke trials: a fresh secret each, and the planner's output.
pub fn smoke_trials(p: usize, k: usize, planner: SmokePlanner, trials: u64, rng: &mut StreamRng) -> Result<Vec<SmokeTrial>> {
    if !(2..=24).contains(&p) {
        return Err(Error::InvalidParams(format!("smoke test supports 2 <= p <= 24, got {p}")));
    }
    if trials == 0 {
        return Ok(Vec::new());
    }
    let fixed = random_output(p, rng);
    let mut out = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let secret = sample_wstar(p, rng)?;
        let output = match planner {
            SmokePlanner::FixedOutput => fixed.clone(),
            SmokePlanner::RandomOutput => random_output(p, rng),
        };
        let sb = secret.bits();
        let pay = payoff(&output, sb, p);
        let cheat: Vec<u64> = std::iter::once(sb).chain(random_output(p, rng).into_iter().skip(1)).collect();
        let items: Vec<SignVector> = output.iter().map(|&b| SignVector::from_bits(b, p)).collect();
        let lib = game_finalize(&GameParams::new(p, k, secret)?, &items)?;
        out.push(SmokeTrial {
            payoff: pay,
            f_empty: g_ref(sb.count_ones(), p),
            cheating_payoff: payoff(&cheat, sb, p),
            finalize_mismatch: (lib - pay).abs() > 1e-12,
        });
    }
    Ok(out)
}

/// Aggregate trials into a report with a one-sided 95% bound on the gap.
pub fn summarize_smoke(p: usize, k: usize, planner: SmokePlanner, trials: &[SmokeTrial]) -> HardnessReport {
    let mut rep = HardnessReport {
        p,
        k,
        planner,
        trials: trials.len() as u64,
        mean_payoff: 0.0,
        mean_f_empty: 0.0,
        gap: 0.0,
        gap_stderr: 0.0,
        gap_lower: f64::NEG_INFINITY,
        cheating_mean: 0.0,
        finalize_mismatches: trials.iter().filter(|t| t.finalize_mismatch).count() as u64,
        pass: false,
    };
    if trials.is_empty() {
        return rep;
    }
    let n = trials.len() as f64;
    let gaps: Vec<f64> = trials.iter().map(|t| t.f_empty - t.payoff).collect();
    rep.mean_payoff = trials.iter().map(|t| t.payoff).sum::<f64>() / n;
    rep.mean_f_empty = trials.iter().map(|t| t.f_empty).sum::<f64>() / n;
    rep.cheating_mean = trials.iter().map(|t| t.cheating_payoff).sum::<f64>() / n;
    rep.gap = gaps.iter().sum::<f64>() / n;
    if trials.len() > 1 {
        let var = gaps.iter().map(|g| (g - rep.gap).powi(2)).sum::<f64>() / (n - 1.0);
        rep.gap_stderr = (var / n).sqrt();
        rep.gap_lower = rep.gap - Z95 * rep.gap_stderr;
    }
    rep.pass = rep.finalize_mismatches == 0 && rep.gap_lower > GAP_THRESHOLD;
    rep
}

pub fn hardness_smoke(p: usize, k: usize, planner: SmokePlanner, trials: u64, rng: &mut StreamRng) -> Result<HardnessReport> {
    let t = smoke_trials(p, k, planner, trials, rng)?;
    Ok(summarize_smoke(p, k, planner, &t))
}
