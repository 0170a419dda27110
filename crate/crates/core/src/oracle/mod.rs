//! Brute-force verifiers that re-derive every checked quantity on a second code path.
//!
//! Nothing here reuses the formula it checks: the hypercube weight algebra, the
//! transition routing of the hard MDP and the planner constants are all written
//! out again from scratch.

mod constants;
mod game_equiv;
mod grid;
mod lemmas;
mod smoke;
mod sweep;

pub use constants::{reference_constants, ConstantsComparison, ReferenceConstants};
pub use game_equiv::{check_game_equivalence, GameEquivalenceReport};
pub use grid::{grid_oracle_optimistic, GridResult};
pub use lemmas::{check_close_count, check_f_bounds, check_optimise_ks};
pub use smoke::{hardness_smoke, smoke_trials, summarize_smoke, HardnessReport, SmokePlanner, SmokeTrial, GAP_THRESHOLD};
pub use sweep::{hard_sweep, SweepOptions, SweepReport};

use serde::{Deserialize, Serialize};

/// Cap on witnesses kept in a report.
pub const MAX_WITNESSES: usize = 32;

/// Outcome of an exhaustive or sampled check of one inequality family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub instances: u64,
    /// Largest amount by which any instance violates its inequality (negative when all hold strictly).
    pub max_violation: f64,
    pub tolerance: f64,
    /// Failing inputs, truncated to the first few.
    pub witnesses: Vec<String>,
    /// Total number of failing instances.
    pub failures: u64,
}

impl LemmaReport {
    pub fn new(lemma: &str, tolerance: f64) -> Self {
        Self {
            lemma: lemma.to_string(),
            instances: 0,
            max_violation: f64::NEG_INFINITY,
            tolerance,
            witnesses: Vec::new(),
            failures: 0,
        }
    }

    /// Record one instance of `lhs <= rhs`.
    pub fn record(&mut self, lhs: f64, rhs: f64, witness: impl FnOnce() -> String) {
        self.instances += 1;
        let violation = lhs - rhs;
        if violation > self.max_violation || violation.is_nan() {
            self.max_violation = violation;
        }
        if !(violation <= self.tolerance) {
            self.failures += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }

    pub fn pass(&self) -> bool {
        self.failures == 0 && self.witnesses.is_empty() && !(self.max_violation > self.tolerance)
    }

    /// Combine two reports of the same lemma.
    pub fn merge(mut self, other: LemmaReport) -> LemmaReport {
        self.instances += other.instances;
        self.failures += other.failures;
        if other.max_violation > self.max_violation {
            self.max_violation = other.max_violation;
        }
        for w in other.witnesses {
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w);
            }
        }
        self
    }
}

/// `g(x)` written as a single fraction, independent of the game module.
pub(crate) fn g_ref(x: u32, p: usize) -> f64 {
    let (x, p) = (f64::from(x), p as f64);
    (2.0 * p * p - 2.0 * p * x + x * x - x) / (2.0 * p * p)
}

/// Hamming distance of two sign vectors given as bit masks (bit set = -1).
pub(crate) fn diff_bits(a: u64, b: u64) -> u32 {
    (a ^ b).count_ones()
}

/// `diff < p/4`.
pub(crate) fn close_ref(diff: u32, p: usize) -> bool {
    (diff as f64) < p as f64 / 4.0
}
