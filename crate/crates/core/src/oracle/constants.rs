//! Planner constants recomputed in log space, with the `E_d`/`eps` coupling
//! resolved by bisection instead of forward iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensorplan::{TpConfig, TpConstants};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConstants {
    pub e_d: u64,
    pub zeta: f64,
    pub eps: f64,
    pub n1: u128,
    pub n2: u128,
    pub n3: u128,
    pub sol_tol: f64,
    pub iterations: u64,
}

/// Outcome of comparing the planner's constants with the reference values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsComparison {
    pub integers_equal: bool,
    pub max_relative_error: f64,
    pub pass: bool,
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

struct Logs {
    d1: f64,
    a: f64,
    h: f64,
    b1: f64,
    delta: f64,
}

impl Logs {
    fn ln_eps(&self, e_d: Option<u64>) -> f64 {
        let base = self.a * (self.delta.ln() - 12f64.ln() - 2.0 * self.h.ln());
        match e_d {
            None => base,
            Some(e) => base - (0.5 / (e as f64).sqrt()).ln_1p(),
        }
    }

    fn e_d(&self, ln_eps: f64) -> Result<u64> {
        let ln_ratio = 2f64.ln() + self.a * (self.b1.ln() + 3f64.ln() - self.h.ln()) - ln_eps;
        let ln_inner = 3f64.ln() + softplus(2.0 * ln_ratio);
        let e = std::f64::consts::E;
        let lead = (3.0f64.ln() + self.a * self.d1.ln() + (e / (e - 1.0)).ln()).exp();
        let v = (lead * ln_inner + 1.0).floor();
        if !v.is_finite() || v >= u64::MAX as f64 {
            return Err(Error::Overflow("E_d"));
        }
        Ok(v as u64)
    }

    fn map(&self, e: u64) -> Result<u64> {
        self.e_d(self.ln_eps(Some(e)))
    }
}

fn count(ln_value: f64, what: &'static str) -> Result<u128> {
    let v = ln_value.exp();
    if !v.is_finite() || v >= u128::MAX as f64 {
        return Err(Error::Overflow(what));
    }
    Ok(v.ceil().max(0.0) as u128)
}

/// Reference evaluation of every planner constant.
pub fn reference_constants(cfg: &TpConfig) -> Result<ReferenceConstants> {
    cfg.validate()?;
    let l = Logs { d1: cfg.d as f64 + 1.0, a: cfg.a as f64, h: cfg.h as f64, b1: cfg.b + 1.0, delta: cfg.delta };

    // The map E -> E_d(eps(E)) is non-increasing, so it crosses the diagonal once.
    let lo_bound = l.e_d(l.ln_eps(None))?;
    let hi_bound = l.map(1)?.max(lo_bound);
    let (mut lo, mut hi) = (lo_bound.max(1), hi_bound.max(1));
    if l.map(lo)? <= lo {
        hi = lo;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if l.map(mid)? <= mid {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let mut e_d = lo;
    if l.map(e_d)? != e_d {
        // No exact fixed point: settle on the larger member of the orbit's cycle.
        let mut orbit = vec![e_d];
        let mut x = e_d;
        loop {
            x = l.map(x)?;
            if let Some(pos) = orbit.iter().position(|&y| y == x) {
                e_d = *orbit[pos..].iter().max().expect("non-empty");
                break;
            }
            orbit.push(x);
        }
    }

    let ln_eps = l.ln_eps(Some(e_d));
    let ln_ed = (e_d as f64).ln();
    let ln_ed1 = (e_d as f64 + 1.0).ln();
    let ln_zeta = l.delta.ln() - 4f64.ln() - l.h.ln();
    let ln_n1 = 5.0 * 2f64.ln() + 2.0 * (1.0 + 2.0 * cfg.b).ln() - 2.0 * l.delta.ln() + (ln_ed1 - ln_zeta).ln();
    let n1 = count(ln_n1, "n1")?;
    let ln_n1c = (n1 as f64).ln();
    let ln_n2 = 1867f64.ln() + 2.0 * l.h.ln() + 2.0 * l.b1.ln() + l.d1.ln() - 2f64.ln() - 2.0 * l.delta.ln()
        + (4f64.ln() + ln_ed1 + ln_n1c + l.h.ln() + l.a.ln() + l.d1.ln() - ln_zeta).ln();
    let n2 = count(ln_n2, "n2")?;
    let ln_n3 = 5.0 * 2f64.ln() + 2.0 * (l.h + 1.0).ln() + ln_ed - 2.0 * ln_eps
        + (2f64.ln() + ln_ed1 + ln_n1c + l.h.ln() + l.a.ln()).ln()
        - ln_zeta;
    let n3 = count(ln_n3, "n3")?.max(n2);
    let sol_tol = (l.a * l.h.ln() + ln_eps - 2f64.ln() - 0.5 * ln_ed).exp();
    let iterations = cfg.ed_cap.unwrap_or(u64::MAX).min(e_d).saturating_add(2);
    Ok(ReferenceConstants { e_d, zeta: ln_zeta.exp(), eps: ln_eps.exp(), n1, n2, n3, sol_tol, iterations })
}

impl ReferenceConstants {
    /// Integers must be equal, except sample sizes beyond 2^53: those are ceilings of
    /// values no double carries exactly, so they only need to agree to relative `tol`.
    /// Floats must agree to relative `tol`.
    pub fn compare(&self, c: &TpConstants, tol: f64) -> ConstantsComparison {
        let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
        let exact_limit = 1u128 << f64::MANTISSA_DIGITS;
        let near = |x: u128, y: u128| x == y || (x.max(y) > exact_limit && rel(x as f64, y as f64) <= tol);
        let integers_equal = self.e_d == c.e_d
            && self.iterations == c.iterations
            && near(self.n1, c.n1)
            && near(self.n2, c.n2)
            && near(self.n3, c.n3);
        let max_relative_error = [
            rel(self.zeta, c.zeta),
            rel(self.eps, c.eps),
            rel(self.sol_tol, c.sol_tol),
            rel(self.n1 as f64, c.n1 as f64),
            rel(self.n2 as f64, c.n2 as f64),
            rel(self.n3 as f64, c.n3 as f64),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        ConstantsComparison { integers_equal, max_relative_error, pass: integers_equal && max_relative_error <= tol }
    }
}
