//! Feature maps and the hidden parameter.
//!
//! `g` is a quadratic, so `g(a0 + <a1, w~>)` with `w~ = w*/sqrt(p)` is a polynomial
//! of degree two in `w~`. Its coefficient blocks `[X0, X1, X2]` are paired with
//! `[1, w~, w~ (x) w~]` inside the parameter. Products of two such polynomials give
//! degree-four blocks `Z0..Z4`.

use super::params::HardMdpParams;
use super::state::{Advance, RoundStats};
use crate::game::{g_unchecked, SignVector};
use crate::linalg::{kron, tensor_power};

/// Scale of the parameter blocks.
pub const THETA_SCALE: f64 = 63.0;

/// Coefficient blocks of a polynomial in `w~`; block `n` has length `p^n`.
type Blocks = Vec<Vec<f64>>;

fn g_coefficients(p: usize) -> (f64, f64) {
    let p = p as f64;
    ((-2.0 * p - 1.0) / (2.0 * p * p), 1.0 / (2.0 * p * p))
}

/// Blocks `[X0, X1, X2]` of `g(a0 + <a1, w~>)`.
pub fn quadratic_blocks(p: usize, a0: f64, a1: &[f64]) -> Blocks {
    let (c1, c2) = g_coefficients(p);
    let x0 = 1.0 + c1 * a0 + c2 * a0 * a0;
    let x1 = a1.iter().map(|v| (c1 + 2.0 * c2 * a0) * v).collect();
    let x2 = kron(a1, a1).into_iter().map(|v| c2 * v).collect();
    vec![vec![x0], x1, x2]
}

/// Product of two block polynomials.
pub fn poly_mul(x: &Blocks, y: &Blocks) -> Blocks {
    let mut out: Blocks = Vec::with_capacity(x.len() + y.len() - 1);
    for n in 0..x.len() + y.len() - 1 {
        let mut acc: Option<Vec<f64>> = None;
        for i in 0..x.len() {
            if n < i || n - i >= y.len() {
                continue;
            }
            let term = kron(&x[i], &y[n - i]);
            match acc.as_mut() {
                None => acc = Some(term),
                Some(a) => a.iter_mut().zip(&term).for_each(|(s, t)| *s += t),
            }
        }
        out.push(acc.expect("every degree has a term"));
    }
    out
}

fn flatten(blocks: &Blocks, scale: f64, d: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(d);
    for b in blocks {
        out.extend(b.iter().map(|v| scale * v));
    }
    out.resize(d, 0.0);
    out
}

fn masked(w: &SignVector, mask: u64, factor: f64) -> Vec<f64> {
    (0..w.p())
        .map(|j| if mask >> j & 1 == 1 { factor * f64::from(w.get(j)) } else { 0.0 })
        .collect()
}

/// Blocks `[X0, X1, X2]` and `[Y0, Y1, Y2]` of the two `g` factors of `v'`.
pub fn value_factor_blocks(params: &HardMdpParams, st: &RoundStats) -> (Blocks, Blocks) {
    let p = params.p;
    let half_root = -(p as f64).sqrt() / 2.0;
    let n_fix = f64::from(st.fix.count_ones());
    let n_notfix = p as f64 - n_fix;
    let x = quadratic_blocks(
        p,
        f64::from(st.ct_flip()) + n_notfix / 2.0,
        &masked(&st.w, !st.fix & params.mask(), half_root),
    );
    let y = quadratic_blocks(p, n_fix / 2.0, &masked(&st.w, st.fix, half_root));
    (x, y)
}

/// State features of a non-terminal state.
pub fn phi_v(params: &HardMdpParams, st: &RoundStats) -> Vec<f64> {
    let (x, y) = value_factor_blocks(params, st);
    flatten(&poly_mul(&x, &y), st.prefix / THETA_SCALE, params.d)
}

/// Blocks of `g(diff(w, w*))` for a completed round weight `w`.
pub fn completion_blocks(params: &HardMdpParams, w: &SignVector) -> Blocks {
    let p = params.p;
    quadratic_blocks(p, p as f64 / 2.0, &masked(w, params.mask(), -(p as f64).sqrt() / 2.0))
}

/// Scalar `prefix * g(diff(w0, w(s,a))) / 63` multiplying the completion blocks.
pub fn completion_scale(params: &HardMdpParams, st: &RoundStats, a: usize) -> f64 {
    st.prefix / THETA_SCALE * g_unchecked(st.w0.hamming_unchecked(&st.w_after(a)), params.p)
}

/// State-action features of a non-terminal state.
pub fn phi_q(params: &HardMdpParams, st: &RoundStats, a: usize) -> Vec<f64> {
    if st.i + 1 < params.p {
        return match st.advance(params, a) {
            Advance::Within(child) => phi_v(params, &child),
            _ => vec![0.0; params.d],
        };
    }
    flatten(&completion_blocks(params, &st.w_after(a)), completion_scale(params, st, a), params.d)
}

/// `63 [1, w~, w~^2, w~^3, w~^4, 0...]` with `w~ = secret / sqrt(p)`.
pub fn theta_star(params: &HardMdpParams, secret: &SignVector) -> Vec<f64> {
    let root = (params.p as f64).sqrt();
    let wt: Vec<f64> = secret.to_f64().into_iter().map(|v| v / root).collect();
    let blocks: Blocks = (0..=4).map(|n| tensor_power(&wt, n)).collect();
    flatten(&blocks, THETA_SCALE, params.d)
}

/// Closed-form value `prefix * g(ct_flip + e_notfix) * g(e_fix)`.
pub fn v_prime(params: &HardMdpParams, st: &RoundStats, secret: &SignVector) -> f64 {
    let (e_fix, e_notfix) = st.error_counts(secret, params.mask());
    st.prefix * g_unchecked(st.ct_flip() + e_notfix, params.p) * g_unchecked(e_fix, params.p)
}

/// Expected payoff of completing the round with action `a`: `prefix * g(diff(w0, w')) * g(diff(w', w*))`.
pub fn round_payoff(params: &HardMdpParams, st: &RoundStats, a: usize, secret: &SignVector) -> f64 {
    let w_new = st.w_after(a);
    st.prefix * g_unchecked(st.w0.hamming_unchecked(&w_new), params.p) * g_unchecked(w_new.hamming_unchecked(secret), params.p)
}
