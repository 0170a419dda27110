use rand::Rng;

use super::{close_ref, diff_bits, g_ref, LemmaReport};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

const TOL: f64 = 1e-12;

/// Exhaustive check of `prod g(x_j) <= g(c1 + c3) g(c2)` under the five preconditions.
pub fn check_optimise_ks(p_max: usize, l_max: usize) -> Result<LemmaReport> {
    if p_max > 8 || l_max > 5 {
        return Err(Error::Budget(format!("optimise-ks sweep is capped at p <= 8, l <= 5 (got {p_max}, {l_max})")));
    }
    let mut report = LemmaReport::new("optimise-ks", TOL);
    for p in 2..=p_max {
        for l in 2..=l_max {
            let mut xs = vec![0u32; l];
            loop {
                let total: u32 = xs.iter().sum();
                let tail: u32 = xs[1..].iter().sum();
                let lhs: f64 = xs.iter().map(|&x| g_ref(x, p)).product();
                let pu = p as u32;
                for c1 in 0..=pu.min(xs[0]) {
                    for c3 in 0..=(pu - c1) {
                        for c2 in 0..=pu.min(tail) {
                            let either = c2 <= c1 || c3 == 0;
                            if !either || c1 + c2 + c3 > total {
                                continue;
                            }
                            let rhs = g_ref(c1 + c3, p) * g_ref(c2, p);
                            report.record(lhs, rhs, || format!("p={p} x={xs:?} c=({c1},{c2},{c3})"));
                        }
                    }
                }
                if !next_tuple(&mut xs, pu) {
                    break;
                }
            }
        }
    }
    Ok(report)
}

fn next_tuple(xs: &mut [u32], max: u32) -> bool {
    for x in xs.iter_mut() {
        if *x < max {
            *x += 1;
            return true;
        }
        *x = 0;
    }
    false
}

fn admissible_secret(bits: u64, p: usize) -> bool {
    let neg = bits.count_ones() as f64;
    neg >= p as f64 / 4.0 && neg <= 3.0 * p as f64 / 4.0
}

fn f_ref(seq: &[u64], secret: u64, p: usize) -> f64 {
    let mut prev = 0u64;
    let mut out = 1.0;
    for &w in seq {
        out *= g_ref(diff_bits(prev, w), p);
        prev = w;
    }
    out * g_ref(diff_bits(prev, secret), p)
}

fn record_f(report: &mut LemmaReport, seq: &[u64], secret: u64, p: usize) {
    let f = f_ref(seq, secret, p);
    let last = seq.last().copied().unwrap_or(0);
    let far = !close_ref(diff_bits(last, secret), p);
    let power = seq.len() as i32 + i32::from(far);
    let witness = || format!("p={p} secret={secret:#b} seq={seq:?} f={f}");
    report.record(f, (25.0f64 / 32.0).powi(power), witness);
    // Strict positivity: a non-positive value counts as a unit violation.
    report.record(if f > 0.0 { 0.0 } else { 1.0 }, 0.0, witness);
    if seq.is_empty() {
        report.record(11.0 / 32.0, f, witness);
    }
}

/// Bounds on `f`: `11/32 <= f(()) <= 25/32` and the decay bound in the sequence length.
///
/// `p = 4` is swept exhaustively over all admissible secrets and sequences of length
/// at most 3; larger `p` draws `samples` random (secret, sequence) pairs.
pub fn check_f_bounds(ps: &[usize], samples: u64, rng: &mut StreamRng) -> Result<LemmaReport> {
    let mut report = LemmaReport::new("f-bounds", TOL);
    for &p in ps {
        if !(2..=12).contains(&p) {
            return Err(Error::Budget(format!("f-bounds supports 2 <= p <= 12, got {p}")));
        }
        let all = 1u64 << p;
        let secrets: Vec<u64> = (0..all).filter(|&b| admissible_secret(b, p)).collect();
        if p <= 4 {
            // Successors of each point that keep the sequence admissible.
            let far_from: Vec<Vec<u64>> =
                (0..all).map(|w| (0..all).filter(|&v| !close_ref(diff_bits(w, v), p)).collect()).collect();
            for &secret in &secrets {
                record_f(&mut report, &[], secret, p);
                let mut stack: Vec<Vec<u64>> = far_from[0].iter().map(|&w| vec![w]).collect();
                while let Some(seq) = stack.pop() {
                    record_f(&mut report, &seq, secret, p);
                    if seq.len() < 3 {
                        for &v in &far_from[*seq.last().expect("non-empty") as usize] {
                            let mut next = seq.clone();
                            next.push(v);
                            stack.push(next);
                        }
                    }
                }
            }
        } else {
            for _ in 0..samples {
                let secret = secrets[rng.random_range(0..secrets.len())];
                let k = rng.random_range(0..=3usize);
                let mut seq = Vec::with_capacity(k);
                let mut prev = 0u64;
                while seq.len() < k {
                    let v = rng.random::<u64>() & (all - 1);
                    if !close_ref(diff_bits(prev, v), p) {
                        seq.push(v);
                        prev = v;
                    }
                }
                record_f(&mut report, &seq, secret, p);
            }
        }
    }
    Ok(report)
}

/// Exact close-corner counts against `2^p exp(-p/8)`, by direct enumeration of the cube.
pub fn check_close_count(p_max: usize) -> Result<LemmaReport> {
    if p_max > 16 {
        return Err(Error::Budget(format!("close-count enumeration is capped at p = 16, got {p_max}")));
    }
    let mut report = LemmaReport::new("close-to-corner-count", TOL);
    let mut previous = 0u64;
    for p in 2..=p_max {
        let count = (0..1u64 << p).filter(|&v| close_ref(v.count_ones(), p)).count() as u64;
        let bound = 2f64.powi(p as i32) * (-(p as f64) / 8.0).exp();
        report.record(count as f64, bound, || format!("p={p} count={count} bound={bound}"));
        // More corners are never fewer close points.
        report.record(previous as f64, count as f64, || format!("p={p} count {count} below previous {previous}"));
        previous = count;
    }
    Ok(report)
}
