use crate::error::Result;
use crate::linalg::dot;
use crate::mdp::Oracle;

/// Averaged `[reward, phi(next) - phi(s)]` samples for every action, each of length `d + 1`.
pub fn approx_td<O: Oracle>(oracle: &mut O, s: &O::State, phi_s: &[f64], n: u64) -> Result<Vec<Vec<f64>>> {
    let d = phi_s.len();
    let mut out = Vec::with_capacity(oracle.num_actions());
    for a in 0..oracle.num_actions() {
        let mut acc = vec![0.0; d + 1];
        for _ in 0..n {
            let (r, _, phi_next) = oracle.query(s, a)?;
            acc[0] += r;
            for j in 0..d {
                acc[j + 1] += phi_next[j] - phi_s[j];
            }
        }
        let inv = 1.0 / n as f64;
        acc.iter_mut().for_each(|v| *v *= inv);
        out.push(acc);
    }
    Ok(out)
}

/// `<delta, [1, theta]>`
pub fn residual(delta: &[f64], theta: &[f64]) -> f64 {
    delta[0] + dot(&delta[1..], theta)
}

/// Action with the smallest absolute residual; ties go to the smallest index.
pub fn most_consistent_action(deltas: &[Vec<f64>], theta: &[f64]) -> usize {
    let scores: Vec<f64> = deltas.iter().map(|d| residual(d, theta).abs()).collect();
    crate::linalg::argmin(&scores)
}
