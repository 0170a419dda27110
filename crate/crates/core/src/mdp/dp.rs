use super::{Mdp, Succ, Tabular};
use crate::error::{Error, Result};

/// Optimal values from backward induction.
#[derive(Clone, Debug)]
pub struct ValueTable {
    pub num_actions: usize,
    /// `v*` per enumerated state; the terminal state is implicit with value 0.
    pub v: Vec<f64>,
    /// `q*` flattened as `s * num_actions + a`.
    pub q: Vec<f64>,
}

impl ValueTable {
    pub fn v_at(&self, s: Succ) -> f64 {
        match s {
            Succ::Bottom => 0.0,
            Succ::State(i) => self.v[i],
        }
    }

    pub fn q_at(&self, s: usize, a: usize) -> f64 {
        self.q[s * self.num_actions + a]
    }

    /// Greedy action at `s`, ties to the smallest index.
    pub fn greedy(&self, s: usize) -> usize {
        crate::linalg::argmax(&self.q[s * self.num_actions..(s + 1) * self.num_actions])
    }
}

fn backup(v: &[f64], s: usize, succ: &[(f64, Succ)]) -> Result<f64> {
    let mut acc = 0.0;
    for &(p, next) in succ {
        if let Succ::State(j) = next {
            if j <= s {
                return Err(Error::NotStageOrdered { from: s, to: j });
            }
            acc += p * v[j];
        }
    }
    Ok(acc)
}

/// Backward induction over an explicit enumeration.
pub fn dp_solve_table(t: &(impl Tabular + ?Sized)) -> Result<ValueTable> {
    let n = t.num_states();
    let na = t.num_actions();
    let mut v = vec![0.0; n];
    let mut q = vec![0.0; n * na];
    let mut succ = Vec::new();
    for s in (0..n).rev() {
        let mut best = f64::NEG_INFINITY;
        for a in 0..na {
            succ.clear();
            let r = t.expected(s, a, &mut succ)?;
            let qa = r + backup(&v, s, &succ)?;
            q[s * na + a] = qa;
            if qa > best {
                best = qa;
            }
        }
        v[s] = best;
    }
    Ok(ValueTable { num_actions: na, v, q })
}

/// Optimal values of an enumerable MDP.
pub fn dp_solve<M: Mdp + ?Sized>(mdp: &M) -> Result<ValueTable> {
    dp_solve_table(mdp.enumeration().ok_or(Error::NotEnumerable)?)
}

/// `v^pi` for every enumerated state of a deterministic memoryless policy.
pub fn policy_values(
    t: &(impl Tabular + ?Sized),
    policy: impl Fn(usize) -> usize,
) -> Result<Vec<f64>> {
    let n = t.num_states();
    let mut v = vec![0.0; n];
    let mut succ = Vec::new();
    for s in (0..n).rev() {
        let a = policy(s);
        if a >= t.num_actions() {
            return Err(Error::ActionOutOfRange { action: a, num_actions: t.num_actions() });
        }
        succ.clear();
        let r = t.expected(s, a, &mut succ)?;
        v[s] = r + backup(&v, s, &succ)?;
    }
    Ok(v)
}

/// `v^pi` at the initial state of an enumerable MDP.
pub fn policy_value<M: Mdp + ?Sized>(mdp: &M, policy: impl Fn(usize) -> usize) -> Result<f64> {
    let t = mdp.enumeration().ok_or(Error::NotEnumerable)?;
    Ok(policy_values(t, policy)?[t.initial_index()])
}

/// Largest `|q*(s,a) - r(s,a) - E v*(s')|` over all pairs.
pub fn bellman_residual(t: &(impl Tabular + ?Sized), values: &ValueTable) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let mut succ = Vec::new();
    for s in 0..t.num_states() {
        for a in 0..t.num_actions() {
            succ.clear();
            let r = t.expected(s, a, &mut succ)?;
            let target = r + succ.iter().map(|&(p, n)| p * values.v_at(n)).sum::<f64>();
            worst = worst.max((values.q_at(s, a) - target).abs());
        }
    }
    Ok(worst)
}
