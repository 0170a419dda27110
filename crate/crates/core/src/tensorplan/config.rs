use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optimizer knobs for the optimistic parameter choice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Uniform ball samples used as extra starting points.
    pub random_starts: usize,
    /// Projected ascent iterations per starting point.
    pub ascent_iters: usize,
    /// Node budget of the hyperplane branch search.
    pub branch_budget: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { random_starts: 8, ascent_iters: 200, branch_budget: 4096 }
    }
}

/// Problem dimensions and accuracy target of a TensorPlan run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TpConfig {
    pub d: usize,
    pub a: usize,
    pub h: usize,
    pub delta: f64,
    pub b: f64,
    pub scale_n1: f64,
    pub scale_n2: f64,
    pub scale_n3: f64,
    /// Cap on the number of consistency iterations (the loop runs `min(E_d, cap) + 2` times).
    pub ed_cap: Option<u64>,
    /// Relative slack on the constraint tolerance accepted by the solver.
    pub feasibility_slack: f64,
    pub solver: SolverConfig,
}

impl TpConfig {
    /// Formula-exact configuration.
    pub fn new(d: usize, a: usize, h: usize, delta: f64, b: f64) -> Self {
        Self {
            d,
            a,
            h,
            delta,
            b,
            scale_n1: 1.0,
            scale_n2: 1.0,
            scale_n3: 1.0,
            ed_cap: None,
            feasibility_slack: 1e-6,
            solver: SolverConfig::default(),
        }
    }

    pub fn with_scales(mut self, n1: f64, n2: f64, n3: f64) -> Self {
        self.scale_n1 = n1;
        self.scale_n2 = n2;
        self.scale_n3 = n3;
        self
    }

    pub fn with_ed_cap(mut self, cap: u64) -> Self {
        self.ed_cap = Some(cap);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if self.d == 0 || self.a == 0 || self.h == 0 {
            return Err(Error::InvalidParams("d, A and H must be positive".into()));
        }
        if !positive(self.delta) || !positive(self.b) {
            return Err(Error::InvalidParams("delta and B must be positive".into()));
        }
        if ![self.scale_n1, self.scale_n2, self.scale_n3].into_iter().all(positive) {
            return Err(Error::InvalidParams("sample-size scales must be positive".into()));
        }
        if !(self.feasibility_slack >= 0.0) {
            return Err(Error::InvalidParams("feasibility slack must be non-negative".into()));
        }
        Ok(())
    }
}

/// Constants of a TensorPlan run, both formula-exact and as used after scaling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TpConstants {
    pub e_d: u64,
    pub zeta: f64,
    pub eps: f64,
    pub n1: u128,
    pub n2: u128,
    pub n3: u128,
    pub sol_tol: f64,
    /// Sample sizes after applying the scale overrides.
    pub n1_used: u64,
    pub n2_used: u64,
    pub n3_used: u64,
    /// Number of consistency iterations the loop may run.
    pub iterations: u64,
}

fn e_d_of(cfg: &TpConfig, eps: f64) -> Result<u64> {
    let (d, a, h, b) = (cfg.d as f64, cfg.a as i32, cfg.h as f64, cfg.b);
    let e = std::f64::consts::E;
    let ratio = 2.0 * (b + 1.0).powi(a) * 3f64.powi(a) / (h.powi(a) * eps);
    let value = (3.0 * (d + 1.0).powi(a) * e / (e - 1.0) * (3.0 + 3.0 * ratio * ratio).ln() + 1.0).floor();
    if !value.is_finite() || value >= u64::MAX as f64 {
        return Err(Error::Overflow("E_d"));
    }
    Ok(value as u64)
}

fn eps_of(cfg: &TpConfig, e_d: Option<u64>) -> f64 {
    let base = (cfg.delta / (12.0 * (cfg.h as f64).powi(2))).powi(cfg.a as i32);
    match e_d {
        None => base,
        Some(e) => base / (1.0 + 1.0 / (2.0 * (e as f64).sqrt())),
    }
}

fn ceil_count(x: f64, what: &'static str) -> Result<u128> {
    if !x.is_finite() || x >= u128::MAX as f64 {
        return Err(Error::Overflow(what));
    }
    Ok(x.ceil().max(0.0) as u128)
}

fn scaled(n: u128, scale: f64) -> u64 {
    let v = (n as f64 * scale).floor();
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        (v as u64).max(1)
    }
}

/// Evaluate all constants. `E_d` and `eps` are defined in terms of each other;
/// they are resolved by iterating from the `E_d = infinity` value of `eps` until
/// `E_d` repeats (taking the larger value of a two-cycle).
pub fn tp_constants(cfg: &TpConfig) -> Result<TpConstants> {
    cfg.validate()?;
    let mut seen: Vec<u64> = Vec::new();
    let mut e_d = e_d_of(cfg, eps_of(cfg, None))?;
    for _ in 0..64 {
        if seen.contains(&e_d) {
            break;
        }
        seen.push(e_d);
        e_d = e_d_of(cfg, eps_of(cfg, Some(e_d)))?;
    }
    if let Some(pos) = seen.iter().position(|&x| x == e_d) {
        e_d = *seen[pos..].iter().max().expect("non-empty cycle");
    }
    let eps = eps_of(cfg, Some(e_d));
    let (d, a, h, b, delta) = (cfg.d as f64, cfg.a as f64, cfg.h as f64, cfg.b, cfg.delta);
    let ed = e_d as f64;
    let zeta = delta / (4.0 * h);
    let sol_tol = h.powf(a) * eps / (2.0 * ed.sqrt());
    let n1 = ceil_count(32.0 * (1.0 + 2.0 * b).powi(2) / (delta * delta) * ((ed + 1.0) / zeta).ln(), "n1")?;
    let n1f = n1 as f64;
    let n2 = ceil_count(
        1867.0 * h * h * (b + 1.0).powi(2) * (d + 1.0) / (2.0 * delta * delta)
            * (4.0 * (ed + 1.0) * n1f * h * a * (d + 1.0) / zeta).ln(),
        "n2",
    )?;
    let n3_candidate =
        32.0 * (h + 1.0).powi(2) * ed / (eps * eps) * (2.0 * (ed + 1.0) * n1f * h * a).ln() / zeta;
    let n3 = ceil_count(n3_candidate.max(n2 as f64), "n3")?.max(n2);
    let iterations = cfg.ed_cap.map_or(e_d, |cap| cap.min(e_d)).saturating_add(2);
    Ok(TpConstants {
        e_d,
        zeta,
        eps,
        n1,
        n2,
        n3,
        sol_tol,
        n1_used: scaled(n1, cfg.scale_n1),
        n2_used: scaled(n2, cfg.scale_n2),
        n3_used: scaled(n3, cfg.scale_n3),
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_example() {
        let c = tp_constants(&TpConfig::new(2, 2, 10, 0.4, 1.0)).unwrap();
        assert!((c.zeta - 0.01).abs() < 1e-15);
    }

    #[test]
    fn scale_floors_to_one() {
        let cfg = TpConfig::new(2, 2, 3, 0.1, 1.0).with_scales(1.0, 1e-3, 1e-30);
        let c = tp_constants(&cfg).unwrap();
        assert_eq!(c.n2_used as f64, (c.n2 as f64 * 1e-3).floor());
        assert_eq!(c.n3_used, 1);
        assert_eq!(c.n1_used as u128, c.n1);
    }

    #[test]
    fn fixed_point_is_consistent() {
        let cfg = TpConfig::new(2, 2, 3, 0.1, 1.0);
        let c = tp_constants(&cfg).unwrap();
        let again = e_d_of(&cfg, c.eps).unwrap();
        assert!(again == c.e_d || again + 1 == c.e_d || again == c.e_d + 1);
        assert_eq!(tp_constants(&cfg).unwrap(), c);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(tp_constants(&TpConfig::new(2, 2, 3, 0.0, 1.0)).is_err());
        assert!(tp_constants(&TpConfig::new(2, 400, 3, 0.1, 1.0)).is_err());
    }
}
