use serde::{Deserialize, Serialize};

use super::td::residual;
use crate::linalg::{augment, dot, kron_all};

/// Largest flattened tensor that is stored explicitly.
pub const MATERIALIZE_LIMIT: usize = 1_000_000;

/// The tensor product of one TD vector per action, kept in factor form and
/// flattened when small enough.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintTensor {
    factors: Vec<Vec<f64>>,
    flat: Option<Vec<f64>>,
}

impl ConstraintTensor {
    pub fn new(factors: Vec<Vec<f64>>) -> Self {
        let size = factors.iter().try_fold(1usize, |acc, f| acc.checked_mul(f.len()));
        let flat = match size {
            Some(n) if n <= MATERIALIZE_LIMIT => Some(kron_all(&factors)),
            _ => None,
        };
        Self { factors, flat }
    }

    pub fn factors(&self) -> &[Vec<f64>] {
        &self.factors
    }

    pub fn flat(&self) -> Option<&[f64]> {
        self.flat.as_deref()
    }

    /// Product of the per-action residuals at `theta`.
    pub fn eval(&self, theta: &[f64]) -> f64 {
        self.factors.iter().map(|f| residual(f, theta)).product()
    }

    /// Inner product of the flattened tensor with the tensor power of `[1, theta]`.
    pub fn eval_flat(&self, theta: &[f64]) -> Option<f64> {
        let flat = self.flat.as_ref()?;
        let aug = augment(theta);
        let power = kron_all(&vec![aug; self.factors.len()]);
        Some(dot(flat, &power))
    }

    /// Gradient of [`eval`](Self::eval) with respect to `theta`.
    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let values: Vec<f64> = self.factors.iter().map(|f| residual(f, theta)).collect();
        let mut grad = vec![0.0; theta.len()];
        for (a, f) in self.factors.iter().enumerate() {
            let others: f64 = values.iter().enumerate().filter(|(b, _)| *b != a).map(|(_, v)| v).product();
            for (g, x) in grad.iter_mut().zip(&f[1..]) {
                *g += others * x;
            }
        }
        grad
    }

    pub fn satisfied(&self, theta: &[f64], tol: f64) -> bool {
        self.eval(theta).abs() <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_flat_agree() {
        let c = ConstraintTensor::new(vec![vec![0.5, 1.0, -2.0], vec![0.1, 0.3, 0.7]]);
        let theta = [0.2, -0.4];
        let prod = (0.5 + 0.2 + 0.8) * (0.1 + 0.06 - 0.28);
        assert!((c.eval(&theta) - prod).abs() < 1e-15);
        assert!((c.eval_flat(&theta).unwrap() - prod).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let c = ConstraintTensor::new(vec![vec![0.5, 1.0, -2.0], vec![0.1, 0.3, 0.7], vec![-0.2, 0.4, 0.1]]);
        let theta = [0.3, 0.1];
        let g = c.gradient(&theta);
        for j in 0..2 {
            let mut t = theta;
            t[j] += 1e-6;
            let fd = (c.eval(&t) - c.eval(&theta)) / 1e-6;
            assert!((fd - g[j]).abs() < 1e-5);
        }
    }
}
