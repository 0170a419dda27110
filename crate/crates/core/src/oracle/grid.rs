use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensorplan::ConstraintTensor;

/// Best grid point found, or `None` when no grid point is feasible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub theta: Option<Vec<f64>>,
    pub value: f64,
    pub points: u64,
}

/// `prod_j (delta_j[0] + <delta_j[1..], theta>)`.
fn product(factors: &[Vec<f64>], theta: &[f64]) -> f64 {
    factors.iter().map(|f| f[0] + f[1..].iter().zip(theta).map(|(x, y)| x * y).sum::<f64>()).product()
}

/// Exhaustive grid search for `max <objective, theta>` subject to `||theta|| <= b`
/// and `|prod_j <delta_j, [1, theta]>| <= sol_tol` for every constraint.
///
/// The grid has `resolution + 1` points per axis over `[-b, b]^d`. Limited to
/// `d <= 3` and constraints with at most two factors.
pub fn grid_oracle_optimistic(
    objective: &[f64],
    constraints: &[ConstraintTensor],
    b: f64,
    sol_tol: f64,
    resolution: usize,
) -> Result<GridResult> {
    let d = objective.len();
    if d == 0 || d > 3 {
        return Err(Error::Budget(format!("grid oracle supports 1 <= d <= 3, got {d}")));
    }
    if constraints.iter().any(|c| c.factors().len() > 2) {
        return Err(Error::Budget("grid oracle supports at most two factors per constraint".into()));
    }
    if constraints.iter().flat_map(|c| c.factors()).any(|f| f.len() != d + 1) {
        return Err(Error::DimensionMismatch { expected: d + 1, got: 0 });
    }
    if resolution == 0 {
        return Err(Error::InvalidParams("grid resolution must be positive".into()));
    }
    let step = 2.0 * b / resolution as f64;
    let mut best = GridResult { theta: None, value: f64::NEG_INFINITY, points: 0 };
    let mut idx = vec![0usize; d];
    let mut theta = vec![0.0; d];
    loop {
        for (t, &i) in theta.iter_mut().zip(&idx) {
            *t = -b + step * i as f64;
        }
        best.points += 1;
        let inside = theta.iter().map(|x| x * x).sum::<f64>() <= b * b * (1.0 + 1e-12);
        if inside && constraints.iter().all(|c| product(c.factors(), &theta).abs() <= sol_tol) {
            let value: f64 = objective.iter().zip(&theta).map(|(x, y)| x * y).sum();
            if best.theta.is_none() || value > best.value {
                best.value = value;
                best.theta = Some(theta.clone());
            }
        }
        let mut axis = 0;
        loop {
            if axis == d {
                return Ok(best);
            }
            idx[axis] += 1;
            if idx[axis] <= resolution {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infeasible_when_tolerance_negative() {
        let r = grid_oracle_optimistic(&[1.0, 0.0], &[], 1.0, -1.0, 10).unwrap();
        assert!(r.theta.is_some());
        let c = ConstraintTensor::new(vec![vec![0.0, 1.0, 0.0]]);
        let r = grid_oracle_optimistic(&[1.0, 0.0], &[c], 1.0, -1.0, 10).unwrap();
        assert!(r.theta.is_none());
    }

    #[test]
    fn unconstrained_optimum_on_axis() {
        let r = grid_oracle_optimistic(&[1.0, 0.0], &[], 2.0, 0.0, 20).unwrap();
        assert_eq!(r.theta.unwrap(), vec![2.0, 0.0]);
        assert_eq!(r.value, 2.0);
        assert_eq!(r.points, 21 * 21);
    }

    #[test]
    fn hyperplane_constraint_pins_coordinate() {
        // theta_0 must vanish, so the best point maximizes theta_1 alone.
        let c = ConstraintTensor::new(vec![vec![0.0, 1.0, 0.0]]);
        let r = grid_oracle_optimistic(&[1.0, 1.0], &[c], 1.0, 1e-12, 10).unwrap();
        assert_eq!(r.theta.unwrap(), vec![0.0, 1.0]);
    }
}
