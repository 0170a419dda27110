//! Approximate maximization of a linear objective over the constraint set.
//!
//! Each constraint is a product of affine factors, so its zero set is a union of
//! hyperplanes. The solver combines two strategies and keeps the best feasible
//! point: a branch search that pins one factor of a violated constraint at a time
//! and maximizes the objective exactly on the resulting ball-affine slice, and
//! penalized projected ascent from several starting points.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::config::SolverConfig;
use super::constraint::ConstraintTensor;
use crate::linalg::{dot, norm, project_ball};
use crate::rng::StreamRng;

/// Outcome of the optimistic choice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub theta: Vec<f64>,
    pub value: f64,
    pub feasible: bool,
    /// No candidate was feasible and the zero vector was returned.
    pub fallback: bool,
}

struct Problem<'a> {
    constraints: &'a [ConstraintTensor],
    objective: &'a [f64],
    b: f64,
    tol: f64,
}

impl Problem<'_> {
    fn feasible(&self, theta: &[f64]) -> bool {
        norm(theta) <= self.b * (1.0 + 1e-12) && self.constraints.iter().all(|c| c.satisfied(theta, self.tol))
    }

    fn violation(&self, theta: &[f64]) -> f64 {
        self.constraints.iter().map(|c| (c.eval(theta).abs() - self.tol).max(0.0)).sum()
    }
}

#[derive(Default)]
struct Best {
    theta: Option<Vec<f64>>,
    value: f64,
}

impl Best {
    fn offer(&mut self, problem: &Problem<'_>, theta: Vec<f64>) {
        if !problem.feasible(&theta) {
            return;
        }
        let value = dot(problem.objective, &theta);
        if self.theta.is_none() || value > self.value {
            self.value = value;
            self.theta = Some(theta);
        }
    }
}

/// Maximize `<objective, theta>` over `{||theta|| <= b, rows theta = rhs}`.
fn maximize_on_slice(rows: &[Vec<f64>], rhs: &[f64], objective: &[f64], b: f64) -> Option<Vec<f64>> {
    let d = objective.len();
    let obj_norm = norm(objective);
    if rows.is_empty() {
        return Some(if obj_norm > 0.0 { objective.iter().map(|v| b * v / obj_norm).collect() } else { vec![0.0; d] });
    }
    let m = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    let c = DVector::from_column_slice(rhs);
    let pinv = m.clone().pseudo_inverse(1e-12).ok()?;
    let theta0 = &pinv * &c;
    let residual = (&m * &theta0 - &c).norm();
    if residual > 1e-9 * (1.0 + c.norm()) {
        return None;
    }
    let r0 = theta0.norm();
    if r0 > b {
        return None;
    }
    let obj = DVector::from_column_slice(objective);
    let projected = &obj - &pinv * (&m * &obj);
    let pn = projected.norm();
    let theta = if pn <= 1e-14 * (1.0 + obj_norm) {
        theta0
    } else {
        theta0 + projected * ((b * b - r0 * r0).max(0.0).sqrt() / pn)
    };
    Some(theta.iter().copied().collect())
}

/// Restoration steps spent on each out-of-ball slice in the branch search.
const RESTORE_ITERS: usize = 50;

/// Point of the ball nearest to the affine set `{rows theta = rhs}`.
fn closest_ball_point(rows: &[Vec<f64>], rhs: &[f64], b: f64) -> Option<Vec<f64>> {
    let d = rows.first()?.len();
    let m = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    let theta0 = m.pseudo_inverse(1e-12).ok()? * DVector::from_column_slice(rhs);
    let n = theta0.norm();
    (n > 0.0).then(|| theta0.iter().map(|x| x * b.min(n) / n).collect())
}

fn branch(
    problem: &Problem<'_>,
    rows: &mut Vec<Vec<f64>>,
    rhs: &mut Vec<f64>,
    budget: &mut usize,
    best: &mut Best,
) {
    if *budget == 0 {
        return;
    }
    *budget -= 1;
    let Some(theta) = maximize_on_slice(rows, rhs, problem.objective, problem.b) else {
        // The slice may miss the ball while its tolerance band does not.
        if let Some(near) = closest_ball_point(rows, rhs, problem.b) {
            let repaired = restore(problem, &near, RESTORE_ITERS);
            best.offer(problem, near);
            best.offer(problem, repaired);
        }
        return;
    };
    let value = dot(problem.objective, &theta);
    if best.theta.is_some() && value <= best.value {
        return;
    }
    if problem.feasible(&theta) {
        best.offer(problem, theta);
        return;
    }
    if rows.len() >= problem.objective.len() {
        return;
    }
    let worst = problem
        .constraints
        .iter()
        .map(|c| c.eval(&theta).abs())
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let constraint = &problem.constraints[worst.0];
    let targets: Vec<f64> = if constraint.factors().len() == 1 {
        let edge = problem.tol * (1.0 - 1e-9);
        vec![edge, -edge, 0.0]
    } else {
        vec![0.0]
    };
    for factor in constraint.factors() {
        for &t in &targets {
            rows.push(factor[1..].to_vec());
            rhs.push(t - factor[0]);
            branch(problem, rows, rhs, budget, best);
            rows.pop();
            rhs.pop();
        }
    }
}

fn ascend(problem: &Problem<'_>, start: &[f64], iters: usize) -> Vec<f64> {
    let mut theta = start.to_vec();
    project_ball(&mut theta, problem.b);
    let mut mu = 1.0;
    let mut step = problem.b / 20.0;
    for _ in 0..iters {
        let mut grad = problem.objective.to_vec();
        for c in problem.constraints {
            let v = c.eval(&theta);
            let excess = v.abs() - problem.tol;
            if excess > 0.0 {
                let gc = c.gradient(&theta);
                let coef = mu * 2.0 * excess * v.signum();
                grad.iter_mut().zip(&gc).for_each(|(g, x)| *g -= coef * x);
            }
        }
        let gn = norm(&grad);
        if gn == 0.0 {
            break;
        }
        theta.iter_mut().zip(&grad).for_each(|(t, g)| *t += step * g / (1.0 + gn));
        project_ball(&mut theta, problem.b);
        mu *= 1.05;
        step *= 0.98;
    }
    theta
}

/// `objective` with its components along the rows of `active` removed.
fn project_out(objective: &[f64], active: &[Vec<f64>]) -> Vec<f64> {
    if active.is_empty() {
        return objective.to_vec();
    }
    let d = objective.len();
    let g = DMatrix::from_fn(active.len(), d, |i, j| active[i][j]);
    let Ok(pinv) = g.clone().pseudo_inverse(1e-12) else { return objective.to_vec() };
    let obj = DVector::from_column_slice(objective);
    (&obj - &pinv * (&g * &obj)).iter().copied().collect()
}

/// Feasible hill climbing from a feasible point: backtracking steps along the
/// objective, tangent to all nearly active constraints, to each one alone, then raw.
fn polish(problem: &Problem<'_>, start: &[f64], iters: usize) -> Vec<f64> {
    let mut theta = start.to_vec();
    let mut value = dot(problem.objective, &theta);
    for _ in 0..iters {
        let mut active: Vec<Vec<f64>> = problem
            .constraints
            .iter()
            .filter(|c| c.eval(&theta).abs() >= 0.5 * problem.tol)
            .map(|c| c.gradient(&theta))
            .collect();
        if norm(&theta) >= problem.b * (1.0 - 1e-9) {
            active.push(theta.clone());
        }
        let mut dirs = vec![project_out(problem.objective, &active)];
        if active.len() > 1 {
            dirs.extend(active.iter().map(|g| project_out(problem.objective, std::slice::from_ref(g))));
        }
        dirs.push(problem.objective.to_vec());
        let mut moved = false;
        for dir in dirs {
            let dn = norm(&dir);
            if dn <= 1e-14 {
                continue;
            }
            let mut t = problem.b;
            while t >= problem.b * 1e-9 {
                let mut cand: Vec<f64> = theta.iter().zip(&dir).map(|(x, g)| x + t * g / dn).collect();
                project_ball(&mut cand, problem.b);
                let v = dot(problem.objective, &cand);
                if v > value && problem.feasible(&cand) {
                    theta = cand;
                    value = v;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if moved {
                break;
            }
        }
        if !moved {
            break;
        }
    }
    theta
}

/// Squared violation of the halved tolerance, so that descent lands strictly inside.
fn inner_violation(problem: &Problem<'_>, theta: &[f64]) -> f64 {
    let tol = 0.5 * problem.tol;
    problem.constraints.iter().map(|c| (c.eval(theta).abs() - tol).max(0.0).powi(2)).sum()
}

/// Projected descent on [`inner_violation`] with backtracking.
fn restore(problem: &Problem<'_>, start: &[f64], iters: usize) -> Vec<f64> {
    let tol = 0.5 * problem.tol;
    let mut theta = start.to_vec();
    project_ball(&mut theta, problem.b);
    let mut v = inner_violation(problem, &theta);
    for _ in 0..iters {
        if v == 0.0 || problem.feasible(&theta) {
            break;
        }
        let mut grad = vec![0.0; theta.len()];
        for c in problem.constraints {
            let val = c.eval(&theta);
            let excess = val.abs() - tol;
            if excess > 0.0 {
                let gc = c.gradient(&theta);
                grad.iter_mut().zip(&gc).for_each(|(g, x)| *g += excess * val.signum() * x);
            }
        }
        let gn = norm(&grad);
        if gn == 0.0 {
            break;
        }
        let mut t = problem.b;
        let mut moved = false;
        while t >= problem.b * 1e-12 {
            let mut cand: Vec<f64> = theta.iter().zip(&grad).map(|(x, g)| x - t * g / gn).collect();
            project_ball(&mut cand, problem.b);
            let cv = inner_violation(problem, &cand);
            if cv < v {
                theta = cand;
                v = cv;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    theta
}

fn ball_sample(d: usize, b: f64, rng: &mut StreamRng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n = norm(&v).max(1e-300);
    let radius = b * rng.random::<f64>().powf(1.0 / d as f64);
    v.iter_mut().for_each(|x| *x *= radius / n);
    v
}

/// Approximately maximize `<objective, theta>` subject to `||theta|| <= b` and
/// `|c(theta)| <= sol_tol (1 + slack)` for every constraint.
pub fn optimistic_select(
    constraints: &[ConstraintTensor],
    objective: &[f64],
    b: f64,
    sol_tol: f64,
    slack: f64,
    previous: Option<&[f64]>,
    cfg: &SolverConfig,
    rng: &mut StreamRng,
) -> Selection {
    let d = objective.len();
    let problem = Problem { constraints, objective, b, tol: sol_tol * (1.0 + slack) };
    let mut best = Best::default();

    let mut budget = cfg.branch_budget;
    branch(&problem, &mut Vec::new(), &mut Vec::new(), &mut budget, &mut best);

    let mut starts: Vec<Vec<f64>> = Vec::new();
    let obj_norm = norm(objective);
    if obj_norm > 0.0 {
        starts.push(objective.iter().map(|v| b * v / obj_norm).collect());
    }
    if let Some(prev) = previous {
        starts.push(prev.to_vec());
    }
    for _ in 0..cfg.random_starts {
        starts.push(ball_sample(d, b, rng));
    }
    for start in starts {
        best.offer(&problem, start.clone());
        if !constraints.is_empty() && problem.violation(&start) > 0.0 {
            for cand in [ascend(&problem, &start, cfg.ascent_iters), restore(&problem, &start, cfg.ascent_iters)] {
                if problem.feasible(&cand) {
                    best.offer(&problem, polish(&problem, &cand, cfg.ascent_iters));
                }
            }
        }
    }

    if let Some(theta) = best.theta.clone() {
        if !constraints.is_empty() {
            best.offer(&problem, polish(&problem, &theta, cfg.ascent_iters));
        }
    }

    match best.theta {
        Some(theta) => Selection { value: best.value, theta, feasible: true, fallback: false },
        None => {
            let zero = vec![0.0; d];
            let feasible = problem.feasible(&zero);
            Selection { theta: zero, value: 0.0, feasible, fallback: true }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Streams;

    fn rng() -> StreamRng {
        Streams::new(5).stream("solver", 0)
    }

    #[test]
    fn unconstrained_is_ball_maximizer() {
        let s = optimistic_select(&[], &[3.0, 4.0], 2.0, 1e-6, 0.0, None, &SolverConfig::default(), &mut rng());
        assert_eq!(s.theta, vec![1.2, 1.6]);
        assert!((s.value - 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_objective_returns_feasible_point() {
        let c = ConstraintTensor::new(vec![vec![0.0, 1.0, 0.0]]);
        let s = optimistic_select(&[c.clone()], &[0.0, 0.0], 1.0, 1e-3, 0.0, None, &SolverConfig::default(), &mut rng());
        assert!(s.feasible && !s.fallback);
        assert!(c.eval(&s.theta).abs() <= 1e-3);
    }

    #[test]
    fn product_constraint_picks_best_hyperplane() {
        // (theta_1 - 0.5)(theta_2 + 0.2) = 0 within tolerance; objective favours theta_1.
        let c = ConstraintTensor::new(vec![vec![-0.5, 1.0, 0.0], vec![0.2, 0.0, 1.0]]);
        let s = optimistic_select(&[c], &[1.0, 0.0], 1.0, 1e-9, 0.0, None, &SolverConfig::default(), &mut rng());
        assert!(s.feasible);
        assert!((s.theta[1] + 0.2).abs() < 1e-6, "{:?}", s.theta);
        assert!((s.value - (1.0f64 - 0.04).sqrt()).abs() < 1e-6);
    }
}
