//! Small dense-vector helpers and tensor-product flattening.
//!
//! Flattening is row-major: in `kron(a, b)` the index of `b` varies fastest.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Flattened tensor (Kronecker) product of two vectors.
pub fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        out.extend(b.iter().map(|y| x * y));
    }
    out
}

/// Flattened tensor product of all factors; the empty product is `[1]`.
pub fn kron_all<V: AsRef<[f64]>>(factors: &[V]) -> Vec<f64> {
    factors.iter().fold(vec![1.0], |acc, f| kron(&acc, f.as_ref()))
}

/// Flattened `k`-fold tensor power of `v`.
pub fn tensor_power(v: &[f64], k: usize) -> Vec<f64> {
    (0..k).fold(vec![1.0], |acc, _| kron(&acc, v))
}

/// `[1, theta]`
pub fn augment(theta: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(theta.len() + 1);
    out.push(1.0);
    out.extend_from_slice(theta);
    out
}

/// Project onto the closed ball of radius `radius` around the origin.
pub fn project_ball(x: &mut [f64], radius: f64) {
    let n = norm(x);
    if n > radius && n > 0.0 {
        scale(radius / n, x);
    }
}

/// Index of the smallest value; ties go to the smallest index.
pub fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Index of the largest value; ties go to the smallest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_is_row_major() {
        assert_eq!(kron(&[1.0, 2.0], &[3.0, 4.0, 5.0]), vec![3.0, 4.0, 5.0, 6.0, 8.0, 10.0]);
        assert_eq!(tensor_power(&[2.0], 3), vec![8.0]);
        assert_eq!(kron_all::<Vec<f64>>(&[]), vec![1.0]);
    }

    #[test]
    fn ties_prefer_smallest_index() {
        assert_eq!(argmin(&[1.0, 0.5, 0.5]), 1);
        assert_eq!(argmax(&[2.0, 2.0, 1.0]), 0);
    }

    #[test]
    fn ball_projection() {
        let mut x = vec![3.0, 4.0];
        project_ball(&mut x, 1.0);
        assert!((norm(&x) - 1.0).abs() < 1e-15);
        let mut y = vec![0.1, 0.0];
        project_ball(&mut y, 1.0);
        assert_eq!(y, vec![0.1, 0.0]);
    }
}
