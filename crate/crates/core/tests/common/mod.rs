//! Dense reference implementations used as test oracles.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use spamsep::assignment::Factor;

/// Dense Kronecker product with factor 0 acting on the least significant bit.
pub fn dense_kron(factors: &[Factor]) -> DMatrix<f64> {
    let mut out = DMatrix::from_element(1, 1, 1.0);
    for f in factors {
        let m = DMatrix::from_row_slice(2, 2, &[f[0][0], f[0][1], f[1][0], f[1][1]]);
        out = m.kronecker(&out);
    }
    out
}

/// Column-stochastic factor with flip rates below `max_rate`.
pub fn random_factor(rng: &mut impl Rng, max_rate: f64) -> Factor {
    let d0 = rng.random_range(0.0..max_rate);
    let d1 = rng.random_range(0.0..max_rate);
    [[1.0 - d0, d1], [d0, 1.0 - d1]]
}

pub fn random_dist(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Closest point to `q` among simplex points whose coordinates are
/// multiples of `1/steps`.
pub fn brute_force_simplex(q: &[f64], steps: usize) -> Vec<f64> {
    let dim = q.len();
    let mut best = (f64::INFINITY, vec![0.0; dim]);
    let mut point = vec![0usize; dim];
    fn walk(k: usize, left: usize, point: &mut Vec<usize>, q: &[f64], steps: usize, best: &mut (f64, Vec<f64>)) {
        if k + 1 == point.len() {
            point[k] = left;
            let p: Vec<f64> = point.iter().map(|&c| c as f64 / steps as f64).collect();
            let d = dist2(&p, q);
            if d < best.0 {
                *best = (d, p);
            }
            return;
        }
        for c in 0..=left {
            point[k] = c;
            walk(k + 1, left - c, point, q, steps, best);
        }
    }
    walk(0, steps, &mut point, q, steps, &mut best);
    best.1
}
