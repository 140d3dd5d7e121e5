//! Lowest Neumann eigenpairs by shift-invert Lanczos.
//!
//! The operator `(L + sI)⁻¹` is applied through a banded Cholesky factor.
//! Each Lanczos run works in the orthogonal complement of the constants and
//! of every locked eigenvector, and locks only its dominant Ritz pair, so
//! degenerate eigenvalues are recovered one copy per run.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::Serialize;

use super::banded::BandedCholesky;
use super::grid::GridDomain;
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

pub const MAX_EIGENPAIRS: usize = 10;
const MAX_LANCZOS_STEPS: usize = 300;
const RITZ_TOL: f64 = 1e-13;
const POLISH_STEPS: usize = 2;
const START_SEED: u64 = 0x5eed_1a2c;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPair {
    pub value: f64,
    /// Normalized so that `∫_K φ² = 1`.
    #[serde(skip)]
    pub vector: Vec<f64>,
    /// `‖Lφ - λφ‖_{L²}`.
    pub residual: f64,
}

/// Default shift: half the first Neumann eigenvalue of the bounding square.
pub fn default_shift(grid: &GridDomain) -> f64 {
    let r = grid.body().half_extent(0).max(grid.body().half_extent(1));
    0.5 * std::f64::consts::PI.powi(2) / (4.0 * r * r)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
    n
}

/// Classical Gram-Schmidt against an orthonormal set, applied twice.
fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(x, q);
            axpy(-c, q, x);
        }
    }
}

struct ShiftInvert<'a> {
    chol: &'a BandedCholesky,
}

impl ShiftInvert<'_> {
    fn apply(&self, x: &[f64], locked: &[Vec<f64>]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.chol.solve_in_place(&mut y);
        orthogonalize(&mut y, locked);
        y
    }
}

/// Dominant eigenpair of the shift-inverted operator on the complement of `locked`.
fn lanczos_dominant(op: &ShiftInvert, locked: &[Vec<f64>], start: Vec<f64>) -> Result<Vec<f64>> {
    let n = start.len();
    let steps = MAX_LANCZOS_STEPS.min(n.saturating_sub(locked.len()));
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v = start;
    orthogonalize(&mut v, locked);
    if normalize(&mut v) == 0.0 {
        return Err(Error::NonConvergence("start vector lies in the locked space".into()));
    }
    for j in 0..steps {
        let mut w = op.apply(&v, locked);
        let a = dot(&w, &v);
        basis.push(v);
        alpha.push(a);
        orthogonalize(&mut w, &basis);
        let b = dot(&w, &w).sqrt();
        let m = alpha.len();
        let check = m % 5 == 0 || b < 1e-14 * a.abs() || j + 1 == steps;
        if check {
            let mut t = DMatrix::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alpha[i];
                if i + 1 < m {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let top = (0..m).max_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q])).unwrap_or(0);
            let theta = eig.eigenvalues[top];
            let y = eig.eigenvectors.column(top);
            if b * y[m - 1].abs() <= RITZ_TOL * theta.abs() || b < 1e-14 * a.abs() {
                let mut x = vec![0.0; n];
                for (i, q) in basis.iter().enumerate() {
                    axpy(y[i], q, &mut x);
                }
                return Ok(x);
            }
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        v = w;
    }
    Err(Error::NonConvergence(format!("Lanczos did not converge in {steps} steps")))
}

fn finish_pair(grid: &GridDomain, mut x: Vec<f64>) -> EigenPair {
    let scale = grid.l2_norm(&x);
    x.iter_mut().for_each(|v| *v /= scale);
    let lx = grid.laplacian(&x);
    let value = grid.l2_dot(&x, &lx);
    let r: Vec<f64> = lx.iter().zip(&x).map(|(l, v)| l - value * v).collect();
    EigenPair { value, residual: grid.l2_norm(&r), vector: x }
}

/// The constant pair `λ₀ = 0` followed by the `k` smallest nonzero
/// eigenpairs in increasing order.
pub fn lowest_eigenpairs(grid: &GridDomain, k: usize) -> Result<Vec<EigenPair>> {
    lowest_eigenpairs_shifted(grid, k, default_shift(grid))
}

pub fn lowest_eigenpairs_shifted(grid: &GridDomain, k: usize, shift: f64) -> Result<Vec<EigenPair>> {
    if k > MAX_EIGENPAIRS {
        return Err(Error::InvalidArgument(format!("at most {MAX_EIGENPAIRS} eigenpairs, asked for {k}")));
    }
    let n = grid.len();
    if k + 1 > n {
        return Err(Error::InvalidArgument(format!("grid has only {n} cells")));
    }
    let chol = BandedCholesky::shifted_laplacian(grid, shift)?;
    let op = ShiftInvert { chol: &chol };
    let mut locked = vec![vec![1.0 / (n as f64).sqrt(); n]];
    let mut pairs = vec![finish_pair(grid, locked[0].clone())];
    for run in 0..k {
        let mut rng = rng::substream(START_SEED, Domain::Spectral, run as u64);
        let start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        // Two inverse-iteration steps damp the high-frequency part of the start.
        let start = op.apply(&op.apply(&start, &locked), &locked);
        let mut x = lanczos_dominant(&op, &locked, start)?;
        for _ in 0..POLISH_STEPS {
            x = op.apply(&x, &locked);
            normalize(&mut x);
        }
        orthogonalize(&mut x, &locked);
        normalize(&mut x);
        locked.push(x.clone());
        pairs.push(finish_pair(grid, x));
    }
    pairs[1..].sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(pairs)
}

/// Number of eigenvalues within `rel_tol·λ` of `pairs[index].value`.
pub fn multiplicity(pairs: &[EigenPair], index: usize, rel_tol: f64) -> usize {
    let target = pairs[index].value;
    pairs.iter().filter(|p| (p.value - target).abs() <= rel_tol * target.abs().max(1e-300)).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::BodySpec;
    use crate::spectral::grid::rasterize;
    use std::f64::consts::PI;

    #[test]
    fn square_matches_discrete_formula() {
        // cell-centred Neumann on m cells of width h: (4/h²) sin²(πk/(2m))
        let m = 32usize;
        let h = 2.0 / m as f64;
        let g = rasterize(&BodySpec::cube(2, 1.0), h).unwrap();
        let pairs = lowest_eigenpairs(&g, 4).unwrap();
        let mode = |k: usize| 4.0 / (h * h) * (PI * k as f64 / (2.0 * m as f64)).sin().powi(2);
        let expect = [0.0, mode(1), mode(1), 2.0 * mode(1), mode(2)];
        for (p, e) in pairs.iter().zip(expect) {
            assert!((p.value - e).abs() < 1e-9 * e.max(1.0), "{} vs {e}", p.value);
            assert!(p.residual < 1e-8 * mode(1), "{}", p.residual);
        }
        assert_eq!(multiplicity(&pairs, 1, 1e-6), 2);
        assert!(pairs[0].value.abs() < 1e-12);
    }

    #[test]
    fn eigenvectors_orthonormal() {
        let g = rasterize(&BodySpec::euclidean_ball(2, 1.0), 1.0 / 20.0).unwrap();
        let pairs = lowest_eigenpairs(&g, 3).unwrap();
        for (a, p) in pairs.iter().enumerate() {
            for q in &pairs[a..] {
                let d = g.l2_dot(&p.vector, &q.vector);
                let e = if std::ptr::eq(p, q) { 1.0 } else { 0.0 };
                assert!((d - e).abs() < 1e-10, "{d}");
            }
        }
        assert!(lowest_eigenpairs(&g, 11).is_err());
    }
}
