//! Discrete `H⁻¹(μ)` norms through the weighted graph Laplacian of a lattice measure.

use serde::Serialize;

use super::measure::DiscreteMeasure;
use crate::error::{Error, Result};

pub const CG_TOL: f64 = 1e-10;
/// `|Σ u w| <= MEAN_ZERO_TOL · Σ |u| w` counts as mean zero.
pub const MEAN_ZERO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HMinus1 {
    /// `+∞` when `u` does not integrate to zero.
    pub norm: f64,
    pub finite: bool,
    pub iterations: usize,
    /// Final relative residual of the Laplacian solve.
    pub residual: f64,
}

struct GraphLaplacian {
    edges: Vec<(usize, usize, f64)>,
    n: usize,
}

impl GraphLaplacian {
    fn new(mu: &DiscreteMeasure) -> Result<Self> {
        let h = mu.lattice().map(|l| l.h).ok_or_else(|| Error::InvalidArgument("measure has no lattice".into()))?;
        let w = mu.weights();
        let edges: Vec<(usize, usize, f64)> = mu
            .lattice_edges()?
            .into_iter()
            .map(|(a, b)| (a, b, 0.5 * (w[a] + w[b]) / (h * h)))
            .filter(|e| e.2 > 0.0)
            .collect();
        let g = GraphLaplacian { edges, n: mu.len() };
        g.check_connected()?;
        Ok(g)
    }

    fn check_connected(&self) -> Result<()> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut components = self.n;
        for &(a, b, _) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                components -= 1;
            }
        }
        if components != 1 {
            return Err(Error::InvalidArgument(format!("support is disconnected ({components} components)")));
        }
        Ok(())
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for &(a, b, c) in &self.edges {
            let f = c * (x[a] - x[b]);
            out[a] += f;
            out[b] -= f;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(x: &mut [f64]) {
    let m = crate::numeric::pairwise_sum(x) / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= m);
}

/// Conjugate gradients for `L φ = b` on the mean-zero subspace.
fn solve(lap: &GraphLaplacian, b: &[f64]) -> Result<(Vec<f64>, usize, f64)> {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok((x, 0, 0.0));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let max_iter = 20 * n + 100;
    for it in 1..=max_iter {
        lap.apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        remove_mean(&mut r);
        let rr_new = dot(&r, &r);
        let rel = rr_new.sqrt() / b_norm;
        if rel <= CG_TOL {
            remove_mean(&mut x);
            return Ok((x, it, rel));
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Err(Error::NonConvergence(format!("conjugate gradients did not reach {CG_TOL} in {max_iter} iterations")))
}

/// `sup {Σ u φ w : Σ_edges c_e (φ_a - φ_b)² <= 1}` computed as `(bᵀ L⁺ b)^{1/2}`, `b = w∘u`.
pub fn hminus1_norm(mu: &DiscreteMeasure, u: &[f64]) -> Result<HMinus1> {
    if u.len() != mu.len() {
        return Err(Error::DimensionMismatch { expected: mu.len(), got: u.len() });
    }
    let lap = GraphLaplacian::new(mu)?;
    let mut b: Vec<f64> = u.iter().zip(mu.weights()).map(|(u, w)| u * w).collect();
    let scale: f64 = b.iter().map(|v| v.abs()).sum();
    let total = crate::numeric::pairwise_sum(&b);
    if total.abs() > MEAN_ZERO_TOL * scale {
        return Ok(HMinus1 { norm: f64::INFINITY, finite: false, iterations: 0, residual: 0.0 });
    }
    remove_mean(&mut b);
    let (phi, iterations, residual) = solve(&lap, &b)?;
    Ok(HMinus1 { norm: dot(&b, &phi).max(0.0).sqrt(), finite: true, iterations, residual })
}
