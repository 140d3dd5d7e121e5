//! Tails of `Z = σΓ + Σ θ_i Δ_i` with independent Rademacher `Δ_i`.
//!
//! The characteristic function of `Z` is `γ(σξ) Π cos(θ_i ξ)`, which vanishes
//! for `|ξ| >= 1/σ`, so the inversion integral is over a bounded interval.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::gauss::upper_tail;
use super::kernel::SmoothingKernel;
use crate::error::{Error, Result};
use crate::numeric::{gauss_kronrod, pairwise_sum};

/// Absolute tolerance on the inversion integral.
pub const QUAD_TOL: f64 = 1e-11;
pub const MAX_BRUTEFORCE_DIM: usize = 24;
/// Uniform `t` points on `[-8|θ|, 8|θ|]`.
pub const SUP_GRID_POINTS: usize = 4096;
/// Extra uniform points on `[-4|θ|, 4|θ|]`.
pub const SUP_GRID_REFINED: usize = 2048;
/// Atoms `Σ θ_i δ_i` join the grid up to this dimension.
pub const ATOM_MAX_DIM: usize = 12;
const SERIES_CUTOFF: f64 = 1e-4;

fn validate(theta: &[f64], sigma: f64) -> Result<f64> {
    if theta.is_empty() || theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("theta must be nonempty and finite".into()));
    }
    let norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("theta must be nonzero".into()));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    Ok(norm)
}

/// `sin(tξ)/ξ`, continuous at 0.
fn sin_ratio(t: f64, xi: f64) -> f64 {
    if xi.abs() < SERIES_CUTOFF {
        let u = t * xi;
        t * (1.0 - u * u / 6.0 * (1.0 - u * u / 20.0))
    } else {
        (t * xi).sin() / xi
    }
}

/// `P(σΓ + Σ θ_i Δ_i >= t)` by Fourier inversion.
pub fn bernoulli_gamma_tail_fourier(theta: &[f64], sigma: f64, t: f64) -> Result<f64> {
    validate(theta, sigma)?;
    if !t.is_finite() {
        return Ok(if t > 0.0 { 0.0 } else { 1.0 });
    }
    let kernel = SmoothingKernel::shared();
    let integrand = |xi: f64| {
        let mut prod = kernel.char_fn(sigma * xi);
        for th in theta {
            prod *= (th * xi).cos();
        }
        prod * sin_ratio(t, xi)
    };
    let end = 1.0 / sigma;
    let knots = [0.25 * end, 0.5 * end, 0.75 * end];
    let integral = gauss_kronrod(&integrand, 0.0, end, &knots, QUAD_TOL)?;
    Ok((0.5 - integral / PI).clamp(0.0, 1.0))
}

const LOW_BITS: usize = 10;

/// Same probability by averaging over all `2ⁿ` sign patterns.
pub fn bernoulli_gamma_tail_bruteforce(theta: &[f64], sigma: f64, t: f64) -> Result<f64> {
    validate(theta, sigma)?;
    let n = theta.len();
    if n > MAX_BRUTEFORCE_DIM {
        return Err(Error::InvalidArgument(format!("brute force needs n <= {MAX_BRUTEFORCE_DIM}, got {n}")));
    }
    let kernel = SmoothingKernel::shared();
    let low = n.min(LOW_BITS);
    let signed_sum = |bits: usize, range: std::ops::Range<usize>| -> f64 {
        range.map(|i| if bits >> i & 1 == 1 { -theta[i] } else { theta[i] }).sum()
    };
    let low_sums: Vec<f64> = (0..1usize << low).map(|m| signed_sum(m, 0..low)).collect();
    let block_sums: Vec<f64> = (0..1usize << (n - low))
        .into_par_iter()
        .map(|hi| {
            let base = signed_sum(hi << low, low..n);
            let terms: Vec<f64> = low_sums.iter().map(|s| kernel.survival((t - base - s) / sigma)).collect();
            pairwise_sum(&terms)
        })
        .collect();
    Ok(pairwise_sum(&block_sums) / (1u64 << n) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothedSumReport {
    pub n: usize,
    pub theta_norm: f64,
    pub sigma: f64,
    /// `sup_t |P(Z >= t) - Φ(t/|θ|)|` over the evaluation grid.
    pub sup_error: f64,
    pub argmax_t: f64,
    /// `σ²/|θ|² + Σθ_i⁴/|θ|⁴`.
    pub bound_rhs: f64,
    /// `sup_error / bound_rhs`.
    pub measured_constant: f64,
    pub grid_points: usize,
}

fn linspace(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(move |i| lo + step * i as f64)
}

pub fn smoothed_sum_report(theta: &[f64], sigma: f64) -> Result<SmoothedSumReport> {
    let norm = validate(theta, sigma)?;
    let norm2 = norm * norm;
    let heavy: f64 = theta.iter().filter(|t| t.abs() >= sigma).map(|t| t * t).sum();
    if heavy > norm2 / 2.0 {
        return Err(Error::Hypothesis(format!(
            "coordinates with |θ_i| >= σ carry {heavy} > |θ|²/2 = {}",
            norm2 / 2.0
        )));
    }
    let n = theta.len();
    let mut grid: Vec<f64> = linspace(-8.0 * norm, 8.0 * norm, SUP_GRID_POINTS)
        .chain(linspace(-4.0 * norm, 4.0 * norm, SUP_GRID_REFINED))
        .collect();
    if n <= ATOM_MAX_DIM {
        for m in 0..1usize << n {
            grid.push((0..n).map(|i| if m >> i & 1 == 1 { -theta[i] } else { theta[i] }).sum());
        }
    }
    let grid_points = grid.len();
    // |error| is even in t: fold onto t >= 0.
    let mut folded: Vec<f64> = grid.iter().map(|t| t.abs()).collect();
    folded.sort_by(|a, b| a.total_cmp(b));
    folded.dedup();
    let errors: Vec<(f64, f64)> = folded
        .par_iter()
        .map(|&t| Ok((t, (bernoulli_gamma_tail_fourier(theta, sigma, t)? - upper_tail(t / norm)).abs())))
        .collect::<Result<_>>()?;
    let (argmax_t, sup_error) = errors.into_iter().fold((0.0, -1.0), |best, e| if e.1 > best.1 { e } else { best });
    let fourth: f64 = theta.iter().map(|t| t.powi(4)).sum();
    let bound_rhs = sigma * sigma / norm2 + fourth / (norm2 * norm2);
    Ok(SmoothedSumReport {
        n,
        theta_norm: norm,
        sigma,
        sup_error,
        argmax_t,
        bound_rhs,
        measured_constant: sup_error / bound_rhs,
        grid_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_at_zero() {
        let p = bernoulli_gamma_tail_fourier(&[1.0], 2.0, 0.0).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let b = bernoulli_gamma_tail_bruteforce(&[1.0], 1.0, 0.0).unwrap();
        assert!((b - 0.5).abs() < 1e-12);
    }

    #[test]
    fn limits() {
        let th = [0.6, 0.8];
        assert!(bernoulli_gamma_tail_fourier(&th, 0.5, 200.0).unwrap() < 1e-6);
        assert!(bernoulli_gamma_tail_fourier(&th, 0.5, -200.0).unwrap() > 1.0 - 1e-6);
        assert_eq!(bernoulli_gamma_tail_fourier(&th, 0.5, f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn small_sigma_brute_force() {
        let p = bernoulli_gamma_tail_bruteforce(&[1.0, 1.0], 1e-4, 0.5).unwrap();
        assert!((p - 0.25).abs() < 1e-6, "{p}");
    }

    #[test]
    fn fourier_matches_brute_force_uniform16() {
        let th = vec![0.25; 16];
        let f = bernoulli_gamma_tail_fourier(&th, 0.5, 0.5).unwrap();
        let b = bernoulli_gamma_tail_bruteforce(&th, 0.5, 0.5).unwrap();
        assert!((f - b).abs() < 1e-8, "{f} {b}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bernoulli_gamma_tail_fourier(&[0.0, 0.0], 1.0, 0.0).is_err());
        assert!(bernoulli_gamma_tail_fourier(&[1.0], 0.0, 0.0).is_err());
        assert!(bernoulli_gamma_tail_bruteforce(&[0.1; 25], 1.0, 0.0).is_err());
        assert!(matches!(smoothed_sum_report(&[1.0, 0.1], 0.5), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn report_scale_invariant() {
        let th = vec![0.25; 16];
        let a = smoothed_sum_report(&th, 0.5).unwrap();
        let doubled: Vec<f64> = th.iter().map(|t| 2.0 * t).collect();
        let b = smoothed_sum_report(&doubled, 1.0).unwrap();
        assert!((a.sup_error - b.sup_error).abs() < 1e-8);
        assert!((a.bound_rhs - b.bound_rhs).abs() < 1e-15);
    }
}
