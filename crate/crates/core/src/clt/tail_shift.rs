//! Numerical checks of the Gaussian-tail shift inequalities used to remove
//! the smoothing term, and the empirical smoothed-vs-raw comparison.

use serde::Serialize;

use super::gauss::{normal_cdf, phi, upper_tail};
use super::kernel::SmoothingKernel;
use crate::error::{Error, Result};
use crate::estimators::{kolmogorov_distance, marginal_values, KolmogorovDistance, WeightVector};
use crate::sampler::SampleMatrix;

/// Beyond this `Φ(t₀)` underflows relative to the quantities compared.
pub const MAX_T0: f64 = 35.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailShiftRow {
    pub t0: f64,
    /// `δ = Φ(t₀)`
    pub delta: f64,
    /// `Φ(t₀ + 2δ^{1/4}) / δ`
    pub ratio_i: f64,
    /// `1 - Φ(t₀ - 2δ^{1/4})`
    pub value_ii: f64,
    /// `x_max² / δ` for the largest `x` allowed by the hypothesis of (iii).
    pub ratio_iii: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailShiftReport {
    pub rows: Vec<TailShiftRow>,
    /// Smallest `C₁` making (i), (ii), (iii) hold on the grid.
    pub c1: f64,
    /// `c₂` used for (iii); always in `(0, 1)`.
    pub c2: f64,
    /// `1 - Φ(-2)`
    pub floor_ii: f64,
    /// (ii) held at every grid point.
    pub ii_holds: bool,
}

pub fn tail_shift_check(t0_grid: &[f64]) -> Result<TailShiftReport> {
    if t0_grid.is_empty() {
        return Err(Error::InvalidArgument("empty t0 grid".into()));
    }
    if let Some(t) = t0_grid.iter().find(|t| !(**t >= 0.0 && **t <= MAX_T0)) {
        return Err(Error::InvalidArgument(format!("t0 = {t} outside [0, {MAX_T0}]")));
    }
    let c2 = t0_grid
        .iter()
        .map(|&t| 0.5 * upper_tail(t).powf(0.75) / phi(t))
        .fold(0.99f64, f64::min);
    let floor_ii = 1.0 - upper_tail(-2.0);
    let rows: Vec<TailShiftRow> = t0_grid
        .iter()
        .map(|&t0| {
            let delta = upper_tail(t0);
            let shift = 2.0 * delta.powf(0.25);
            // c₂ <= δ^{3/4}/(2φ) keeps the denominator >= 1/(2φ).
            let x_max = 1.0 / (1.0 / phi(t0) - c2 * delta.powf(-0.75));
            TailShiftRow {
                t0,
                delta,
                ratio_i: upper_tail(t0 + shift) / delta,
                value_ii: 1.0 - upper_tail(t0 - shift),
                ratio_iii: x_max * x_max / delta,
            }
        })
        .collect();
    let c1 = rows
        .iter()
        .map(|r| (1.0 / r.ratio_i).max(r.ratio_iii))
        .fold(1.0 / floor_ii, f64::max);
    let ii_holds = rows.iter().all(|r| r.value_ii >= floor_ii);
    Ok(TailShiftReport { rows, c1, c2, floor_ii, ii_holds })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothingComparison {
    /// `10 (Σθ_i⁴)^{1/2}`
    pub epsilon: f64,
    pub smoothed: KolmogorovDistance,
    pub raw: KolmogorovDistance,
    /// `raw / smoothed`
    pub ratio: f64,
}

/// Kolmogorov distances to the standard normal of `⟨θ, X⟩ + εΓ` and `⟨θ, X⟩`.
pub fn smoothing_comparison(
    samples: &SampleMatrix,
    theta: &WeightVector,
    kernel: &SmoothingKernel,
    seed: u64,
) -> Result<SmoothingComparison> {
    let raw_values = marginal_values(samples, theta)?;
    let epsilon = 10.0 * theta.fourth_power_sum().sqrt();
    let gammas = kernel.sample_many(raw_values.len(), seed);
    let smoothed_values: Vec<f64> = raw_values.iter().zip(&gammas).map(|(x, g)| x + epsilon * g).collect();
    let raw = kolmogorov_distance(&raw_values, normal_cdf)?;
    let smoothed = kolmogorov_distance(&smoothed_values, normal_cdf)?;
    Ok(SmoothingComparison { epsilon, ratio: raw.distance / smoothed.distance, smoothed, raw })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::BodySpec;
    use crate::sampler::sample_exact;

    #[test]
    fn t0_zero_values() {
        let r = tail_shift_check(&[0.0]).unwrap();
        let row = r.rows[0];
        assert!((row.delta - 0.5).abs() < 1e-15);
        assert!((row.ratio_i * row.delta - 0.046_304_509_731_637_9).abs() < 1e-13);
        assert!((1.0 / row.ratio_i - 10.798_084_309_666_5).abs() < 1e-9);
        assert!(r.ii_holds);
        assert!(r.c1 >= 43.9);
        assert!(r.c2 > 0.0 && r.c2 < 1.0);
    }

    #[test]
    fn large_t0_ratio_tends_to_one() {
        let grid: Vec<f64> = (0..=60).map(|i| i as f64 * 0.5).collect();
        let r = tail_shift_check(&grid).unwrap();
        let last = r.rows.last().unwrap();
        assert!(last.ratio_i > 0.9 && last.ratio_i <= 1.0);
        assert!(r.rows.iter().all(|row| row.ratio_i * r.c1 >= 1.0 - 1e-12 && row.ratio_iii <= r.c1));
        assert!(tail_shift_check(&[-0.1]).is_err());
    }

    #[test]
    fn basis_direction_on_cube_is_far_from_normal() {
        let body = BodySpec::cube(4, 3f64.sqrt());
        let s = sample_exact(&body, 100_000, 8).unwrap();
        let c = smoothing_comparison(&s, &WeightVector::basis(4, 0), SmoothingKernel::shared(), 8).unwrap();
        assert!((c.epsilon - 10.0).abs() < 1e-12);
        assert!((c.raw.distance - 0.0572).abs() < 3.0 * c.raw.dkw_band, "{c:?}");
    }
}
