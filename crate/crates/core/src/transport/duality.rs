//! Numerical checks relating `W₂` to the `H⁻¹` norm and the variance to
//! the `H⁻¹` norms of the partial derivatives.

use serde::Serialize;

use super::hminus1::hminus1_norm;
use super::measure::DiscreteMeasure;
use super::w2::{equal_weight_atoms, w2_1d, w2_assignment, MAX_ASSIGNMENT_ATOMS};
use crate::bodies::BodySpec;
use crate::error::{Error, Result};
use crate::spectral::{rasterize, spacing_for_cells, GridDomain};

/// Relative slack allowed between the `H⁻¹` norm and the smallest ratio.
pub const DUALITY_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityRow {
    pub epsilon: f64,
    pub w2: f64,
    /// `W₂(μ, μ_ε) / ε`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub norm: f64,
    pub rows: Vec<DualityRow>,
    pub min_ratio: f64,
    /// `"quantile"` on the line, `"assignment"` (resampled to equal atoms) in the plane.
    pub method: String,
    pub tolerance: f64,
    /// `norm <= min_ratio + tolerance`.
    pub holds: bool,
}

/// Compares `‖h‖_{H⁻¹(μ)}` with `W₂(μ, μ_ε)/ε` for `dμ_ε = (1 + εh) dμ`.
pub fn verify_transport_duality(mu: &DiscreteMeasure, h: &[f64], epsilons: &[f64]) -> Result<DualityReport> {
    if h.len() != mu.len() {
        return Err(Error::DimensionMismatch { expected: mu.len(), got: h.len() });
    }
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidArgument("epsilons must be positive".into()));
    }
    let sup = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(e) = epsilons.iter().find(|&&e| e * sup >= 1.0) {
        return Err(Error::InvalidArgument(format!("ε = {e} too large: ε·max|h| = {} >= 1", e * sup)));
    }
    let hm = hminus1_norm(mu, h)?;
    if !hm.finite {
        return Err(Error::InvalidArgument("h must integrate to zero against μ".into()));
    }
    let method = if mu.dim() == 1 { "quantile" } else { "assignment" };
    let rows = epsilons
        .iter()
        .map(|&epsilon| {
            let weights = mu.weights().iter().zip(h).map(|(w, h)| w * (1.0 + epsilon * h)).collect();
            let nu = mu.reweighted(weights)?;
            let w2 = if mu.dim() == 1 {
                w2_1d(mu, &nu)?
            } else {
                let k = mu.len().min(MAX_ASSIGNMENT_ATOMS);
                w2_assignment(&equal_weight_atoms(mu, k)?, &equal_weight_atoms(&nu, k)?)?
            };
            Ok(DualityRow { epsilon, w2, ratio: w2 / epsilon })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let tolerance = DUALITY_TOL * hm.norm + 1e-12;
    Ok(DualityReport {
        norm: hm.norm,
        holds: hm.norm <= min_ratio + tolerance,
        rows,
        min_ratio,
        method: method.to_string(),
        tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceBound {
    pub h: f64,
    /// `∫_K (f - f̄)²`
    pub var: f64,
    /// `Σ_i ‖∂_i f‖²_{H⁻¹(K)}`
    pub bound: f64,
    pub partial_norms: [f64; 2],
    /// `var / bound`
    pub ratio: f64,
    /// `var <= bound + h (var + bound)`.
    pub holds: bool,
}

/// Variance against the sum of squared `H⁻¹` norms of the partial
/// derivatives, all under Lebesgue measure on the raster.
pub fn variance_bound_on_grid(grid: &GridDomain, values: &[f64]) -> Result<VarianceBound> {
    if values.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
    }
    let mean = grid.integrate(values) / grid.area();
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = grid.integrate(&dev);
    let mu = DiscreteMeasure::from_grid(grid);
    let mut partial_norms = [0.0; 2];
    for (axis, slot) in partial_norms.iter_mut().enumerate() {
        *slot = hminus1_norm(&mu, &grid.partial_derivative(values, axis))?.norm;
    }
    let bound = partial_norms.iter().map(|n| n * n).sum::<f64>();
    let h = grid.h();
    Ok(VarianceBound {
        h,
        var,
        bound,
        partial_norms,
        ratio: if bound > 0.0 { var / bound } else { 0.0 },
        holds: var <= bound + h * (var + bound),
    })
}

/// [`variance_bound_on_grid`] for `f` sampled at cell centres of a raster
/// with `cells` cells across the short axis.
pub fn verify_variance_bound<F: Fn(f64, f64) -> f64>(body: &BodySpec, f: F, cells: usize) -> Result<VarianceBound> {
    let grid = rasterize(body, spacing_for_cells(body, cells))?;
    let values = grid.evaluate(f);
    variance_bound_on_grid(&grid, &values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_linear_duality() {
        let mu = DiscreteMeasure::lebesgue_interval(-1.0, 1.0, 4096).unwrap();
        let h: Vec<f64> = mu.points().iter().map(|x| 2.0 * x).collect();
        let r = verify_transport_duality(&mu, &h, &[0.1, 0.05, 0.01]).unwrap();
        assert!(r.holds, "{r:?}");
        let target = (16.0f64 / 15.0).sqrt();
        assert!((r.rows[2].ratio - target).abs() / target < 0.02, "{r:?}");
        assert!(verify_transport_duality(&mu, &h, &[0.6]).is_err());
    }

    #[test]
    fn two_atoms() {
        let mu = DiscreteMeasure::lebesgue_interval(-0.5, 1.5, 2).unwrap();
        let r = verify_transport_duality(&mu, &[1.0, -1.0], &[0.25, 0.01]).unwrap();
        assert!((r.norm - 1.0).abs() < 1e-12);
        assert!((r.rows[0].ratio - 2.0).abs() < 1e-12);
        assert!((r.rows[1].ratio - 10.0).abs() < 1e-9);
        assert!(r.holds);
    }

    #[test]
    fn zero_perturbation() {
        let mu = DiscreteMeasure::lebesgue_interval(-1.0, 1.0, 32).unwrap();
        let r = verify_transport_duality(&mu, &[0.0; 32], &[0.1]).unwrap();
        assert_eq!((r.norm, r.rows[0].w2), (0.0, 0.0));
    }

    #[test]
    fn constant_function_has_zero_variance() {
        let b = verify_variance_bound(&BodySpec::cube(2, 1.0), |_, _| 3.0, 32).unwrap();
        assert_eq!((b.var, b.bound), (0.0, 0.0));
        assert!(b.holds);
    }

    #[test]
    fn square_radial_quadratic() {
        let b = verify_variance_bound(&BodySpec::cube(2, 1.0), |x, y| x * x + y * y, 64).unwrap();
        assert!((b.var - 32.0 / 45.0).abs() < 0.01, "{b:?}");
        assert!((b.bound - 64.0 / 15.0).abs() < 0.1, "{b:?}");
        assert!(b.holds);
    }
}
