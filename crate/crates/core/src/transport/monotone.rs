//! The monotone map pushing `(1 + εΨ') dx` to Lebesgue measure on a section `[p, q]`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;

pub type SectionFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const DENSITY_GRID: usize = 4097;
const ENDPOINT_TOL: f64 = 1e-12;

/// `T(x) = x + ε (Ψ(x) - Ψ(p))` on `[p, q]`.
#[derive(Clone)]
pub struct TransportMap1D {
    p: f64,
    q: f64,
    epsilon: f64,
    psi: SectionFn,
    dpsi: SectionFn,
    psi_p: f64,
    /// `Ψ` on `DENSITY_GRID` equispaced points of `[p, q]`.
    psi_values: Vec<f64>,
}

impl std::fmt::Debug for TransportMap1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransportMap1D").field("p", &self.p).field("q", &self.q).field("epsilon", &self.epsilon).finish()
    }
}

/// Builds the map for section function `psi` with derivative `dpsi`.
pub fn monotone_transport_1d(psi: SectionFn, dpsi: SectionFn, p: f64, q: f64, epsilon: f64) -> Result<TransportMap1D> {
    if !(q > p) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!("need p < q and finite ε, got [{p}, {q}], ε = {epsilon}")));
    }
    let (psi_p, psi_q) = (psi(p), psi(q));
    if (psi_p - psi_q).abs() > ENDPOINT_TOL * (1.0 + psi_p.abs()) {
        return Err(Error::InvalidArgument(format!("Ψ(p) = {psi_p} differs from Ψ(q) = {psi_q}")));
    }
    let step = (q - p) / (DENSITY_GRID - 1) as f64;
    let grid: Vec<f64> = (0..DENSITY_GRID).map(|i| p + step * i as f64).collect();
    if let Some(x) = grid.iter().find(|&&x| !(1.0 + epsilon * dpsi(x) > 0.0)) {
        return Err(Error::InvalidArgument(format!("ε = {epsilon} too large: density 1 + εΨ' is not positive at {x}")));
    }
    let psi_values = grid.iter().map(|&x| psi(x)).collect();
    Ok(TransportMap1D { p, q, epsilon, psi, dpsi, psi_p, psi_values })
}

impl TransportMap1D {
    pub fn domain(&self) -> (f64, f64) {
        (self.p, self.q)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn psi_values(&self) -> &[f64] {
        &self.psi_values
    }

    pub fn apply(&self, x: f64) -> f64 {
        x + self.epsilon * ((self.psi)(x) - self.psi_p)
    }

    pub fn source_density(&self, x: f64) -> f64 {
        1.0 + self.epsilon * (self.dpsi)(x)
    }

    /// Strictly increasing on `points` equispaced samples of `[p, q]`.
    pub fn is_monotone(&self, points: usize) -> bool {
        let step = (self.q - self.p) / (points.max(2) - 1) as f64;
        let values: Vec<f64> = (0..points.max(2)).map(|i| self.apply(self.p + step * i as f64)).collect();
        values.windows(2).all(|w| w[1] > w[0])
    }

    /// Largest `|∫_p^x (1 + εΨ') - (T(x) - p)|` over `points` equispaced `x`;
    /// zero exactly when `T` pushes the source density to Lebesgue measure.
    pub fn pushforward_error(&self, points: usize) -> Result<f64> {
        let step = (self.q - self.p) / (points.max(2) - 1) as f64;
        let density = |x: f64| self.source_density(x);
        let mut worst = 0.0f64;
        for i in 0..points.max(2) {
            let x = self.p + step * i as f64;
            let mass = adaptive_simpson(&density, self.p, x, 1e-13)?;
            worst = worst.max((mass - (self.apply(x) - self.p)).abs());
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> (SectionFn, SectionFn) {
        (Arc::new(|t: f64| t * t), Arc::new(|t: f64| 2.0 * t))
    }

    #[test]
    fn quadratic_section() {
        let (psi, dpsi) = square();
        let t = monotone_transport_1d(psi, dpsi, -1.0, 1.0, 0.1).unwrap();
        assert_eq!(t.apply(-1.0), -1.0);
        assert_eq!(t.apply(1.0), 1.0);
        assert!((t.apply(0.0) + 0.1).abs() < 1e-15);
        assert!(t.is_monotone(1000));
        assert!(t.pushforward_error(1000).unwrap() < 1e-10);
    }

    #[test]
    fn identity_at_zero_epsilon() {
        let (psi, dpsi) = square();
        let t = monotone_transport_1d(psi, dpsi, -1.0, 1.0, 0.0).unwrap();
        assert!((0..=10).all(|i| t.apply(-1.0 + 0.2 * i as f64) == -1.0 + 0.2 * i as f64));
    }

    #[test]
    fn rejects_bad_inputs() {
        let (psi, dpsi) = square();
        assert!(monotone_transport_1d(psi.clone(), dpsi.clone(), -1.0, 1.0, 0.6).is_err());
        assert!(monotone_transport_1d(psi, dpsi, 0.0, 1.0, 0.1).is_err());
    }
}
