//! Banded Cholesky factorization for the shifted Neumann operator.

use super::grid::GridDomain;
use crate::error::{Error, Result};

/// `A = G Gᵀ` with `G` lower triangular of half-bandwidth `band`.
/// Row `i` stores columns `i - band ..= i` at offsets `0 ..= band`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    band: usize,
    rows: Vec<f64>,
}

impl BandedCholesky {
    /// Factors `L + shift·I` for the grid operator `L`; `shift > 0`.
    pub fn shifted_laplacian(grid: &GridDomain, shift: f64) -> Result<Self> {
        let n = grid.len();
        let band = grid.bandwidth();
        let w = band + 1;
        let inv_h2 = 1.0 / (grid.h() * grid.h());
        let mut rows = vec![0.0; n * w];
        for u in 0..n {
            rows[u * w + band] = grid.degree(u) as f64 * inv_h2 + shift;
            for slot in 0..4 {
                if let Some(v) = grid.neighbor(u, slot) {
                    if v < u {
                        rows[u * w + band - (u - v)] = -inv_h2;
                    }
                }
            }
        }
        Self::factor(n, band, rows)
    }

    fn factor(n: usize, band: usize, mut rows: Vec<f64>) -> Result<Self> {
        let w = band + 1;
        for i in 0..n {
            let first = i.saturating_sub(band);
            for j in first..=i {
                let lo = first.max(j.saturating_sub(band));
                let (ri, rj) = (i * w + band - i, j * w + band - j);
                let dot: f64 = (lo..j).map(|k| rows[ri + k] * rows[rj + k]).sum();
                let s = rows[ri + j] - dot;
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NonConvergence(format!("matrix not positive definite at pivot {i}")));
                    }
                    rows[ri + i] = s.sqrt();
                } else {
                    rows[ri + j] = s / rows[rj + j];
                }
            }
        }
        Ok(BandedCholesky { n, band, rows })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Overwrites `x` with `A⁻¹ x`.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (band, w) = (self.band, self.band + 1);
        for i in 0..self.n {
            let first = i.saturating_sub(band);
            let r = i * w + band - i;
            let dot: f64 = (first..i).map(|k| self.rows[r + k] * x[k]).sum();
            x[i] = (x[i] - dot) / self.rows[r + i];
        }
        for i in (0..self.n).rev() {
            let r = i * w + band - i;
            x[i] /= self.rows[r + i];
            let xi = x[i];
            for k in i.saturating_sub(band)..i {
                x[k] -= self.rows[r + k] * xi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::BodySpec;
    use crate::spectral::grid::rasterize;

    #[test]
    fn solve_inverts_operator() {
        let g = rasterize(&BodySpec::euclidean_ball(2, 1.0), 1.0 / 20.0).unwrap();
        let shift = 0.7;
        let chol = BandedCholesky::shifted_laplacian(&g, shift).unwrap();
        let b: Vec<f64> = (0..g.len()).map(|u| ((u * 31) % 17) as f64 - 8.0).collect();
        let mut x = b.clone();
        chol.solve_in_place(&mut x);
        let lx = g.laplacian(&x);
        let err = lx.iter().zip(&x).zip(&b).map(|((l, x), b)| (l + shift * x - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }
}
