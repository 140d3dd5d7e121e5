//! Neumann Laplacian spectra of rasterized planar convex bodies.

pub mod banded;
pub mod eigen;
pub mod grid;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::bodies::BodySpec;
use crate::error::{Error, Result};

pub use eigen::{lowest_eigenpairs, multiplicity, EigenPair};
pub use grid::{rasterize, spacing_for_cells, GridDomain, GridSummary};

/// Relative gap below which two eigenvalues count as one.
pub const MULTIPLICITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Richardson {
    /// Values at `h`, `h/2`, `h/4`.
    pub values: [f64; 3],
    pub observed_order: f64,
    /// Order used for the extrapolation.
    pub order: f64,
    pub extrapolated: f64,
}

/// Richardson extrapolation from three spacings halving each time. The
/// observed order is used when it lies in `[0.5, 4]`, otherwise order 1.
pub fn richardson(values: [f64; 3]) -> Richardson {
    let (d1, d2) = (values[0] - values[1], values[1] - values[2]);
    let observed_order = if d1 != 0.0 && d2 != 0.0 && d1.signum() == d2.signum() {
        (d1 / d2).log2()
    } else {
        f64::NAN
    };
    let order = if (0.5..=4.0).contains(&observed_order) { observed_order } else { 1.0 };
    let extrapolated = values[2] - d2 / (2f64.powf(order) - 1.0);
    Richardson { values, observed_order, order, extrapolated }
}

/// First nonzero eigenvalue at spacings `h`, `h/2`, `h/4`, extrapolated.
pub fn extrapolated_lambda1(body: &BodySpec, h: f64) -> Result<Richardson> {
    let mut values = [0.0; 3];
    for (i, v) in values.iter_mut().enumerate() {
        let grid = rasterize(body, h / f64::from(1u32 << i))?;
        *v = lowest_eigenpairs(&grid, 1)?[1].value;
    }
    Ok(richardson(values))
}

/// `∫_K ∇φ` by summing the cell derivatives.
pub fn gradient_bias(grid: &GridDomain, pair: &EigenPair) -> [f64; 2] {
    [0, 1].map(|axis| grid.integrate(&grid.partial_derivative(&pair.vector, axis)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasRank {
    pub bias_vectors: Vec<[f64; 2]>,
    /// Singular values of the `2 × m` bias matrix, descending.
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

/// Rank of `φ ↦ ∫_K ∇φ` on the span of `space`.
pub fn bias_rank(grid: &GridDomain, space: &[EigenPair], rel_tol: f64) -> BiasRank {
    let bias_vectors: Vec<[f64; 2]> = space.iter().map(|p| gradient_bias(grid, p)).collect();
    // Eigenvalues of the 2×2 Gram matrix B Bᵀ are the squared singular values.
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for v in &bias_vectors {
        a += v[0] * v[0];
        b += v[0] * v[1];
        c += v[1] * v[1];
    }
    let mean = 0.5 * (a + c);
    let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let singular_values: Vec<f64> =
        [mean + disc, (mean - disc).max(0.0)].iter().map(|s| s.sqrt()).take(space.len().min(2)).collect();
    let top = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values.iter().filter(|s| top > 0.0 && **s > rel_tol * top).count();
    BiasRank { bias_vectors, singular_values, rank }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AntisymmetricMember {
    /// `"x"`, `"y"` or `"central"`.
    pub reflection: String,
    /// `‖σφ + φ‖ / ‖φ‖`.
    pub defect: f64,
    /// `∫|∇φ|² / ∫φ²` of the member.
    pub rayleigh: f64,
    #[serde(skip)]
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub eigenvalue: f64,
    pub members: Vec<AntisymmetricMember>,
    /// Best single-axis member.
    pub best_axis: Option<String>,
    pub best_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Member of `space` closest to odd under `perm`, via the eigenvectors of
/// the reflection restricted to the space.
fn odd_member(grid: &GridDomain, space: &[EigenPair], perm: &[usize], label: &str) -> AntisymmetricMember {
    let m = space.len();
    let reflect = |v: &[f64]| perm.iter().map(|&p| v[p]).collect::<Vec<f64>>();
    let reflected: Vec<Vec<f64>> = space.iter().map(|p| reflect(&p.vector)).collect();
    let gram = DMatrix::from_fn(m, m, |a, b| {
        0.5 * (grid.l2_dot(&space[a].vector, &reflected[b]) + grid.l2_dot(&space[b].vector, &reflected[a]))
    });
    let eig = SymmetricEigen::new(gram);
    let pick = (0..m).min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).unwrap_or(0);
    let coeffs = eig.eigenvectors.column(pick);
    let mut phi = vec![0.0; grid.len()];
    for (a, p) in space.iter().enumerate() {
        for (x, v) in phi.iter_mut().zip(&p.vector) {
            *x += coeffs[a] * v;
        }
    }
    let norm = grid.l2_norm(&phi);
    phi.iter_mut().for_each(|v| *v /= norm);
    let sum: Vec<f64> = reflect(&phi).iter().zip(&phi).map(|(r, p)| r + p).collect();
    let rayleigh = grid.l2_dot(&phi, &grid.laplacian(&phi));
    AntisymmetricMember { reflection: label.to_string(), defect: grid.l2_norm(&sum), rayleigh, vector: phi }
}

/// Looks for eigenspace members that are odd under a coordinate reflection
/// and under `x ↦ -x`.
pub fn symmetry_detect(grid: &GridDomain, space: &[EigenPair], tolerance: f64) -> Result<SymmetryReport> {
    if space.is_empty() {
        return Err(Error::InvalidArgument("empty eigenspace".into()));
    }
    let mut members = Vec::new();
    for (axes, label) in [(1u8, "x"), (2, "y"), (3, "central")] {
        let perm = grid
            .reflection(axes)
            .ok_or_else(|| Error::InvalidArgument(format!("mask is not invariant under the {label} reflection")))?;
        members.push(odd_member(grid, space, &perm, label));
    }
    let best = members[..2].iter().min_by(|a, b| a.defect.total_cmp(&b.defect)).expect("two axes");
    let best_defect = best.defect;
    let best_axis = (best_defect <= tolerance).then(|| best.reflection.clone());
    Ok(SymmetryReport {
        eigenvalue: space[0].value,
        passed: best_defect <= tolerance && members[2].defect <= tolerance,
        best_axis,
        best_defect,
        tolerance,
        members,
    })
}

/// The `λ₁` eigenspace: pairs after the constant whose values agree with the
/// first within `MULTIPLICITY_TOL`.
pub fn first_eigenspace(pairs: &[EigenPair]) -> Vec<EigenPair> {
    let l1 = pairs[1].value;
    pairs[1..].iter().filter(|p| (p.value - l1).abs() <= MULTIPLICITY_TOL * l1).cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeComparisonRow {
    pub body: String,
    pub lambda1: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeComparison {
    pub r: f64,
    /// Extrapolated first eigenvalue of `[-R, R]²`.
    pub square_lambda1: f64,
    /// `π²/(4R²)`: the interval value from separation of variables.
    pub interval_constant: f64,
    /// `π²/R²`, the constant as sometimes stated; it disagrees with the
    /// observed square value by a factor 4.
    pub stated_constant: f64,
    pub constant_discrepancy: bool,
    pub relative_tolerance: f64,
    pub rows: Vec<CubeComparisonRow>,
}

/// Checks `λ₁(K) >= λ₁([-R, R]²)` for unconditional bodies `K ⊆ [-R, R]²`.
pub fn cube_comparison(bodies: &[BodySpec], r: f64, h: f64, relative_tolerance: f64) -> Result<CubeComparison> {
    let square = BodySpec::cube(2, r);
    let square_lambda1 = extrapolated_lambda1(&square, h)?.extrapolated;
    let mut rows = Vec::new();
    for body in bodies {
        if body.dim != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: body.dim });
        }
        for axis in 0..2 {
            if body.half_extent(axis) > r * (1.0 + 1e-12) {
                return Err(Error::InvalidBody(format!("{body} is not contained in [-{r}, {r}]²")));
            }
        }
        let lambda1 = extrapolated_lambda1(body, h)?.extrapolated;
        rows.push(CubeComparisonRow {
            body: body.to_string(),
            lambda1,
            holds: lambda1 >= square_lambda1 * (1.0 - relative_tolerance),
        });
    }
    let interval_constant = std::f64::consts::PI.powi(2) / (4.0 * r * r);
    let stated_constant = 4.0 * interval_constant;
    Ok(CubeComparison {
        r,
        square_lambda1,
        interval_constant,
        stated_constant,
        constant_discrepancy: (square_lambda1 - stated_constant).abs() > relative_tolerance * stated_constant,
        relative_tolerance,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityWitness {
    pub outer: String,
    pub inner: String,
    pub outer_lambda1: f64,
    pub inner_lambda1: f64,
    /// The inner convex body has the smaller eigenvalue.
    pub found: bool,
}

/// Compares the unit disc with the thin rectangle `[-0.95, 0.95] × [-0.3, 0.3]`
/// it contains. `cells` is the number of cells across the short side.
pub fn disc_monotonicity_witness(cells: usize) -> Result<MonotonicityWitness> {
    let disc = BodySpec::euclidean_ball(2, 1.0);
    let rect = BodySpec::product_of_intervals(vec![0.95, 0.3]);
    let h = spacing_for_cells(&rect, cells);
    let lambda = |b: &BodySpec| -> Result<f64> { Ok(lowest_eigenpairs(&rasterize(b, h)?, 1)?[1].value) };
    let (outer_lambda1, inner_lambda1) = (lambda(&disc)?, lambda(&rect)?);
    Ok(MonotonicityWitness {
        outer: disc.to_string(),
        inner: rect.to_string(),
        outer_lambda1,
        inner_lambda1,
        found: inner_lambda1 < outer_lambda1,
    })
}

/// Heatmap of a grid function as a standalone SVG document.
pub fn heatmap_svg(grid: &GridDomain, values: &[f64], title: &str) -> String {
    let px = (480.0 / grid.nx().max(grid.ny()) as f64).max(1.0);
    let (w, hgt) = (grid.nx() as f64 * px, grid.ny() as f64 * px);
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {w:.0} {:.0}\">\n\
         <text x=\"4\" y=\"16\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
        w,
        hgt + 24.0,
        hgt + 24.0,
        xml_escape(title)
    );
    for (u, v) in values.iter().enumerate() {
        let (i, j) = grid.raster_index(u);
        let t = v / peak;
        let (r, g, b) = if t >= 0.0 {
            (255.0, 255.0 * (1.0 - t), 255.0 * (1.0 - t))
        } else {
            (255.0 * (1.0 + t), 255.0 * (1.0 + t), 255.0)
        };
        let y = 24.0 + (grid.ny() - 1 - j) as f64 * px;
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{y:.2}\" width=\"{px:.2}\" height=\"{px:.2}\" fill=\"rgb({:.0},{:.0},{:.0})\"/>\n",
            i as f64 * px,
            r,
            g,
            b
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

pub(crate) fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
