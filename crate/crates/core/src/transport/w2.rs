//! Quadratic Wasserstein distances between discrete measures.

use super::measure::DiscreteMeasure;
use crate::error::{Error, Result};

pub const MAX_ASSIGNMENT_ATOMS: usize = 256;
const MASS_TOL: f64 = 1e-12;

fn check_masses(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), got: nu.dim() });
    }
    let (a, b) = (mu.total_mass(), nu.total_mass());
    if (a - b).abs() > MASS_TOL * a.max(1.0) {
        return Err(Error::InvalidArgument(format!("total masses differ: {a} vs {b}")));
    }
    Ok(a)
}

fn sorted_line(m: &DiscreteMeasure) -> (Vec<f64>, Vec<f64>) {
    let mut order: Vec<usize> = (0..m.len()).collect();
    order.sort_by(|&i, &j| m.points()[i].total_cmp(&m.points()[j]));
    let xs = order.iter().map(|&i| m.points()[i]).collect();
    let mut acc = 0.0;
    let cum = order
        .iter()
        .map(|&i| {
            acc += m.weights()[i];
            acc
        })
        .collect();
    (xs, cum)
}

/// `(∫_0^m |Q_μ(s) - Q_ν(s)|² ds)^{1/2}` through the merged quantile functions.
pub fn w2_1d(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    if mu.dim() != 1 || nu.dim() != 1 {
        return Err(Error::InvalidArgument("w2_1d needs measures on the line".into()));
    }
    check_masses(mu, nu)?;
    let (xs, ca) = sorted_line(mu);
    let (ys, cb) = sorted_line(nu);
    let (mut i, mut j, mut prev, mut cost) = (0, 0, 0.0, 0.0);
    while i < xs.len() && j < ys.len() {
        let next = ca[i].min(cb[j]);
        let d = xs[i] - ys[j];
        cost += (next - prev).max(0.0) * d * d;
        prev = next;
        if ca[i] <= next {
            i += 1;
        }
        if cb[j] <= next {
            j += 1;
        }
    }
    Ok(cost.sqrt())
}

/// Minimum-cost perfect matching of a square cost matrix (Hungarian method
/// with potentials); returns the column assigned to each row.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let (mut u, mut v) = (vec![0.0; n + 1], vec![0.0; n + 1]);
    // row_of[j]: row matched to column j (1-based, 0 = none)
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            assignment[row_of[j] - 1] = j - 1;
        }
    }
    assignment
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exact `W₂` between two clouds of `k <= 256` equal-weight atoms.
pub fn w2_assignment(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let mass = check_masses(mu, nu)?;
    let k = mu.len();
    if nu.len() != k {
        return Err(Error::InvalidArgument(format!("atom counts differ: {k} vs {}", nu.len())));
    }
    if k > MAX_ASSIGNMENT_ATOMS {
        return Err(Error::InvalidArgument(format!("at most {MAX_ASSIGNMENT_ATOMS} atoms, got {k}")));
    }
    let atom = mass / k as f64;
    if mu.weights().iter().chain(nu.weights()).any(|w| (w - atom).abs() > MASS_TOL * atom.max(1.0)) {
        return Err(Error::InvalidArgument("assignment needs equal-weight atoms".into()));
    }
    let cost: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| squared_distance(mu.point(i), nu.point(j))).collect()).collect();
    let assignment = hungarian(&cost);
    let total: f64 = assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    Ok((total * atom).sqrt())
}

/// `k` equal-weight atoms by systematic resampling at mass levels `(j + 1/2) m / k`.
pub fn equal_weight_atoms(m: &DiscreteMeasure, k: usize) -> Result<DiscreteMeasure> {
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one atom".into()));
    }
    let mass = m.total_mass();
    let mut points = Vec::with_capacity(k * m.dim());
    let (mut acc, mut i) = (m.weights()[0], 0);
    for j in 0..k {
        let level = (j as f64 + 0.5) * mass / k as f64;
        while acc < level && i + 1 < m.len() {
            i += 1;
            acc += m.weights()[i];
        }
        points.extend_from_slice(m.point(i));
    }
    DiscreteMeasure::new(m.dim(), points, vec![mass / k as f64; k])
}
