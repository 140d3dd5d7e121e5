//! Cell rasters of planar bodies and the 5-point Neumann operator on them.

use std::collections::VecDeque;

use serde::Serialize;

use crate::bodies::BodySpec;
use crate::error::{Error, Result};

pub const MIN_CELLS_PER_AXIS: usize = 32;
const NONE: usize = usize::MAX;

/// Neighbour slots: `-x, +x, -y, +y`.
pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;
pub const DOWN: usize = 2;
pub const UP: usize = 3;

/// Square cells of side `h` centred at `((i + 1/2 - nx/2) h, (j + 1/2 - ny/2) h)`;
/// a cell belongs to the domain iff its centre lies in the body.
#[derive(Debug, Clone)]
pub struct GridDomain {
    body: BodySpec,
    h: f64,
    nx: usize,
    ny: usize,
    /// Unknown index per raster cell (row-major), `NONE` outside.
    unknown: Vec<usize>,
    /// Raster cell per unknown.
    cells: Vec<usize>,
    neighbors: Vec<[usize; 4]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSummary {
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub cells: usize,
    pub area: f64,
}

/// Spacing giving `cells` cells across the shorter axis of a 2D body.
pub fn spacing_for_cells(body: &BodySpec, cells: usize) -> f64 {
    let r = body.half_extent(0).min(body.half_extent(1));
    2.0 * r / cells as f64
}

pub fn rasterize(body: &BodySpec, h: f64) -> Result<GridDomain> {
    body.validate()?;
    if body.dim != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: body.dim });
    }
    if !body.is_convex() {
        return Err(Error::UnsupportedKind { op: "rasterize", kind: body.kind.name().to_string() });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("spacing must be positive, got {h}")));
    }
    let half = |r: f64| (r / h - 1e-9).ceil().max(1.0) as usize;
    let (nx, ny) = (2 * half(body.half_extent(0)), 2 * half(body.half_extent(1)));
    if nx.min(ny) < MIN_CELLS_PER_AXIS {
        return Err(Error::InvalidArgument(format!(
            "grid too coarse: {nx}x{ny} cells, need at least {MIN_CELLS_PER_AXIS} per axis"
        )));
    }
    let mut unknown = vec![NONE; nx * ny];
    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let c = [coord(i, nx, h), coord(j, ny, h)];
            if body.contains(&c)? {
                unknown[j * nx + i] = cells.len();
                cells.push(j * nx + i);
            }
        }
    }
    let neighbors = cells
        .iter()
        .map(|&c| {
            let (i, j) = (c % nx, c / nx);
            let at = |ok: bool, cell: usize| if ok { unknown[cell] } else { NONE };
            [
                at(i > 0, c.wrapping_sub(1)),
                at(i + 1 < nx, c + 1),
                at(j > 0, c.wrapping_sub(nx)),
                at(j + 1 < ny, c + nx),
            ]
        })
        .collect();
    let grid = GridDomain { body: body.clone(), h, nx, ny, unknown, cells, neighbors };
    grid.check_connected()?;
    Ok(grid)
}

fn coord(i: usize, n: usize, h: f64) -> f64 {
    (i as f64 + 0.5 - n as f64 / 2.0) * h
}

impl GridDomain {
    fn check_connected(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::InvalidBody("raster has no cells".into()));
        }
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u] {
                if v != NONE && !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        if count != self.len() {
            return Err(Error::InvalidBody(format!("raster is disconnected ({count} of {} cells reachable)", self.len())));
        }
        Ok(())
    }

    pub fn body(&self) -> &BodySpec {
        &self.body
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Number of cells in the domain.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    pub fn area(&self) -> f64 {
        self.len() as f64 * self.cell_area()
    }

    pub fn summary(&self) -> GridSummary {
        GridSummary { h: self.h, nx: self.nx, ny: self.ny, cells: self.len(), area: self.area() }
    }

    /// Raster indices `(i, j)` of unknown `u`.
    pub fn raster_index(&self, u: usize) -> (usize, usize) {
        let c = self.cells[u];
        (c % self.nx, c / self.nx)
    }

    pub fn centre(&self, u: usize) -> [f64; 2] {
        let (i, j) = self.raster_index(u);
        [coord(i, self.nx, self.h), coord(j, self.ny, self.h)]
    }

    pub fn centres(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|u| self.centre(u)).collect()
    }

    /// Unknown at raster cell `(i, j)`, if inside.
    pub fn unknown_at(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.nx || j >= self.ny {
            return None;
        }
        let u = self.unknown[j * self.nx + i];
        (u != NONE).then_some(u)
    }

    pub fn neighbor(&self, u: usize, slot: usize) -> Option<usize> {
        let v = self.neighbors[u][slot];
        (v != NONE).then_some(v)
    }

    /// Largest `|u - v|` over neighbouring unknowns.
    pub fn bandwidth(&self) -> usize {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(|&&v| v != NONE).map(move |&v| u.abs_diff(v)))
            .max()
            .unwrap_or(0)
    }

    pub fn evaluate<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|u| {
            let [x, y] = self.centre(u);
            f(x, y)
        }).collect()
    }

    /// `(Lx)_u = Σ_{v ~ u} (x_u - x_v) / h²`: the Neumann Laplacian `-Δ`.
    pub fn apply_laplacian(&self, x: &[f64], out: &mut [f64]) {
        let inv_h2 = 1.0 / (self.h * self.h);
        for (u, nb) in self.neighbors.iter().enumerate() {
            let mut acc = 0.0;
            for &v in nb {
                if v != NONE {
                    acc += x[u] - x[v];
                }
            }
            out[u] = acc * inv_h2;
        }
    }

    pub fn laplacian(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.apply_laplacian(x, &mut out);
        out
    }

    /// Number of neighbours of `u` inside the domain.
    pub fn degree(&self, u: usize) -> usize {
        self.neighbors[u].iter().filter(|&&v| v != NONE).count()
    }

    /// Partial derivative along `axis`: central differences, one-sided where a
    /// neighbour is missing, zero for cells with neither.
    pub fn partial_derivative(&self, values: &[f64], axis: usize) -> Vec<f64> {
        let (lo, hi) = if axis == 0 { (LEFT, RIGHT) } else { (DOWN, UP) };
        (0..self.len())
            .map(|u| match (self.neighbor(u, lo), self.neighbor(u, hi)) {
                (Some(a), Some(b)) => (values[b] - values[a]) / (2.0 * self.h),
                (None, Some(b)) => (values[b] - values[u]) / self.h,
                (Some(a), None) => (values[u] - values[a]) / self.h,
                (None, None) => 0.0,
            })
            .collect()
    }

    /// Cell-sum approximation of `∫_K f`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        crate::numeric::pairwise_sum(values) * self.cell_area()
    }

    /// `(∫_K f²)^{1/2}`.
    pub fn l2_norm(&self, values: &[f64]) -> f64 {
        let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
        self.integrate(&sq).sqrt()
    }

    pub fn l2_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
        self.integrate(&prod)
    }

    /// Permutation of unknowns induced by the reflection of coordinate
    /// `axes` (bit 0: x, bit 1: y); `None` if the mask is not invariant.
    pub fn reflection(&self, axes: u8) -> Option<Vec<usize>> {
        (0..self.len())
            .map(|u| {
                let (i, j) = self.raster_index(u);
                let i2 = if axes & 1 != 0 { self.nx - 1 - i } else { i };
                let j2 = if axes & 2 != 0 { self.ny - 1 - j } else { j };
                self.unknown_at(i2, j2)
            })
            .collect::<Option<Vec<usize>>>()
            .filter(|perm| perm.len() == self.len())
    }

    /// Mask invariant under both coordinate reflections.
    pub fn is_flip_symmetric(&self) -> bool {
        self.reflection(1).is_some() && self.reflection(2).is_some()
    }
}
