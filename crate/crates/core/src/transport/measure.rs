//! Finite measures on the line or the plane, optionally carried by a lattice.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::spectral::GridDomain;

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub h: f64,
    /// Integer lattice coordinates of each atom.
    pub indices: Vec<[i64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    /// Flattened points, `dim` coordinates each.
    points: Vec<f64>,
    weights: Vec<f64>,
    lattice: Option<Lattice>,
}

impl DiscreteMeasure {
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidArgument(format!("measures live in dimension 1 or 2, got {dim}")));
        }
        if points.len() != dim * weights.len() {
            return Err(Error::DimensionMismatch { expected: dim * weights.len(), got: points.len() });
        }
        if weights.is_empty() {
            return Err(Error::InvalidArgument("measure has no atoms".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative, points finite".into()));
        }
        if !(weights.iter().sum::<f64>() > 0.0) {
            return Err(Error::InvalidArgument("total mass must be positive".into()));
        }
        Ok(DiscreteMeasure { dim, points, weights, lattice: None })
    }

    pub fn line(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Self::new(1, points, weights)
    }

    /// `nodes` cell-centred atoms of mass `h` on `[lo, hi]`: Lebesgue measure.
    pub fn lebesgue_interval(lo: f64, hi: f64, nodes: usize) -> Result<Self> {
        if !(hi > lo) || nodes < 2 {
            return Err(Error::InvalidArgument("need hi > lo and at least 2 nodes".into()));
        }
        let h = (hi - lo) / nodes as f64;
        let points = (0..nodes).map(|i| lo + (i as f64 + 0.5) * h).collect();
        let mut m = Self::line(points, vec![h; nodes])?;
        m.lattice = Some(Lattice { h, indices: (0..nodes as i64).map(|i| [i, 0]).collect() });
        Ok(m)
    }

    /// Lebesgue measure on a planar raster: one atom of mass `h²` per cell.
    pub fn from_grid(grid: &GridDomain) -> Self {
        let n = grid.len();
        let points = grid.centres().into_iter().flatten().collect();
        let indices = (0..n)
            .map(|u| {
                let (i, j) = grid.raster_index(u);
                [i as i64, j as i64]
            })
            .collect();
        DiscreteMeasure {
            dim: 2,
            points,
            weights: vec![grid.cell_area(); n],
            lattice: Some(Lattice { h: grid.h(), indices }),
        }
    }

    /// Same atoms and lattice, new weights.
    pub fn reweighted(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.weights.len() {
            return Err(Error::DimensionMismatch { expected: self.weights.len(), got: weights.len() });
        }
        let mut m = Self::new(self.dim, self.points.clone(), weights)?;
        m.lattice = self.lattice.clone();
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    pub fn total_mass(&self) -> f64 {
        crate::numeric::pairwise_sum(&self.weights)
    }

    /// Neighbour lists of the lattice (atoms one step apart along an axis).
    pub(crate) fn lattice_edges(&self) -> Result<Vec<(usize, usize)>> {
        let lattice = self
            .lattice
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("measure has no lattice structure".into()))?;
        let lookup: HashMap<[i64; 2], usize> = lattice.indices.iter().enumerate().map(|(a, &ix)| (ix, a)).collect();
        let mut edges = Vec::new();
        for (a, &[i, j]) in lattice.indices.iter().enumerate() {
            for step in [[i + 1, j], [i, j + 1]] {
                if let Some(&b) = lookup.get(&step) {
                    edges.push((a, b));
                }
            }
        }
        Ok(edges)
    }

    /// CSV rows `x[,y],weight` with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", if self.dim == 1 { "x,weight" } else { "x,y,weight" })?;
        for (i, weight) in self.weights.iter().enumerate() {
            let coords: Vec<String> = self.point(i).iter().map(|c| format!("{c:?}")).collect();
            writeln!(w, "{},{weight:?}", coords.join(","))?;
        }
        Ok(())
    }

    /// Reads `x,weight` or `x,y,weight` rows; a non-numeric first line is a header.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut dim = None;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
            let values = match parsed {
                Ok(v) => v,
                Err(_) if lineno == 0 => continue,
                Err(e) => return Err(Error::InvalidArgument(format!("line {}: {e}", lineno + 1))),
            };
            let d = values.len().checked_sub(1).filter(|d| *d == 1 || *d == 2).ok_or_else(|| {
                Error::InvalidArgument(format!("line {}: expected 2 or 3 fields", lineno + 1))
            })?;
            if *dim.get_or_insert(d) != d {
                return Err(Error::InvalidArgument(format!("line {}: inconsistent field count", lineno + 1)));
            }
            points.extend_from_slice(&values[..d]);
            weights.push(values[d]);
        }
        Self::new(dim.unwrap_or(1), points, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let m = DiscreteMeasure::new(2, vec![0.0, 1.5, -2.0, 0.25], vec![0.1, 0.9]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = DiscreteMeasure::read_csv(&buf[..]).unwrap();
        assert_eq!(back, m);
        assert!(DiscreteMeasure::read_csv("1,2\n1,2,3\n".as_bytes()).is_err());
    }

    #[test]
    fn validation() {
        assert!(DiscreteMeasure::line(vec![0.0], vec![-1.0]).is_err());
        assert!(DiscreteMeasure::line(vec![0.0], vec![0.0]).is_err());
        assert!(DiscreteMeasure::new(3, vec![0.0; 3], vec![1.0]).is_err());
        let leb = DiscreteMeasure::lebesgue_interval(-1.0, 1.0, 8).unwrap();
        assert!((leb.total_mass() - 2.0).abs() < 1e-15);
        assert_eq!(leb.lattice_edges().unwrap().len(), 7);
    }
}
