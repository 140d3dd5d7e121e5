//! Unconditional convex bodies and the counterexample density.
//!
//! A body is a canonical shape (unit cube `[-1,1]^n`, unit Euclidean or
//! `l_p` ball, a box with given half-widths, or the axis cross) followed by
//! a positive diagonal scaling. Every shape here is invariant under
//! coordinate sign flips.

use std::fmt;

use libm::lgamma as ln_gamma;

use crate::error::{Error, Result};

/// Relative slack applied to boundary tests; closed bodies include their boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum BodyKind {
    Cube,
    EuclideanBall,
    /// `p >= 1`; `p = f64::INFINITY` is the cube.
    LpBall { p: f64 },
    ProductOfIntervals { half_widths: Vec<f64> },
    /// Uniform `U e_T` with `U ~ U[-sqrt(3n), sqrt(3n)]`, `T` uniform on the axes.
    /// Not convex; sampler-only.
    CounterexampleCross,
}

impl BodyKind {
    pub fn name(&self) -> &'static str {
        match self {
            BodyKind::Cube => "cube",
            BodyKind::EuclideanBall => "euclidean_ball",
            BodyKind::LpBall { .. } => "lp_ball",
            BodyKind::ProductOfIntervals { .. } => "product_of_intervals",
            BodyKind::CounterexampleCross => "counterexample_cross",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodySpec {
    pub kind: BodyKind,
    pub dim: usize,
    /// Per-axis scaling applied after the canonical shape.
    pub scale: Vec<f64>,
}

/// The segment `{t : x with x_i = t stays in K}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSection {
    pub lo: f64,
    pub hi: f64,
}

impl AxisSection {
    pub fn symmetric(hi: f64) -> Self {
        AxisSection { lo: -hi, hi }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

impl BodySpec {
    pub fn cube(dim: usize, half_width: f64) -> Self {
        BodySpec { kind: BodyKind::Cube, dim, scale: vec![half_width; dim] }
    }

    pub fn euclidean_ball(dim: usize, radius: f64) -> Self {
        BodySpec { kind: BodyKind::EuclideanBall, dim, scale: vec![radius; dim] }
    }

    pub fn lp_ball(dim: usize, p: f64, radius: f64) -> Self {
        BodySpec { kind: BodyKind::LpBall { p }, dim, scale: vec![radius; dim] }
    }

    pub fn product_of_intervals(half_widths: Vec<f64>) -> Self {
        let dim = half_widths.len();
        BodySpec {
            kind: BodyKind::ProductOfIntervals { half_widths },
            dim,
            scale: vec![1.0; dim],
        }
    }

    pub fn counterexample_cross(dim: usize) -> Self {
        BodySpec { kind: BodyKind::CounterexampleCross, dim, scale: vec![1.0; dim] }
    }

    /// Same shape in another dimension, keeping the first scale entry for every axis.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        let kind = match &self.kind {
            BodyKind::ProductOfIntervals { half_widths } => {
                let w = *half_widths.first().ok_or_else(|| {
                    Error::InvalidBody("product_of_intervals without half-widths".into())
                })?;
                BodyKind::ProductOfIntervals { half_widths: vec![w; dim] }
            }
            k => k.clone(),
        };
        let s = self.scale.first().copied().unwrap_or(1.0);
        let body = BodySpec { kind, dim, scale: vec![s; dim] };
        body.validate()?;
        Ok(body)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidBody("dim must be positive".into()));
        }
        if self.scale.len() != self.dim {
            return Err(Error::InvalidBody(format!(
                "scale has {} entries for dim {}",
                self.scale.len(),
                self.dim
            )));
        }
        if self.scale.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidBody("scale entries must be positive and finite".into()));
        }
        match &self.kind {
            BodyKind::LpBall { p } if !(*p >= 1.0) => {
                Err(Error::InvalidBody(format!("lp_ball needs p >= 1, got {p}")))
            }
            BodyKind::ProductOfIntervals { half_widths } => {
                if half_widths.len() != self.dim {
                    return Err(Error::InvalidBody("half_widths length differs from dim".into()));
                }
                if half_widths.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
                    return Err(Error::InvalidBody("half_widths must be positive".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self.kind, BodyKind::CounterexampleCross)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    fn cross_half_length(&self) -> f64 {
        (3.0 * self.dim as f64).sqrt()
    }

    /// Membership, boundary included. For the counterexample this is
    /// support membership (the union of the axis segments).
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        let y = x.iter().zip(&self.scale).map(|(xi, si)| xi / si);
        let one = 1.0 + BOUNDARY_TOL;
        Ok(match &self.kind {
            BodyKind::Cube | BodyKind::LpBall { p: f64::INFINITY } => {
                y.into_iter().all(|v| v.abs() <= one)
            }
            BodyKind::EuclideanBall => y.map(|v| v * v).sum::<f64>() <= one,
            BodyKind::LpBall { p } => y.map(|v| v.abs().powf(*p)).sum::<f64>() <= one,
            BodyKind::ProductOfIntervals { half_widths } => {
                y.zip(half_widths).all(|(v, w)| v.abs() <= w * one)
            }
            BodyKind::CounterexampleCross => {
                let ys: Vec<f64> = y.collect();
                let nonzero = ys.iter().filter(|v| **v != 0.0).count();
                nonzero <= 1 && ys.iter().all(|v| v.abs() <= self.cross_half_length() * one)
            }
        })
    }

    /// Canonical (unscaled) half-length of the section along axis `i`.
    fn canonical_section(&self, y: &[f64], i: usize) -> Result<f64> {
        let others = || y.iter().enumerate().filter(move |(j, _)| *j != i).map(|(_, v)| *v);
        let from_remainder = |rem: f64, p: f64| {
            if rem < -BOUNDARY_TOL {
                Err(Error::EmptySection { axis: i })
            } else {
                Ok(rem.max(0.0).powf(1.0 / p))
            }
        };
        match &self.kind {
            BodyKind::Cube | BodyKind::LpBall { p: f64::INFINITY } => {
                if others().all(|v| v.abs() <= 1.0 + BOUNDARY_TOL) {
                    Ok(1.0)
                } else {
                    Err(Error::EmptySection { axis: i })
                }
            }
            BodyKind::ProductOfIntervals { half_widths } => {
                let ok = y
                    .iter()
                    .zip(half_widths)
                    .enumerate()
                    .all(|(j, (v, w))| j == i || v.abs() <= w * (1.0 + BOUNDARY_TOL));
                if ok {
                    Ok(half_widths[i])
                } else {
                    Err(Error::EmptySection { axis: i })
                }
            }
            BodyKind::EuclideanBall => from_remainder(1.0 - others().map(|v| v * v).sum::<f64>(), 2.0),
            BodyKind::LpBall { p } => {
                from_remainder(1.0 - others().map(|v| v.abs().powf(*p)).sum::<f64>(), *p)
            }
            BodyKind::CounterexampleCross => {
                let half = self.cross_half_length();
                let off: Vec<f64> = others().filter(|v| *v != 0.0).collect();
                match off.as_slice() {
                    [] => Ok(half),
                    [v] if v.abs() <= half * (1.0 + BOUNDARY_TOL) => Ok(0.0),
                    _ => Err(Error::EmptySection { axis: i }),
                }
            }
        }
    }

    /// Endpoints of the chord through `x` parallel to axis `i`.
    pub fn axis_section(&self, x: &[f64], i: usize) -> Result<AxisSection> {
        self.check_dim(x)?;
        if i >= self.dim {
            return Err(Error::InvalidArgument(format!("axis {i} out of range for dim {}", self.dim)));
        }
        let y: Vec<f64> = x.iter().zip(&self.scale).map(|(xi, si)| xi / si).collect();
        let r = self.canonical_section(&y, i)?;
        Ok(AxisSection::symmetric(self.scale[i] * r))
    }

    /// Half-extent of the body along axis `i` (the section through the origin).
    pub fn half_extent(&self, i: usize) -> f64 {
        let origin = vec![0.0; self.dim];
        self.axis_section(&origin, i).map(|s| s.hi).unwrap_or(0.0)
    }

    /// Rescale axis `j` by `1/sqrt(second_moments[j])`.
    pub fn isotropic_scale(&self, second_moments: &[f64]) -> Result<Self> {
        if second_moments.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: second_moments.len() });
        }
        if let Some(m) = second_moments.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidArgument(format!("second moment must be positive, got {m}")));
        }
        let scale = self
            .scale
            .iter()
            .zip(second_moments)
            .map(|(s, m)| if *m == 1.0 { *s } else { s / m.sqrt() })
            .collect();
        Ok(BodySpec { kind: self.kind.clone(), dim: self.dim, scale })
    }

    /// Closed-form `E X_j^2` of the uniform law on the body.
    ///
    /// For the `l_p` ball this uses the generalized-Gaussian representation
    /// `E X_1^2 = Γ(3/p)/Γ(1/p) · Γ(n/p + 1)/Γ((n+2)/p + 1)` on the unit ball.
    pub fn analytic_second_moments(&self) -> Vec<f64> {
        let n = self.dim as f64;
        let canonical: Vec<f64> = match &self.kind {
            BodyKind::Cube | BodyKind::LpBall { p: f64::INFINITY } => vec![1.0 / 3.0; self.dim],
            BodyKind::ProductOfIntervals { half_widths } => {
                half_widths.iter().map(|w| w * w / 3.0).collect()
            }
            BodyKind::EuclideanBall => vec![1.0 / (n + 2.0); self.dim],
            BodyKind::LpBall { p } => {
                let p = *p;
                let ln = ln_gamma(3.0 / p) - ln_gamma(1.0 / p) + ln_gamma(n / p + 1.0)
                    - ln_gamma((n + 2.0) / p + 1.0);
                vec![ln.exp(); self.dim]
            }
            BodyKind::CounterexampleCross => vec![1.0; self.dim],
        };
        canonical.iter().zip(&self.scale).map(|(m, s)| m * s * s).collect()
    }

    /// The isotropic body obtained from the closed-form moments.
    pub fn isotropic(&self) -> Result<Self> {
        self.isotropic_scale(&self.analytic_second_moments())
    }

    /// Structured text block with `kind`, `dim`, `p`, `half_widths`, `scale` keys.
    pub fn to_config_block(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ");
        let mut out = format!("kind = {}\ndim = {}\n", self.kind.name(), self.dim);
        match &self.kind {
            BodyKind::LpBall { p } => out.push_str(&format!("p = {p}\n")),
            BodyKind::ProductOfIntervals { half_widths } => {
                out.push_str(&format!("half_widths = {}\n", join(half_widths)))
            }
            _ => {}
        }
        out.push_str(&format!("scale = {}\n", join(&self.scale)));
        out
    }

    /// Parse a body from `key = value` pairs (one config block).
    pub fn from_config_pairs<'a, I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut kind = None;
        let mut dim = None;
        let mut p = None;
        let mut half_widths = None;
        let mut scale = None;
        for (key, value) in pairs {
            match key {
                "kind" => kind = Some(value.trim().to_string()),
                "dim" => dim = Some(parse_usize(key, value)?),
                "p" => p = Some(parse_f64(key, value)?),
                "half_widths" => half_widths = Some(parse_list(key, value)?),
                "scale" => scale = Some(parse_list(key, value)?),
                other => {
                    return Err(Error::Config { key: other.to_string(), msg: "unknown body key".into() })
                }
            }
        }
        let kind_name = kind.ok_or_else(|| missing("kind"))?;
        let kind = match kind_name.as_str() {
            "cube" => BodyKind::Cube,
            "euclidean_ball" => BodyKind::EuclideanBall,
            "lp_ball" => BodyKind::LpBall { p: p.ok_or_else(|| missing("p"))? },
            "product_of_intervals" => BodyKind::ProductOfIntervals {
                half_widths: half_widths.clone().ok_or_else(|| missing("half_widths"))?,
            },
            "counterexample_cross" => BodyKind::CounterexampleCross,
            other => {
                return Err(Error::Config { key: "kind".into(), msg: format!("unknown kind `{other}`") })
            }
        };
        let dim = match (dim, &kind) {
            (Some(d), _) => d,
            (None, BodyKind::ProductOfIntervals { half_widths }) => half_widths.len(),
            (None, _) => return Err(missing("dim")),
        };
        let scale = match scale {
            None => vec![1.0; dim],
            Some(s) if s.len() == 1 => vec![s[0]; dim],
            Some(s) => s,
        };
        let body = BodySpec { kind, dim, scale };
        body.validate().map_err(|e| Error::Config { key: "kind".into(), msg: e.to_string() })?;
        Ok(body)
    }
}

impl fmt::Display for BodySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            BodyKind::LpBall { p } => write!(f, "lp_ball(p={p})")?,
            k => write!(f, "{}", k.name())?,
        }
        write!(f, "[n={}]", self.dim)
    }
}

fn missing(key: &str) -> Error {
    Error::Config { key: key.to_string(), msg: "missing required key".into() }
}

pub(crate) fn parse_f64(key: &str, value: &str) -> Result<f64> {
    let v = value.trim();
    match v {
        "inf" | "infinity" | "Inf" => Ok(f64::INFINITY),
        _ => v
            .parse::<f64>()
            .map_err(|_| Error::Config { key: key.into(), msg: format!("not a number: `{v}`") }),
    }
}

pub(crate) fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::Config { key: key.into(), msg: format!("not an integer: `{}`", value.trim()) })
}

pub(crate) fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|s| parse_f64(key, s)).collect()
}
