//! Exact and hit-and-run samplers with reproducible per-row streams.

use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::bodies::{BodyKind, BodySpec};
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::rng::{self, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMethod {
    Exact,
    /// `burnin` is counted in sweeps of `dim` coordinate moves, `thinning` in moves.
    HitAndRun { burnin: usize, thinning: usize },
}

/// `rows x dim` draws, row-major, immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Vec<f64>,
    rows: usize,
    dim: usize,
    body: BodySpec,
    seed: u64,
    method: SampleMethod,
}

impl SampleMatrix {
    /// Wrap externally produced rows (e.g. read back from a dump).
    pub fn from_rows(data: Vec<f64>, dim: usize, body: BodySpec, seed: u64, method: SampleMethod) -> Result<Self> {
        if dim == 0 || data.is_empty() || data.len() % dim != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} values cannot form rows of width {dim}",
                data.len()
            )));
        }
        let rows = data.len() / dim;
        Ok(SampleMatrix { data, rows, dim, body, seed, method })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn body(&self) -> &BodySpec {
        &self.body
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn method(&self) -> SampleMethod {
        self.method
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.iter_rows().map(|r| r[j]).collect()
    }
}

fn uniform_pm1<R: Rng>(rng: &mut R) -> f64 {
    2.0 * rng.random::<f64>() - 1.0
}

fn fill_exact_row<R: Rng>(body: &BodySpec, gamma: Option<&Gamma<f64>>, rng: &mut R, row: &mut [f64]) {
    let n = body.dim;
    match &body.kind {
        BodyKind::Cube | BodyKind::LpBall { p: f64::INFINITY } => {
            for (x, s) in row.iter_mut().zip(&body.scale) {
                *x = s * uniform_pm1(rng);
            }
        }
        BodyKind::ProductOfIntervals { half_widths } => {
            for ((x, s), w) in row.iter_mut().zip(&body.scale).zip(half_widths) {
                *x = s * w * uniform_pm1(rng);
            }
        }
        BodyKind::EuclideanBall => {
            let mut norm2 = 0.0;
            for x in row.iter_mut() {
                let g: f64 = StandardNormal.sample(rng);
                *x = g;
                norm2 += g * g;
            }
            let radius = rng.random::<f64>().powf(1.0 / n as f64);
            let f = radius / norm2.sqrt();
            for (x, s) in row.iter_mut().zip(&body.scale) {
                *x *= f * s;
            }
        }
        BodyKind::LpBall { p } => {
            // |g| ~ Gamma(1/p)^(1/p) has density proportional to exp(-|t|^p).
            let gamma = gamma.expect("gamma law for lp ball");
            let mut total = 0.0;
            for x in row.iter_mut() {
                let w: f64 = gamma.sample(rng);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                *x = sign * w.powf(1.0 / p);
                total += w;
            }
            let e: f64 = Exp1.sample(rng);
            let f = (total + e).powf(-1.0 / p);
            for (x, s) in row.iter_mut().zip(&body.scale) {
                *x *= f * s;
            }
        }
        BodyKind::CounterexampleCross => {
            let t = rng.random_range(0..n);
            row.fill(0.0);
            row[t] = body.scale[t] * (3.0 * n as f64).sqrt() * uniform_pm1(rng);
        }
    }
}

fn radial_gamma(body: &BodySpec) -> Result<Option<Gamma<f64>>> {
    match body.kind {
        BodyKind::LpBall { p } if p.is_finite() => Gamma::new(1.0 / p, 1.0)
            .map(Some)
            .map_err(|e| Error::InvalidBody(format!("gamma law: {e}"))),
        _ => Ok(None),
    }
}

fn sample_rows(body: &BodySpec, count: usize, seed: u64, domain: Domain) -> Result<Vec<f64>> {
    body.validate()?;
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let gamma = radial_gamma(body)?;
    let mut data = vec![0.0; count * body.dim];
    data.par_chunks_mut(body.dim).enumerate().for_each(|(i, row)| {
        let mut rng = rng::substream(seed, domain, i as u64);
        fill_exact_row(body, gamma.as_ref(), &mut rng, row);
    });
    Ok(data)
}

/// Independent uniform draws from a convex body.
pub fn sample_exact(body: &BodySpec, count: usize, seed: u64) -> Result<SampleMatrix> {
    if !body.is_convex() {
        return Err(Error::UnsupportedKind { op: "sample_exact", kind: body.kind.name().into() });
    }
    let data = sample_rows(body, count, seed, Domain::Exact)?;
    Ok(SampleMatrix { data, rows: count, dim: body.dim, body: body.clone(), seed, method: SampleMethod::Exact })
}

/// Rows `U e_T`: `T` uniform on the axes, `U ~ U[-sqrt(3n), sqrt(3n)]`.
pub fn sample_counterexample(dim: usize, count: usize, seed: u64) -> Result<SampleMatrix> {
    let body = BodySpec::counterexample_cross(dim);
    let data = sample_rows(&body, count, seed, Domain::Counterexample)?;
    Ok(SampleMatrix { data, rows: count, dim, body, seed, method: SampleMethod::Exact })
}

/// `⟨θ, X_i⟩` for the rows [`sample_exact`] (or [`sample_counterexample`]
/// for the cross) would produce, without holding the matrix.
pub fn sample_projections(body: &BodySpec, theta: &[f64], count: usize, seed: u64) -> Result<Vec<f64>> {
    body.validate()?;
    if theta.len() != body.dim {
        return Err(Error::DimensionMismatch { expected: body.dim, got: theta.len() });
    }
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let domain = if body.is_convex() { Domain::Exact } else { Domain::Counterexample };
    let gamma = radial_gamma(body)?;
    Ok((0..count)
        .into_par_iter()
        .map_init(
            || vec![0.0; body.dim],
            |row, i| {
                let mut rng = rng::substream(seed, domain, i as u64);
                fill_exact_row(body, gamma.as_ref(), &mut rng, row);
                row.iter().zip(theta).map(|(x, t)| x * t).sum()
            },
        )
        .collect())
}

pub const DEFAULT_BURNIN_SWEEPS: usize = 1000;

/// Coordinate hit-and-run started at the origin.
///
/// Each move picks an axis uniformly and resamples that coordinate uniformly
/// on the chord through the current point. Row 0 is recorded after the
/// burn-in, later rows every `thinning` moves.
pub fn sample_hit_and_run(
    body: &BodySpec,
    count: usize,
    burnin: usize,
    thinning: usize,
    seed: u64,
) -> Result<SampleMatrix> {
    body.validate()?;
    if !body.is_convex() {
        return Err(Error::UnsupportedKind { op: "sample_hit_and_run", kind: body.kind.name().into() });
    }
    if count == 0 || thinning == 0 {
        return Err(Error::InvalidArgument("count and thinning must be at least 1".into()));
    }
    let n = body.dim;
    let mut rng = rng::substream(seed, Domain::HitAndRun, 0);
    let mut x = vec![0.0; n];
    let step = |x: &mut Vec<f64>, rng: &mut rand_chacha::ChaCha8Rng| -> Result<()> {
        let i = rng.random_range(0..n);
        let s = body.axis_section(x, i)?;
        x[i] = s.lo + rng.random::<f64>() * s.length();
        Ok(())
    };
    for _ in 0..burnin * n {
        step(&mut x, &mut rng)?;
    }
    let mut data = Vec::with_capacity(count * n);
    for r in 0..count {
        if r > 0 {
            for _ in 0..thinning {
                step(&mut x, &mut rng)?;
            }
        }
        data.extend_from_slice(&x);
    }
    Ok(SampleMatrix {
        data,
        rows: count,
        dim: n,
        body: body.clone(),
        seed,
        method: SampleMethod::HitAndRun { burnin, thinning },
    })
}

/// Monte Carlo `E X_j^2` with its standard error, for bodies lacking a closed form.
pub fn estimate_second_moments(body: &BodySpec, count: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let data = sample_rows(body, count, seed, Domain::Moments)?;
    let n = body.dim;
    let mut means = Vec::with_capacity(n);
    let mut errs = Vec::with_capacity(n);
    for j in 0..n {
        let sq: Vec<f64> = data.chunks_exact(n).map(|r| r[j] * r[j]).collect();
        let m = pairwise_sum(&sq) / count as f64;
        let dev: Vec<f64> = sq.iter().map(|v| (v - m) * (v - m)).collect();
        let var = pairwise_sum(&dev) / (count.max(2) - 1) as f64;
        means.push(m);
        errs.push((var / count as f64).sqrt());
    }
    Ok((means, errs))
}

pub const DUMP_MAGIC: &[u8; 4] = b"THSL";
pub const DUMP_VERSION: u16 = 1;
pub const DUMP_HEADER_LEN: usize = 32;

/// Stream a sample matrix: 32-byte header (magic, version u16, n u32, N u64,
/// seed u64, 6 reserved zero bytes) then little-endian f64 rows.
pub fn write_samples<W: Write>(samples: &SampleMatrix, mut w: W) -> Result<()> {
    let mut header = [0u8; DUMP_HEADER_LEN];
    header[0..4].copy_from_slice(DUMP_MAGIC);
    header[4..6].copy_from_slice(&DUMP_VERSION.to_le_bytes());
    let n = u32::try_from(samples.dim)
        .map_err(|_| Error::InvalidArgument("dimension exceeds u32".into()))?;
    header[6..10].copy_from_slice(&n.to_le_bytes());
    header[10..18].copy_from_slice(&(samples.rows as u64).to_le_bytes());
    header[18..26].copy_from_slice(&samples.seed.to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(samples.dim * 8);
    for row in samples.iter_rows() {
        buf.clear();
        for v in row {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

/// Header fields of a sample dump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DumpHeader {
    pub version: u16,
    pub dim: u32,
    pub rows: u64,
    pub seed: u64,
}

/// Read a dump produced by [`write_samples`]; returns the header and the flat rows.
pub fn read_samples<R: Read>(mut r: R) -> Result<(DumpHeader, Vec<f64>)> {
    let mut header = [0u8; DUMP_HEADER_LEN];
    r.read_exact(&mut header)?;
    if &header[0..4] != DUMP_MAGIC {
        return Err(Error::Io("bad sample dump magic".into()));
    }
    let le_u64 = |b: &[u8]| u64::from_le_bytes(b.try_into().expect("8 bytes"));
    let h = DumpHeader {
        version: u16::from_le_bytes([header[4], header[5]]),
        dim: u32::from_le_bytes(header[6..10].try_into().expect("4 bytes")),
        rows: le_u64(&header[10..18]),
        seed: le_u64(&header[18..26]),
    };
    if h.version != DUMP_VERSION {
        return Err(Error::Io(format!("unsupported dump version {}", h.version)));
    }
    let total = (h.dim as u64)
        .checked_mul(h.rows)
        .and_then(|t| usize::try_from(t).ok())
        .ok_or_else(|| Error::Io("dump too large".into()))?;
    let mut bytes = vec![0u8; total * 8];
    r.read_exact(&mut bytes)?;
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((h, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_sq(samples: &SampleMatrix, j: usize) -> (f64, f64) {
        let sq: Vec<f64> = samples.column(j).iter().map(|v| v * v).collect();
        let n = sq.len() as f64;
        let m = sq.iter().sum::<f64>() / n;
        let var = sq.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (var / n).sqrt())
    }

    #[test]
    fn cube_second_moment() {
        let s = sample_exact(&BodySpec::cube(4, 3f64.sqrt()), 100_000, 11).unwrap();
        for j in 0..4 {
            let (m, se) = mean_sq(&s, j);
            assert!((m - 1.0).abs() < 4.0 * se, "axis {j}: {m} ± {se}");
        }
    }

    #[test]
    fn ball_radial_moment() {
        let n = 6;
        let body = BodySpec::euclidean_ball(n, ((n + 2) as f64).sqrt());
        let s = sample_exact(&body, 100_000, 5).unwrap();
        let r2: Vec<f64> = s.iter_rows().map(|r| r.iter().map(|v| v * v).sum::<f64>() / n as f64).collect();
        let m = r2.iter().sum::<f64>() / r2.len() as f64;
        let var = r2.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (r2.len() - 1) as f64;
        let se = (var / r2.len() as f64).sqrt();
        assert!((m - 1.0).abs() < 4.0 * se);
    }

    #[test]
    fn l1_quadrant_probability() {
        let s = sample_exact(&BodySpec::lp_ball(2, 1.0, 1.0), 100_000, 3).unwrap();
        let hits = s.iter_rows().filter(|r| r[0] > 0.0 && r[1] > 0.0).count() as f64;
        let p = hits / 100_000.0;
        let se = (0.25f64 * 0.75 / 100_000.0).sqrt();
        assert!((p - 0.25).abs() < 4.0 * se, "{p}");
    }

    #[test]
    fn counterexample_rows() {
        let s = sample_counterexample(1, 1000, 2).unwrap();
        assert!(s.data().iter().all(|v| v.abs() <= 3f64.sqrt()));
        let s = sample_counterexample(16, 100_000, 9).unwrap();
        assert!(s.iter_rows().all(|r| r.iter().filter(|v| **v != 0.0).count() <= 1));
        for j in [0, 7, 15] {
            let (m, se) = mean_sq(&s, j);
            assert!((m - 1.0).abs() < 4.0 * se, "axis {j}: {m} ± {se}");
        }
    }

    #[test]
    fn hit_and_run_degenerate_and_errors() {
        let body = BodySpec::cube(3, 1.0);
        let s = sample_hit_and_run(&body, 1, 0, 1, 4).unwrap();
        assert_eq!(s.row(0), &[0.0, 0.0, 0.0]);
        assert!(sample_hit_and_run(&body, 5, 0, 0, 4).is_err());
        assert!(sample_hit_and_run(&BodySpec::counterexample_cross(3), 5, 1, 1, 4).is_err());
        assert!(sample_exact(&BodySpec::counterexample_cross(3), 5, 4).is_err());
    }

    #[test]
    fn hit_and_run_cube_marginal() {
        let body = BodySpec::cube(4, 3f64.sqrt());
        let s = sample_hit_and_run(&body, 50_000, 1000, 4, 8).unwrap();
        let (m, se) = mean_sq(&s, 0);
        assert!((m - 1.0).abs() < 5.0 * se, "{m} ± {se}");
        assert_eq!(s.method(), SampleMethod::HitAndRun { burnin: 1000, thinning: 4 });
    }

    #[test]
    fn projections_match_matrix() {
        let theta = [0.6, 0.0, 0.8];
        for body in [BodySpec::lp_ball(3, 1.0, 1.0), BodySpec::counterexample_cross(3)] {
            let s = if body.is_convex() {
                sample_exact(&body, 500, 21).unwrap()
            } else {
                sample_counterexample(3, 500, 21).unwrap()
            };
            let direct: Vec<f64> = s.iter_rows().map(|r| r.iter().zip(&theta).map(|(x, t)| x * t).sum()).collect();
            assert_eq!(sample_projections(&body, &theta, 500, 21).unwrap(), direct);
        }
        assert!(sample_projections(&BodySpec::cube(2, 1.0), &theta, 5, 1).is_err());
    }

    #[test]
    fn dump_round_trip() {
        let s = sample_exact(&BodySpec::lp_ball(3, 1.5, 1.0), 17, 99).unwrap();
        let mut buf = Vec::new();
        write_samples(&s, &mut buf).unwrap();
        assert_eq!(buf.len(), DUMP_HEADER_LEN + 17 * 3 * 8);
        assert_eq!(&buf[0..4], b"THSL");
        let (h, data) = read_samples(buf.as_slice()).unwrap();
        assert_eq!(h, DumpHeader { version: 1, dim: 3, rows: 17, seed: 99 });
        assert_eq!(data, s.data());
    }
}
