//! The band-limited smoothing variable `Γ`.
//!
//! `Γ` has density `κ₁ sin⁸(κ₂ x)/x⁸` with `κ₂ = 1/8`. Its characteristic
//! function `γ` is, up to normalization `γ(0) = 1`, the density of the sum
//! of eight independent `U[-1/8, 1/8]` variables: a degree-7 B-spline with
//! knots at multiples of 1/4 and support `[-1, 1]`. The spline is stored in
//! closed form, so Fourier integrals against `γ` truncate exactly at `|ξ| = 1`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, pairwise_sum};
use crate::rng::{self, Domain};

const DEGREE: usize = 7;
/// Number of spline pieces on `[0, 1]`.
const HALF_PIECES: usize = 4;
const CDF_STEP: f64 = 0.5;
const CDF_RANGE: f64 = 512.0;
/// Mean of `sin⁸` over a period.
const SIN8_MEAN: f64 = 35.0 / 128.0;
const LOCAL_NODES: usize = 12;
const PANEL_NODES: usize = 20;

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Irwin-Hall(8) density on piece `[j, j+1]` as a polynomial in `u = x - j`.
fn irwin_hall_piece(j: usize) -> [f64; DEGREE + 1] {
    let mut c = [0.0; DEGREE + 1];
    let fact7 = 5040.0;
    for k in 0..=j {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let shift = (j - k) as f64;
        for (m, cm) in c.iter_mut().enumerate() {
            *cm += sign * binomial(8, k as u64) * binomial(7, m as u64) * shift.powi((DEGREE - m) as i32);
        }
    }
    c.iter_mut().for_each(|v| *v /= fact7);
    c
}

fn horner_derivative(c: &[f64; DEGREE + 1], u: f64, order: usize) -> f64 {
    if order > DEGREE {
        return 0.0;
    }
    let mut acc = 0.0;
    for m in (order..=DEGREE).rev() {
        let falling = ((m - order + 1)..=m).fold(1.0, |a, k| a * k as f64);
        acc = acc * u + c[m] * falling;
    }
    acc
}

#[derive(Debug, Clone)]
pub struct SmoothingKernel {
    /// Pieces for `|ξ| ∈ [k/4, (k+1)/4]`, already divided by the value at 0.
    pieces: [[f64; DEGREE + 1]; HALF_PIECES],
    kappa1: f64,
    kappa2: f64,
    density_at_zero: f64,
    /// `∫_0^{k·CDF_STEP} f`.
    cdf_table: Vec<f64>,
    local_rule: (Vec<f64>, Vec<f64>),
    moments: [f64; 3],
}

static SHARED: OnceLock<SmoothingKernel> = OnceLock::new();

/// Construct the kernel (spline pieces, constants, CDF table, moments).
pub fn build_kernel() -> SmoothingKernel {
    let b4 = horner_derivative(&irwin_hall_piece(4), 0.0, 0);
    let mut pieces = [[0.0; DEGREE + 1]; HALF_PIECES];
    for (k, piece) in pieces.iter_mut().enumerate() {
        *piece = irwin_hall_piece(4 + k);
        piece.iter_mut().for_each(|v| *v /= b4);
    }
    // p_S(0) = 4 f_IH(4) is the density at 0 of the sum of eight U[-1/8, 1/8].
    let sum_density_at_zero = 4.0 * b4;
    let kappa2: f64 = 1.0 / 8.0;
    let density_at_zero = 1.0 / (2.0 * PI * sum_density_at_zero);
    let kappa1 = density_at_zero / kappa2.powi(8);
    let mut kernel = SmoothingKernel {
        pieces,
        kappa1,
        kappa2,
        density_at_zero,
        cdf_table: Vec::new(),
        local_rule: gauss_legendre(LOCAL_NODES),
        moments: [0.0; 3],
    };
    kernel.cdf_table = kernel.build_cdf_table();
    kernel.moments = [
        -kernel.char_fn_derivative(0.0, 2),
        kernel.char_fn_derivative(0.0, 4),
        -kernel.char_fn_derivative(0.0, 6),
    ];
    kernel
}

impl SmoothingKernel {
    /// Process-wide instance; construction is deterministic.
    pub fn shared() -> &'static SmoothingKernel {
        SHARED.get_or_init(build_kernel)
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa2
    }

    /// `γ(ξ) = E exp(-iξΓ)`; exactly zero for `|ξ| >= 1`.
    pub fn char_fn(&self, xi: f64) -> f64 {
        self.char_fn_derivative(xi, 0)
    }

    /// `d^order γ / dξ^order` (one-sided at the knots, from the right of `|ξ|`).
    pub fn char_fn_derivative(&self, xi: f64, order: usize) -> f64 {
        let a = xi.abs();
        if a >= 1.0 {
            return 0.0;
        }
        let s = 4.0 * a;
        let k = (s.floor() as usize).min(HALF_PIECES - 1);
        let u = s - k as f64;
        let v = horner_derivative(&self.pieces[k], u, order) * 4f64.powi(order as i32);
        if xi < 0.0 && order % 2 == 1 {
            -v
        } else {
            v
        }
    }

    /// Density `κ₁ sin⁸(κ₂ x)/x⁸`.
    pub fn density(&self, x: f64) -> f64 {
        let u = self.kappa2 * x;
        let sinc = if u.abs() < 1e-4 { 1.0 - u * u / 6.0 } else { u.sin() / u };
        let s2 = sinc * sinc;
        let s4 = s2 * s2;
        self.density_at_zero * s4 * s4
    }

    fn integrate_span(&self, a: f64, b: f64) -> f64 {
        let (nodes, weights) = &self.local_rule;
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            acc += w * self.density(c + h * x);
        }
        acc * h
    }

    fn build_cdf_table(&self) -> Vec<f64> {
        let (nodes, weights) = gauss_legendre(PANEL_NODES);
        let steps = (CDF_RANGE / CDF_STEP) as usize;
        let mut table = Vec::with_capacity(steps + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for k in 0..steps {
            let a = k as f64 * CDF_STEP;
            let c = a + 0.5 * CDF_STEP;
            let h = 0.5 * CDF_STEP;
            let panel: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * self.density(c + h * x)).sum();
            acc += panel * h;
            table.push(acc);
        }
        table
    }

    /// Asymptotic `∫_a^∞ f` using the period mean of `sin⁸`.
    fn far_tail(&self, a: f64) -> f64 {
        self.kappa1 * SIN8_MEAN / (7.0 * a.powi(7))
    }

    /// `∫_0^a f` for `a >= 0`.
    fn half_integral(&self, a: f64) -> f64 {
        if a >= CDF_RANGE {
            let last = *self.cdf_table.last().expect("table");
            return last + self.far_tail(CDF_RANGE) - self.far_tail(a);
        }
        let k = (a / CDF_STEP).floor() as usize;
        let lo = k as f64 * CDF_STEP;
        self.cdf_table[k] + if a > lo { self.integrate_span(lo, a) } else { 0.0 }
    }

    /// `P(Γ <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let i = self.half_integral(x.abs());
        if x >= 0.0 {
            0.5 + i
        } else {
            0.5 - i
        }
    }

    /// `P(Γ > x)`, accurate in the upper tail.
    pub fn survival(&self, x: f64) -> f64 {
        let i = self.half_integral(x.abs());
        if x >= 0.0 {
            0.5 - i
        } else {
            0.5 + i
        }
    }

    /// Total mass of the density.
    pub fn total_mass(&self) -> f64 {
        2.0 * (self.cdf_table.last().expect("table") + self.far_tail(CDF_RANGE))
    }

    /// `(EΓ², EΓ⁴, EΓ⁶)` from the spline derivatives at the origin.
    pub fn moments(&self) -> [f64; 3] {
        self.moments
    }

    /// `(EΓ², EΓ⁴, EΓ⁶)` by direct quadrature of `x^{2m} f(x)`.
    ///
    /// Integrates over whole periods of `sin⁸(x/8)` up to `8π·periods`
    /// and closes the tail with the period mean.
    pub fn moments_by_quadrature(&self, periods: usize) -> [f64; 3] {
        let (nodes, weights) = gauss_legendre(PANEL_NODES);
        let period = 8.0 * PI;
        let panels_per_period = 16;
        let width = period / panels_per_period as f64;
        let total = periods * panels_per_period;
        let upper = periods as f64 * period;
        let mut out = [0.0; 3];
        for (m, slot) in out.iter_mut().enumerate() {
            let power = 2 * (m as i32 + 1);
            let panels: Vec<f64> = (0..total)
                .into_par_iter()
                .map(|k| {
                    let c = (k as f64 + 0.5) * width;
                    let h = 0.5 * width;
                    nodes
                        .iter()
                        .zip(&weights)
                        .map(|(x, w)| {
                            let t = c + h * x;
                            w * t.powi(power) * self.density(t)
                        })
                        .sum::<f64>()
                        * h
                })
                .collect();
            let tail = self.kappa1 * SIN8_MEAN * upper.powi(power - 7) / (7 - power) as f64;
            *slot = 2.0 * (pairwise_sum(&panels) + tail);
        }
        out
    }

    /// Whether `1 - c ξ² <= γ(ξ) <= 1` holds at every grid point.
    pub fn quadratic_lower_bound_holds(&self, c: f64, grid: &[f64]) -> bool {
        grid.iter().all(|&xi| {
            let g = self.char_fn(xi);
            g <= 1.0 && g >= 1.0 - c * xi * xi
        })
    }

    /// Inverse CDF; `q` in (0, 1).
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidArgument(format!("quantile level {q} outside (0, 1)")));
        }
        let target = (q - 0.5).abs();
        let a = self.solve_half_integral(target);
        Ok(if q >= 0.5 { a } else { -a })
    }

    fn solve_half_integral(&self, target: f64) -> f64 {
        let last = *self.cdf_table.last().expect("table");
        if target >= last {
            let remaining = last + self.far_tail(CDF_RANGE) - target;
            if remaining <= 0.0 {
                return f64::MAX;
            }
            return (self.kappa1 * SIN8_MEAN / (7.0 * remaining)).powf(1.0 / 7.0).max(CDF_RANGE);
        }
        let k = self.cdf_table.partition_point(|&v| v <= target).saturating_sub(1);
        let (mut lo, mut hi) = (k as f64 * CDF_STEP, (k + 1) as f64 * CDF_STEP);
        let mut x = 0.5 * (lo + hi);
        for _ in 0..100 {
            let g = self.half_integral(x) - target;
            if g.abs() <= 1e-16 {
                break;
            }
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = self.density(x);
            let newton = x - g / d;
            x = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= 1e-13 * hi.max(1.0) {
                break;
            }
        }
        x
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                return self.quantile(u).expect("u in (0,1)");
            }
        }
    }

    /// `count` reproducible draws; draw `i` uses its own counter stream.
    pub fn sample_many(&self, count: usize, seed: u64) -> Vec<f64> {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng::substream(seed, Domain::Kernel, i as u64);
                self.sample(&mut rng)
            })
            .collect()
    }
}
