//! Standard normal density and upper tail `Φ(t) = ∫_t^∞ φ`.

use libm::erfc;

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn phi(t: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * t * t).exp()
}

/// Upper tail probability `P(N > t)`.
pub fn upper_tail(t: f64) -> f64 {
    0.5 * erfc(t / std::f64::consts::SQRT_2)
}

/// Standard normal CDF `P(N <= t)`.
pub fn normal_cdf(t: f64) -> f64 {
    upper_tail(-t)
}

/// Rows of the tail-ratio table `r(t) = Φ(t)(t+1)/φ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TailRatio {
    pub t: f64,
    pub ratio: f64,
    pub within_band: bool,
}

pub const TAIL_RATIO_BAND: (f64, f64) = (0.99, 1.35);

/// The two-sided standard estimate `c φ/(t+1) <= Φ(t) <= C φ/(t+1)`, tabulated.
pub fn gauss_tail_bounds_check(t_grid: &[f64]) -> crate::Result<Vec<TailRatio>> {
    t_grid
        .iter()
        .map(|&t| {
            if !(0.0..=10.0).contains(&t) {
                return Err(crate::Error::InvalidArgument(format!("t = {t} outside [0, 10]")));
            }
            let ratio = upper_tail(t) * (t + 1.0) / phi(t);
            Ok(TailRatio {
                t,
                ratio,
                within_band: ratio >= TAIL_RATIO_BAND.0 && ratio <= TAIL_RATIO_BAND.1,
            })
        })
        .collect()
}
