//! Monte Carlo estimators with confidence half-widths.
//!
//! Half-widths are 3-sigma. Variances use the asymptotic normal
//! approximation built from the sample fourth central moment, with a
//! jackknife below `JACKKNIFE_BELOW` samples. All reductions go through
//! [`pairwise_sum`] in row order, so reruns agree bit-for-bit.

use rayon::prelude::*;
use serde::Serialize;
use libm::tgamma as gamma;

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, pairwise_sum};
use crate::sampler::SampleMatrix;

pub const CI_SIGMAS: f64 = 3.0;
pub const JACKKNIFE_BELOW: usize = 10_000;
pub const DKW_ALPHA: f64 = 0.01;
/// Constant of the variance bound for `Σ a_i X_i²` on isotropic unconditional bodies.
pub const SQUARE_VARIANCE_CONSTANT: f64 = 16.0;
pub const SHELL_DEVIATION_BOUND: f64 = 16.0;
const MAX_EXPONENT: f64 = 32.0;
const IDENTITY_QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub value: f64,
    pub half_width: f64,
    pub count: usize,
    pub estimator_id: String,
    /// Set when every input value was identical.
    pub degenerate: bool,
}

impl EstimateWithCI {
    /// One Monte Carlo sigma.
    pub fn sigma(&self) -> f64 {
        self.half_width / CI_SIGMAS
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.value - x).abs() <= self.half_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightKind {
    Direction,
    Coefficients,
    Exponents,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    entries: Vec<f64>,
    kind: WeightKind,
}

impl WeightVector {
    /// A unit vector; `Σ θ_i² = 1` must hold to 1e-12.
    pub fn direction(entries: Vec<f64>) -> Result<Self> {
        let norm2: f64 = entries.iter().map(|t| t * t).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("direction has squared norm {norm2}")));
        }
        Ok(WeightVector { entries, kind: WeightKind::Direction })
    }

    pub fn normalized(entries: Vec<f64>) -> Result<Self> {
        let norm = entries.iter().map(|t| t * t).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        Self::direction(entries.into_iter().map(|t| t / norm).collect())
    }

    /// `(1/√n, …, 1/√n)`.
    pub fn uniform_direction(n: usize) -> Self {
        let v = 1.0 / (n as f64).sqrt();
        WeightVector { entries: vec![v; n], kind: WeightKind::Direction }
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        WeightVector { entries: e, kind: WeightKind::Direction }
    }

    pub fn coefficients(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
            return Err(Error::InvalidArgument("coefficients must be nonnegative".into()));
        }
        Ok(WeightVector { entries, kind: WeightKind::Coefficients })
    }

    pub fn exponents(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidArgument("exponents must be positive".into()));
        }
        Ok(WeightVector { entries, kind: WeightKind::Exponents })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Σ w_i⁴`.
    pub fn fourth_power_sum(&self) -> f64 {
        self.entries.iter().map(|t| t.powi(4)).sum()
    }

    fn expect_kind(&self, kind: WeightKind, dim: usize) -> Result<()> {
        if self.kind != kind {
            return Err(Error::InvalidArgument(format!("expected {kind:?} weights, got {:?}", self.kind)));
        }
        if self.entries.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.entries.len() });
        }
        Ok(())
    }
}

fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

fn centered_power_mean(values: &[f64], center: f64, power: i32) -> f64 {
    let dev: Vec<f64> = values.iter().map(|v| (v - center).powi(power)).collect();
    pairwise_sum(&dev) / values.len() as f64
}

/// Mean with a CLT half-width.
pub fn mean_estimate(values: &[f64], id: &str) -> Result<EstimateWithCI> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument(format!("{id}: need at least 2 values")));
    }
    let n = values.len() as f64;
    let m = mean(values);
    let var = centered_power_mean(values, m, 2) * n / (n - 1.0);
    Ok(EstimateWithCI {
        value: m,
        half_width: CI_SIGMAS * (var / n).sqrt(),
        count: values.len(),
        estimator_id: id.to_string(),
        degenerate: var == 0.0,
    })
}

/// Unbiased sample variance with a CI for it.
pub fn variance_estimate(values: &[f64], id: &str) -> Result<EstimateWithCI> {
    let count = values.len();
    if count < 3 {
        return Err(Error::InvalidArgument(format!("{id}: need at least 3 values")));
    }
    let n = count as f64;
    let m = mean(values);
    let dev2: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    let ss = pairwise_sum(&dev2);
    let var = ss / (n - 1.0);
    let sigma = if count >= JACKKNIFE_BELOW {
        let m2 = ss / n;
        let m4 = centered_power_mean(values, m, 4);
        ((m4 - m2 * m2).max(0.0) / n).sqrt()
    } else {
        // Leave-one-out variances from the centered sum of squares.
        let loo: Vec<f64> = dev2.iter().map(|d| (ss - d * n / (n - 1.0)) / (n - 2.0)).collect();
        let loo_mean = mean(&loo);
        let spread = centered_power_mean(&loo, loo_mean, 2) * n;
        ((n - 1.0) / n * spread).sqrt()
    };
    Ok(EstimateWithCI {
        value: var,
        half_width: CI_SIGMAS * sigma,
        count,
        estimator_id: id.to_string(),
        degenerate: ss == 0.0,
    })
}

fn row_map<F>(samples: &SampleMatrix, f: F) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    samples.data().par_chunks(samples.dim()).map(f).collect()
}

fn require_rows(samples: &SampleMatrix, min: usize, id: &str) -> Result<()> {
    if samples.rows() < min {
        return Err(Error::InvalidArgument(format!("{id}: need at least {min} rows, got {}", samples.rows())));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThinShellStats {
    /// `Var(|X|²/n)`.
    pub var_ratio: EstimateWithCI,
    /// `E(|X| - √n)²`.
    pub shell_dev: EstimateWithCI,
}

pub fn thin_shell_stats(samples: &SampleMatrix) -> Result<ThinShellStats> {
    require_rows(samples, 100, "thin_shell")?;
    let n = samples.dim() as f64;
    let r2 = row_map(samples, |r| r.iter().map(|v| v * v).sum::<f64>() / n);
    let dev: Vec<f64> = r2.iter().map(|q| ((q * n).sqrt() - n.sqrt()).powi(2)).collect();
    Ok(ThinShellStats {
        var_ratio: variance_estimate(&r2, "thin_shell.var_ratio")?,
        shell_dev: mean_estimate(&dev, "thin_shell.shell_dev")?,
    })
}

/// An estimate next to the theoretical bound it is compared against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedEstimate {
    pub estimate: EstimateWithCI,
    pub bound: f64,
}

impl BoundedEstimate {
    /// `value <= bound + slack_sigmas · sigma`.
    pub fn within(&self, slack_sigmas: f64) -> bool {
        self.estimate.value <= self.bound + slack_sigmas * self.estimate.sigma()
    }
}

/// `Var(Σ a_i X_i²)` against `16 Σ a_i²`.
pub fn weighted_square_variance(samples: &SampleMatrix, a: &WeightVector) -> Result<BoundedEstimate> {
    a.expect_kind(WeightKind::Coefficients, samples.dim())?;
    let w = a.entries();
    let values = row_map(samples, |r| r.iter().zip(w).map(|(x, a)| a * x * x).sum());
    let bound = SQUARE_VARIANCE_CONSTANT * w.iter().map(|a| a * a).sum::<f64>();
    Ok(BoundedEstimate { estimate: variance_estimate(&values, "weighted_square_variance")?, bound })
}

/// `Var(Σ a_i |X_i|^{p_i})` against `Σ 2p_i²/(p_i+1) a_i² Ê|X_i|^{2p_i}`.
pub fn power_sum_variance(samples: &SampleMatrix, a: &WeightVector, p: &WeightVector) -> Result<BoundedEstimate> {
    a.expect_kind(WeightKind::Coefficients, samples.dim())?;
    p.expect_kind(WeightKind::Exponents, samples.dim())?;
    if let Some(big) = p.entries().iter().find(|&&pi| pi > MAX_EXPONENT) {
        return Err(Error::InvalidArgument(format!("exponent {big} exceeds {MAX_EXPONENT}")));
    }
    let (w, e) = (a.entries(), p.entries());
    let values = row_map(samples, |r| r.iter().zip(w).zip(e).map(|((x, a), p)| a * x.abs().powf(*p)).sum());
    let mut bound = 0.0;
    for i in 0..samples.dim() {
        let moments: Vec<f64> = samples.iter_rows().map(|r| r[i].abs().powf(2.0 * e[i])).collect();
        bound += 2.0 * e[i] * e[i] / (e[i] + 1.0) * w[i] * w[i] * mean(&moments);
    }
    Ok(BoundedEstimate { estimate: variance_estimate(&values, "power_sum_variance")?, bound })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpNormVariance {
    pub estimate: EstimateWithCI,
    /// `n^{2/p - 1}`, the predicted order of the variance.
    pub reference_scale: f64,
}

pub fn lp_norm_variance(samples: &SampleMatrix, p: f64) -> Result<LpNormVariance> {
    require_rows(samples, 100, "lp_norm_variance")?;
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p must be >= 1, got {p}")));
    }
    let values = row_map(samples, |r| {
        if p.is_infinite() {
            r.iter().fold(0.0f64, |m, x| m.max(x.abs()))
        } else {
            r.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
        }
    });
    let n = samples.dim() as f64;
    Ok(LpNormVariance {
        estimate: variance_estimate(&values, "lp_norm_variance")?,
        reference_scale: n.powf(2.0 / p - 1.0),
    })
}

/// `Σ θ_i X_i` for every row.
pub fn marginal_values(samples: &SampleMatrix, theta: &WeightVector) -> Result<Vec<f64>> {
    theta.expect_kind(WeightKind::Direction, samples.dim())?;
    let t = theta.entries();
    Ok(row_map(samples, |r| r.iter().zip(t).map(|(x, t)| x * t).sum()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KolmogorovDistance {
    pub distance: f64,
    /// DKW half-width at level `DKW_ALPHA`.
    pub dkw_band: f64,
    pub count: usize,
}

/// DKW uniform band `sqrt(ln(2/α)/(2N))`.
pub fn dkw_band(count: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * count as f64)).sqrt()
}

/// `sup_t |F̂_N(t) - F(t)|`, evaluated exactly at the jumps of the empirical CDF.
pub fn kolmogorov_distance<F: Fn(f64) -> f64>(values: &[f64], reference_cdf: F) -> Result<KolmogorovDistance> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("kolmogorov_distance: no values".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("kolmogorov_distance: NaN in values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.par_sort_unstable_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut distance = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = reference_cdf(x);
        let below = i as f64 / n;
        let at = j as f64 / n;
        distance = distance.max((f - below).abs()).max((at - f).abs());
        i = j;
    }
    Ok(KolmogorovDistance { distance, dkw_band: dkw_band(values.len(), DKW_ALPHA), count: values.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    pub t: f64,
    /// `P(|X| <= √n - t)`.
    pub lower: EstimateWithCI,
    /// `P(|X| >= √n + t)`.
    pub upper: EstimateWithCI,
}

fn proportion(hits: usize, count: usize, id: &str) -> EstimateWithCI {
    let p = hits as f64 / count as f64;
    EstimateWithCI {
        value: p,
        half_width: CI_SIGMAS * (p * (1.0 - p) / count as f64).sqrt(),
        count,
        estimator_id: id.to_string(),
        degenerate: hits == 0 || hits == count,
    }
}

pub fn tail_probability(samples: &SampleMatrix, thresholds: &[f64]) -> Result<Vec<TailEstimate>> {
    require_rows(samples, 1, "tail_probability")?;
    let root_n = (samples.dim() as f64).sqrt();
    let mut norms = row_map(samples, |r| r.iter().map(|v| v * v).sum::<f64>().sqrt());
    norms.par_sort_unstable_by(|a, b| a.total_cmp(b));
    let count = norms.len();
    Ok(thresholds
        .iter()
        .map(|&t| {
            let lo = norms.partition_point(|&r| r <= root_n - t);
            let hi = count - norms.partition_point(|&r| r < root_n + t);
            TailEstimate {
                t,
                lower: proportion(lo, count, "tail_probability.lower"),
                upper: proportion(hi, count, "tail_probability.upper"),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares of `ln(value)` on `ln(n)`.
pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if let Some((n, v)) = points.iter().find(|(n, v)| !(*v > 0.0) || !(*n > 0.0)) {
        return Err(Error::InvalidArgument(format!("scaling_fit needs positive data, got ({n}, {v})")));
    }
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(|a, b| a.total_cmp(b));
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidArgument("scaling_fit needs at least 3 distinct n".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(ScalingFit { slope, intercept, r2 })
}

/// Frequency of `{1/2 <= Σθ_i²X_i² <= 3/2 and Σ_{|θ_iX_i| >= ε} θ_i²X_i² <= 1/4}`,
/// `ε = 10 (Σθ_i⁴)^{1/2}`.
pub fn typical_event_frequency(samples: &SampleMatrix, theta: &WeightVector) -> Result<EstimateWithCI> {
    theta.expect_kind(WeightKind::Direction, samples.dim())?;
    let eps = 10.0 * theta.fourth_power_sum().sqrt();
    let t = theta.entries();
    let hits = samples
        .data()
        .par_chunks(samples.dim())
        .filter(|r| {
            let mut total = 0.0;
            let mut large = 0.0;
            for (x, th) in r.iter().zip(t) {
                let y = th * x;
                total += y * y;
                if y.abs() >= eps {
                    large += y * y;
                }
            }
            (0.5..=1.5).contains(&total) && large <= 0.25
        })
        .count();
    Ok(proportion(hits, samples.rows(), "typical_event_frequency"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityValues {
    pub deviation_lhs: f64,
    pub deviation_rhs: f64,
    pub range_lhs: f64,
    pub range_rhs: f64,
}

impl IdentityValues {
    /// Largest `|lhs - rhs| / (1 + |rhs|)` over both identities.
    pub fn max_relative_gap(&self) -> f64 {
        let g1 = (self.deviation_lhs - self.deviation_rhs).abs() / (1.0 + self.deviation_rhs.abs());
        let g2 = (self.range_lhs - self.range_rhs).abs() / (1.0 + self.range_rhs.abs());
        g1.max(g2)
    }
}

fn symmetric_integral<F: Fn(f64) -> f64>(f: F, r: f64) -> Result<f64> {
    // |t|^p has a kink at 0; integrate each half separately.
    Ok(adaptive_simpson(&f, -r, 0.0, IDENTITY_QUAD_TOL)? + adaptive_simpson(&f, 0.0, r, IDENTITY_QUAD_TOL)?)
}

/// Both sides of
/// `∫_{-r}^{r} (a|t|^p - a r^p)² dt = 2p²/(p+1) ∫_{-r}^{r} (a|t|^p)² dt` and
/// `∫_{-r}^{r} (2a r^p)² dt = 4(2p+1) ∫_{-r}^{r} (a|t|^p)² dt`, by quadrature.
pub fn verify_identities(a: f64, p: f64, r: f64) -> Result<IdentityValues> {
    if !(a >= 0.0 && p >= 0.0 && r >= 0.0) {
        return Err(Error::InvalidArgument("a, p, r must be nonnegative".into()));
    }
    let rp = r.powf(p);
    let pow = |t: f64| if p == 0.0 { 1.0 } else { t.abs().powf(p) };
    let square_mass = symmetric_integral(|t| (a * pow(t)).powi(2), r)?;
    Ok(IdentityValues {
        deviation_lhs: symmetric_integral(|t| (a * pow(t) - a * rp).powi(2), r)?,
        deviation_rhs: 2.0 * p * p / (p + 1.0) * square_mass,
        range_lhs: symmetric_integral(|_| (2.0 * a * rp).powi(2), r)?,
        range_rhs: 4.0 * (2.0 * p + 1.0) * square_mass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentChain {
    /// `(Ê|X|^p / Γ(p+1))^{1/p}`
    pub lhs: f64,
    /// `(Ê|X|²/2)^{1/2}`
    pub mid: f64,
    /// `Ê|X|`
    pub rhs: f64,
}

pub fn moment_inequality_check(values: &[f64], p: f64) -> Result<MomentChain> {
    if !(p >= 2.0) {
        return Err(Error::InvalidArgument(format!("p must be >= 2, got {p}")));
    }
    if values.is_empty() {
        return Err(Error::InvalidArgument("no values".into()));
    }
    let abs_p: Vec<f64> = values.iter().map(|v| v.abs().powf(p)).collect();
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    Ok(MomentChain {
        lhs: (mean(&abs_p) / gamma(p + 1.0)).powf(1.0 / p),
        mid: (mean(&sq) / 2.0).sqrt(),
        rhs: mean(&abs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::BodySpec;
    use crate::clt::gauss::normal_cdf;
    use crate::sampler::{sample_exact, SampleMethod};

    fn matrix(rows: Vec<Vec<f64>>) -> SampleMatrix {
        let dim = rows[0].len();
        SampleMatrix::from_rows(rows.concat(), dim, BodySpec::cube(dim, 1.0), 0, SampleMethod::Exact).unwrap()
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::direction(vec![0.6, 0.8]).is_ok());
        assert!(WeightVector::direction(vec![0.6, 0.7]).is_err());
        assert!(WeightVector::coefficients(vec![1.0, -0.1]).is_err());
        assert!(WeightVector::exponents(vec![1.0, 0.0]).is_err());
        let u = WeightVector::uniform_direction(16);
        assert!((u.fourth_power_sum() - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn variance_estimators_agree_on_scale() {
        let s = sample_exact(&BodySpec::cube(1, 3f64.sqrt()), 20_000, 1).unwrap();
        let sq: Vec<f64> = s.data().iter().map(|x| x * x).collect();
        let big = variance_estimate(&sq, "v").unwrap();
        let small = variance_estimate(&sq[..5000], "v").unwrap();
        assert!(big.contains(0.8), "{big:?}");
        assert!(small.contains(0.8), "{small:?}");
        // jackknife and asymptotic half-widths estimate the same quantity
        let ratio = small.half_width / big.half_width;
        assert!((ratio - 2.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn degenerate_samples_flagged() {
        let m = matrix(vec![vec![1.0, 1.0]; 200]);
        let ts = thin_shell_stats(&m).unwrap();
        assert!(ts.var_ratio.degenerate);
        assert_eq!(ts.var_ratio.half_width, 0.0);
        assert!(thin_shell_stats(&matrix(vec![vec![1.0]; 10])).is_err());
    }

    #[test]
    fn weighted_square_zero_and_mismatch() {
        let s = sample_exact(&BodySpec::cube(3, 3f64.sqrt()), 500, 2).unwrap();
        let zero = weighted_square_variance(&s, &WeightVector::coefficients(vec![0.0; 3]).unwrap()).unwrap();
        assert_eq!(zero.estimate.value, 0.0);
        assert_eq!(zero.bound, 0.0);
        let short = WeightVector::coefficients(vec![1.0; 2]).unwrap();
        assert!(weighted_square_variance(&s, &short).is_err());
    }

    #[test]
    fn power_sum_guard() {
        let s = sample_exact(&BodySpec::cube(2, 1.0), 500, 2).unwrap();
        let a = WeightVector::coefficients(vec![1.0; 2]).unwrap();
        let p = WeightVector::exponents(vec![2.0, 40.0]).unwrap();
        assert!(power_sum_variance(&s, &a, &p).is_err());
    }

    #[test]
    fn marginal_projection() {
        let s = sample_exact(&BodySpec::cube(3, 1.0), 50, 9).unwrap();
        let v = marginal_values(&s, &WeightVector::basis(3, 0)).unwrap();
        assert_eq!(v, s.column(0));
        let bad = WeightVector::coefficients(vec![1.0; 3]).unwrap();
        assert!(marginal_values(&s, &bad).is_err());
    }

    #[test]
    fn kolmogorov_constant_and_nan() {
        let c = 0.3;
        let k = kolmogorov_distance(&[c; 10], normal_cdf).unwrap();
        let expect = normal_cdf(c).max(1.0 - normal_cdf(c));
        assert!((k.distance - expect).abs() < 1e-15);
        assert!(kolmogorov_distance(&[0.0, f64::NAN], normal_cdf).is_err());
        assert!(kolmogorov_distance(&[], normal_cdf).is_err());
        assert!((dkw_band(100_000, 0.01) - (200f64.ln() / 200_000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_small_exact() {
        // two points against U[0,1]: jumps at 0.25 and 0.5
        let k = kolmogorov_distance(&[0.5, 0.25], |t: f64| t.clamp(0.0, 1.0)).unwrap();
        assert!((k.distance - 0.5).abs() < 1e-15);
    }

    #[test]
    fn scaling_fit_exact_power_laws() {
        let pts: Vec<(f64, f64)> = [4.0, 8.0, 16.0, 32.0].iter().map(|&n| (n, 0.8 / n)).collect();
        let fit = scaling_fit(&pts).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!((fit.intercept - 0.8f64.ln()).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = [2.0, 3.0, 5.0].iter().map(|&n| (n, 7.0)).collect();
        assert!(scaling_fit(&flat).unwrap().slope.abs() < 1e-12);
        assert!(scaling_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(scaling_fit(&[(1.0, 1.0), (1.0, 2.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn tail_monotone_and_median() {
        let body = BodySpec::cube(16, 3f64.sqrt());
        let s = sample_exact(&body, 20_000, 4).unwrap();
        let tails = tail_probability(&s, &[0.0, 0.5, 1.0, 2.0, 4.0]).unwrap();
        for w in tails.windows(2) {
            assert!(w[1].lower.value <= w[0].lower.value);
            assert!(w[1].upper.value <= w[0].upper.value);
        }
        assert!((tails[0].lower.value - 0.5).abs() < 0.05);
        assert!((tails[0].upper.value - 0.5).abs() < 0.05);
        assert_eq!(tails[4].lower.value, 0.0);
    }

    #[test]
    fn typical_event_examples() {
        let body = BodySpec::cube(1, 3f64.sqrt());
        let s = sample_exact(&body, 200_000, 6).unwrap();
        let f = typical_event_frequency(&s, &WeightVector::basis(1, 0)).unwrap();
        assert!((f.value - 0.298_858_490_722_685).abs() < f.half_width, "{f:?}");
        let body = BodySpec::cube(64, 3f64.sqrt());
        let s = sample_exact(&body, 20_000, 6).unwrap();
        let f = typical_event_frequency(&s, &WeightVector::uniform_direction(64)).unwrap();
        assert!(f.value > 0.99 && f.value <= 1.0);
    }

    #[test]
    fn identity_examples() {
        let v = verify_identities(1.0, 1.0, 1.0).unwrap();
        for (x, e) in [(v.deviation_lhs, 2.0 / 3.0), (v.deviation_rhs, 2.0 / 3.0), (v.range_lhs, 8.0), (v.range_rhs, 8.0)] {
            assert!((x - e).abs() < 1e-12);
        }
        let z = verify_identities(0.0, 2.0, 1.5).unwrap();
        assert_eq!((z.deviation_lhs, z.deviation_rhs, z.range_lhs, z.range_rhs), (0.0, 0.0, 0.0, 0.0));
        let p0 = verify_identities(1.3, 0.0, 2.0).unwrap();
        assert!(p0.deviation_lhs.abs() < 1e-15 && p0.deviation_rhs == 0.0);
        assert!(verify_identities(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn moment_chain_p2_collapse() {
        let vals = [0.3, -1.2, 2.0, 0.7];
        let c = moment_inequality_check(&vals, 2.0).unwrap();
        assert!((c.lhs - c.mid).abs() < 1e-15);
        assert!(moment_inequality_check(&vals, 1.5).is_err());
    }
}
