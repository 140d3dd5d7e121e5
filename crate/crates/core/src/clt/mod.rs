//! Smoothing kernel, Fourier-inversion tails of Bernoulli sums, and the
//! Gaussian-tail facts used around them.

pub mod bernoulli;
pub mod gauss;
pub mod kernel;
pub mod tail_shift;

pub use bernoulli::{bernoulli_gamma_tail_bruteforce, bernoulli_gamma_tail_fourier, smoothed_sum_report, SmoothedSumReport, QUAD_TOL};
pub use gauss::{gauss_tail_bounds_check, normal_cdf, phi, upper_tail, TailRatio, TAIL_RATIO_BAND};
pub use kernel::{build_kernel, SmoothingKernel};
pub use tail_shift::{tail_shift_check, smoothing_comparison, TailShiftReport, TailShiftRow, SmoothingComparison};
