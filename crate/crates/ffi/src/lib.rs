//! C ABI over the thinshell library.
//!
//! Bodies and sample matrices are opaque heap handles released with their
//! `_free` function. Every fallible call returns a [`TsStatus`]; on failure
//! the message is available from [`ts_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use thinshell::clt::{bernoulli_gamma_tail_bruteforce, bernoulli_gamma_tail_fourier, SmoothingKernel};
use thinshell::estimators::{kolmogorov_distance, thin_shell_stats, verify_identities};
use thinshell::sampler::{sample_counterexample, sample_exact};
use thinshell::{BodySpec, Error, SampleMatrix};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InvalidBody = 4,
    UnsupportedKind = 5,
    Numerical = 6,
    Io = 7,
    Panic = 8,
}

/// Opaque body description.
pub struct TsBody(BodySpec);

/// Opaque row-major sample matrix.
pub struct TsSamples(SampleMatrix);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TsThinShellStats {
    pub var_ratio: f64,
    pub var_ratio_half_width: f64,
    pub shell_dev: f64,
    pub shell_dev_half_width: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> TsStatus {
    match err {
        Error::DimensionMismatch { .. } => TsStatus::DimensionMismatch,
        Error::InvalidBody(_) | Error::EmptySection { .. } => TsStatus::InvalidBody,
        Error::UnsupportedKind { .. } => TsStatus::UnsupportedKind,
        Error::Quadrature(_) | Error::NonConvergence(_) | Error::Hypothesis(_) => TsStatus::Numerical,
        Error::Io(_) => TsStatus::Io,
        Error::InvalidArgument(_) | Error::Config { .. } => TsStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard<F: FnOnce() -> Result<(), (TsStatus, String)>>(f: F) -> TsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TsStatus::Panic
        }
    }
}

fn lib<T>(r: thinshell::Result<T>) -> Result<T, (TsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (TsStatus, String) {
    (TsStatus::NullPointer, format!("null pointer: {what}"))
}

/// # Safety
/// `ptr` must be null or valid for `len` reads.
unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], (TsStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// # Safety
/// `out` must be null or valid for one write.
unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (TsStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ts_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static, NUL-terminated version string.
#[no_mangle]
pub extern "C" fn ts_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

fn new_body(body: BodySpec, out: *mut *mut TsBody) -> TsStatus {
    guard(|| {
        lib(body.validate())?;
        unsafe { write(out, Box::into_raw(Box::new(TsBody(body))), "out") }
    })
}

/// Cube `[-half_width, half_width]^dim`.
#[no_mangle]
pub extern "C" fn ts_body_cube(dim: usize, half_width: f64, out: *mut *mut TsBody) -> TsStatus {
    new_body(BodySpec::cube(dim, half_width), out)
}

#[no_mangle]
pub extern "C" fn ts_body_euclidean_ball(dim: usize, radius: f64, out: *mut *mut TsBody) -> TsStatus {
    new_body(BodySpec::euclidean_ball(dim, radius), out)
}

/// `l_p` ball; `p = INFINITY` gives the cube.
#[no_mangle]
pub extern "C" fn ts_body_lp_ball(dim: usize, p: f64, radius: f64, out: *mut *mut TsBody) -> TsStatus {
    new_body(BodySpec::lp_ball(dim, p, radius), out)
}

/// The non-convex axis cross model.
#[no_mangle]
pub extern "C" fn ts_body_counterexample_cross(dim: usize, out: *mut *mut TsBody) -> TsStatus {
    new_body(BodySpec::counterexample_cross(dim), out)
}

/// Replace `*body` by its isotropic rescaling.
///
/// # Safety
/// `body` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ts_body_make_isotropic(body: *mut TsBody) -> TsStatus {
    guard(|| {
        let b = body.as_mut().ok_or_else(|| null("body"))?;
        b.0 = lib(b.0.isotropic())?;
        Ok(())
    })
}

/// # Safety
/// `body` must be a live handle and `x` valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn ts_body_contains(body: *const TsBody, x: *const f64, len: usize, out: *mut bool) -> TsStatus {
    guard(|| {
        let b = body.as_ref().ok_or_else(|| null("body"))?;
        let inside = lib(b.0.contains(slice(x, len, "x")?))?;
        write(out, inside, "out")
    })
}

/// # Safety
/// `body` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ts_body_free(body: *mut TsBody) {
    if !body.is_null() {
        drop(Box::from_raw(body));
    }
}

/// `count` exact draws (the axis cross uses its direct sampler).
///
/// # Safety
/// `body` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ts_sample(body: *const TsBody, count: usize, seed: u64, out: *mut *mut TsSamples) -> TsStatus {
    guard(|| {
        let b = &body.as_ref().ok_or_else(|| null("body"))?.0;
        let m = if b.is_convex() { sample_exact(b, count, seed) } else { sample_counterexample(b.dim, count, seed) };
        write(out, Box::into_raw(Box::new(TsSamples(lib(m)?))), "out")
    })
}

/// # Safety
/// `samples` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ts_samples_rows(samples: *const TsSamples) -> usize {
    samples.as_ref().map_or(0, |s| s.0.rows())
}

/// # Safety
/// `samples` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ts_samples_dim(samples: *const TsSamples) -> usize {
    samples.as_ref().map_or(0, |s| s.0.dim())
}

/// Borrowed pointer to the `rows * dim` row-major values; valid while the handle lives.
///
/// # Safety
/// `samples` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ts_samples_data(samples: *const TsSamples) -> *const f64 {
    samples.as_ref().map_or(ptr::null(), |s| s.0.data().as_ptr())
}

/// # Safety
/// `samples` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ts_samples_free(samples: *mut TsSamples) {
    if !samples.is_null() {
        drop(Box::from_raw(samples));
    }
}

/// `Var(|X|²/n)` and `E(|X| - √n)²` with 3-sigma half-widths; needs 100 rows.
///
/// # Safety
/// `samples` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ts_thin_shell_stats(samples: *const TsSamples, out: *mut TsThinShellStats) -> TsStatus {
    guard(|| {
        let s = &samples.as_ref().ok_or_else(|| null("samples"))?.0;
        let st = lib(thin_shell_stats(s))?;
        write(
            out,
            TsThinShellStats {
                var_ratio: st.var_ratio.value,
                var_ratio_half_width: st.var_ratio.half_width,
                shell_dev: st.shell_dev.value,
                shell_dev_half_width: st.shell_dev.half_width,
            },
            "out",
        )
    })
}

/// Characteristic function of the smoothing kernel.
#[no_mangle]
pub extern "C" fn ts_kernel_char_fn(xi: f64) -> f64 {
    SmoothingKernel::shared().char_fn(xi)
}

#[no_mangle]
pub extern "C" fn ts_kernel_density(x: f64) -> f64 {
    SmoothingKernel::shared().density(x)
}

#[no_mangle]
pub extern "C" fn ts_kernel_cdf(x: f64) -> f64 {
    SmoothingKernel::shared().cdf(x)
}

/// Writes `(EΓ², EΓ⁴, EΓ⁶)` to `out[0..3]`.
///
/// # Safety
/// `out` must be valid for 3 writes.
#[no_mangle]
pub unsafe extern "C" fn ts_kernel_moments(out: *mut f64) -> TsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let m = SmoothingKernel::shared().moments();
        ptr::copy_nonoverlapping(m.as_ptr(), out, 3);
        Ok(())
    })
}

/// `P(σΓ + Σθ_iΔ_i >= t)`; `brute_force` selects the `2ⁿ` enumeration.
///
/// # Safety
/// `theta` must be valid for `n` reads.
#[no_mangle]
pub unsafe extern "C" fn ts_bernoulli_gamma_tail(
    theta: *const f64,
    n: usize,
    sigma: f64,
    t: f64,
    brute_force: bool,
    out: *mut f64,
) -> TsStatus {
    guard(|| {
        let th = slice(theta, n, "theta")?;
        let p = if brute_force {
            bernoulli_gamma_tail_bruteforce(th, sigma, t)
        } else {
            bernoulli_gamma_tail_fourier(th, sigma, t)
        };
        write(out, lib(p)?, "out")
    })
}

/// Kolmogorov distance of `values` to the standard normal and its DKW band.
///
/// # Safety
/// `values` must be valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn ts_kolmogorov_normal(
    values: *const f64,
    len: usize,
    distance: *mut f64,
    dkw_band: *mut f64,
) -> TsStatus {
    guard(|| {
        let kd = lib(kolmogorov_distance(slice(values, len, "values")?, thinshell::clt::normal_cdf))?;
        write(distance, kd.distance, "distance")?;
        write(dkw_band, kd.dkw_band, "dkw_band")
    })
}

/// Both sides of the two power-function identities, in order
/// `(deviation_lhs, deviation_rhs, range_lhs, range_rhs)`.
///
/// # Safety
/// `out` must be valid for 4 writes.
#[no_mangle]
pub unsafe extern "C" fn ts_identities(a: f64, p: f64, r: f64, out: *mut f64) -> TsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let v = lib(verify_identities(a, p, r))?;
        let vals = [v.deviation_lhs, v.deviation_rhs, v.range_lhs, v.range_rhs];
        ptr::copy_nonoverlapping(vals.as_ptr(), out, 4);
        Ok(())
    })
}
