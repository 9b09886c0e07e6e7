//! C ABI over the `maxstab` core.
//!
//! Every fallible call returns a [`MaxstabStatus`]; results go through out
//! pointers. Extended reals cross the boundary as IEEE doubles with `±inf`.
//! Handles are opaque and must be released with the matching `_free`
//! function. Strings returned to the caller are freed with
//! [`maxstab_string_free`]. After a non-`Ok` status,
//! [`maxstab_last_error`] gives a message for the calling thread.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, size_t};
use maxstab::harness::{run_axiom, SuiteInputs, DEFAULT_TOL};
use maxstab::{Atom, Axiom, ContinuousCdf, DiscreteDist, Error, MeasureSpec, SamplerConfig, SharedMeasure};

/// Status codes. `Ok` is zero; the rest mirror the core error kinds.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxstabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    MalformedJson = 3,
    MassSum = 4,
    NanValue = 5,
    NegativeMass = 6,
    EmptyDistribution = 7,
    ProbabilityRange = 8,
    InvalidStep = 9,
    InvalidKernel = 10,
    InvalidGrid = 11,
    OffGrid = 12,
    NotStrictlyIncreasing = 13,
    InvalidArgument = 14,
    Io = 15,
    Panic = 99,
}

impl From<&Error> for MaxstabStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::MalformedJson(_) => MaxstabStatus::MalformedJson,
            Error::MassSum { .. } => MaxstabStatus::MassSum,
            Error::NanValue(_) => MaxstabStatus::NanValue,
            Error::NegativeMass(_) => MaxstabStatus::NegativeMass,
            Error::EmptyDistribution => MaxstabStatus::EmptyDistribution,
            Error::ProbabilityRange { .. } => MaxstabStatus::ProbabilityRange,
            Error::InvalidStep(_) => MaxstabStatus::InvalidStep,
            Error::InvalidKernel(_) => MaxstabStatus::InvalidKernel,
            Error::InvalidGrid(_) => MaxstabStatus::InvalidGrid,
            Error::OffGrid { .. } => MaxstabStatus::OffGrid,
            Error::NotStrictlyIncreasing { .. } => MaxstabStatus::NotStrictlyIncreasing,
            Error::InvalidArgument(_) => MaxstabStatus::InvalidArgument,
            Error::Io(_) => MaxstabStatus::Io,
        }
    }
}

/// Opaque finite distribution.
pub struct MaxstabDist {
    inner: DiscreteDist,
}

/// Opaque risk measure built from a JSON measure description.
pub struct MaxstabMeasure {
    inner: SharedMeasure,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(MaxstabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure((&e).into(), format!("{}: {e}", e.code()))
    }
}

fn null(what: &str) -> Failure {
    Failure(MaxstabStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MaxstabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MaxstabStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MaxstabStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(MaxstabStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn dist_arg<'a>(p: *const MaxstabDist, what: &str) -> Result<&'a DiscreteDist, Failure> {
    p.as_ref().map(|d| &d.inner).ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|_| Failure(MaxstabStatus::InvalidArgument, "interior NUL".into()))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn maxstab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn maxstab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a distribution from `n` support points and masses.
///
/// # Safety
/// `xs` and `ps` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maxstab_dist_new(
    xs: *const f64,
    ps: *const f64,
    n: size_t,
    out: *mut *mut MaxstabDist,
) -> MaxstabStatus {
    guard(|| {
        if n > 0 && (xs.is_null() || ps.is_null()) {
            return Err(null("xs or ps"));
        }
        let atoms: Vec<Atom> = if n == 0 {
            Vec::new()
        } else {
            let xs = std::slice::from_raw_parts(xs, n);
            let ps = std::slice::from_raw_parts(ps, n);
            xs.iter().zip(ps).map(|(&x, &p)| Atom { x, p }).collect()
        };
        let d = DiscreteDist::new(&atoms)?;
        put(out, Box::into_raw(Box::new(MaxstabDist { inner: d })))
    })
}

/// Parses a distribution from JSON text (`{"atoms": [...]}`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maxstab_dist_from_json(json: *const c_char, out: *mut *mut MaxstabDist) -> MaxstabStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let d = maxstab::io::parse_distribution_str(text)?.discrete()?;
        put(out, Box::into_raw(Box::new(MaxstabDist { inner: d })))
    })
}

/// Serializes a distribution to JSON. Free the result with
/// [`maxstab_string_free`].
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maxstab_dist_to_json(d: *const MaxstabDist, out: *mut *mut c_char) -> MaxstabStatus {
    guard(|| {
        let d = dist_arg(d, "dist")?;
        let s = serde_json::to_string(d).map_err(Error::from)?;
        put(out, into_c_string(s)?)
    })
}

/// Releases a distribution handle. Null is ignored.
///
/// # Safety
/// `d` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn maxstab_dist_free(d: *mut MaxstabDist) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of support points.
///
/// # Safety
/// `d` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn maxstab_dist_len(d: *const MaxstabDist) -> size_t {
    d.as_ref().map_or(0, |d| d.inner.len())
}

/// Copies support points and masses into caller buffers of length
/// [`maxstab_dist_len`].
///
/// # Safety
/// `xs` and `ps` must each have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn maxstab_dist_atoms(
    d: *const MaxstabDist,
    xs: *mut f64,
    ps: *mut f64,
    len: size_t,
) -> MaxstabStatus {
    guard(|| {
        let d = dist_arg(d, "dist")?;
        if len < d.len() {
            return Err(Failure(MaxstabStatus::InvalidArgument, format!("buffers hold {len}, need {}", d.len())));
        }
        if xs.is_null() || ps.is_null() {
            return Err(null("xs or ps"));
        }
        for (i, a) in d.atoms().iter().enumerate() {
            xs.add(i).write(a.x);
            ps.add(i).write(a.p);
        }
        Ok(())
    })
}

/// `F(x)`.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maxstab_dist_cdf(d: *const MaxstabDist, x: f64, out: *mut f64) -> MaxstabStatus {
    guard(|| put(out, dist_arg(d, "dist")?.cdf(x)))
}

/// Left quantile `inf{x : F(x) ≥ alpha}`, `alpha` in `(0, 1]`.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maxstab_dist_left_quantile(d: *const MaxstabDist, alpha: f64, out: *mut f64) -> MaxstabStatus {
    guard(|| put(out, dist_arg(d, "dist")?.left_quantile(alpha)?))
}

/// Right quantile `inf{x : F(x) > alpha}`, `alpha` in `[0, 1)`.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maxstab_dist_right_quantile(d: *const MaxstabDist, alpha: f64, out: *mut f64) -> MaxstabStatus {
    guard(|| put(out, dist_arg(d, "dist")?.right_quantile(alpha)?))
}

/// Least upper bound in the dominance order (pointwise min of CDFs).
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maxstab_dist_join(
    a: *const MaxstabDist,
    b: *const MaxstabDist,
    out: *mut *mut MaxstabDist,
) -> MaxstabStatus {
    guard(|| {
        let j = dist_arg(a, "a")?.join(dist_arg(b, "b")?);
        put(out, Box::into_raw(Box::new(MaxstabDist { inner: j })))
    })
}

/// Greatest lower bound (pointwise max of CDFs).
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maxstab_dist_meet(
    a: *const MaxstabDist,
    b: *const MaxstabDist,
    out: *mut *mut MaxstabDist,
) -> MaxstabStatus {
    guard(|| {
        let m = dist_arg(a, "a")?.meet(dist_arg(b, "b")?);
        put(out, Box::into_raw(Box::new(MaxstabDist { inner: m })))
    })
}

/// Writes whether `a` is dominated by `b`.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maxstab_dist_fsd_leq(a: *const MaxstabDist, b: *const MaxstabDist, out: *mut bool) -> MaxstabStatus {
    guard(|| put(out, dist_arg(a, "a")?.fsd_leq(dist_arg(b, "b")?)))
}

/// Builds a measure from its JSON description, e.g.
/// `{"kind":"var","alpha":0.3}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maxstab_measure_from_json(json: *const c_char, out: *mut *mut MaxstabMeasure) -> MaxstabStatus {
    guard(|| {
        let spec: MeasureSpec = serde_json::from_str(str_arg(json, "json")?).map_err(Error::from)?;
        let m = spec.build()?;
        put(out, Box::into_raw(Box::new(MaxstabMeasure { inner: m })))
    })
}

/// Releases a measure handle. Null is ignored.
///
/// # Safety
/// `m` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn maxstab_measure_free(m: *mut MaxstabMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// `ρ(F)`; `±inf` encode the infinite values.
///
/// # Safety
/// `m` and `d` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maxstab_measure_eval(m: *const MaxstabMeasure, d: *const MaxstabDist, out: *mut f64) -> MaxstabStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("measure"))?;
        put(out, m.inner.evaluate(dist_arg(d, "dist")?).to_f64())
    })
}

/// Runs one axiom check (`"maxs"`, `"mins"`, `"nd"`, `"fsd"`, `"ls"`) with
/// sampler defaults and the given seed and trial count. Writes the JSON
/// report and whether it passed. A `tol` of zero or less selects the default.
///
/// # Safety
/// `m` must be a live handle, `axiom` a NUL-terminated string, and both
/// out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn maxstab_check_axiom(
    m: *const MaxstabMeasure,
    axiom: *const c_char,
    seed: u64,
    trials: size_t,
    tol: f64,
    report_json: *mut *mut c_char,
    passed: *mut bool,
) -> MaxstabStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("measure"))?;
        let axiom: Axiom = str_arg(axiom, "axiom")?.parse()?;
        let tol = if tol > 0.0 { tol } else { DEFAULT_TOL };
        let cfg = SamplerConfig { seed, trials, ..SamplerConfig::default() };
        let (lo, hi) = cfg.support_range;
        let nd_grid = maxstab::engine::linspace(lo, hi, 49);
        let ls_cdf = ContinuousCdf::uniform(0.0, 1.0)?;
        let inputs = SuiteInputs { cfg: &cfg, nd_grid: &nd_grid, ls_cdf: &ls_cdf, ls_n_max: 256, tol };
        let report = run_axiom(&m.inner, axiom, &inputs)?;
        let text = serde_json::to_string(&report).map_err(Error::from)?;
        if passed.is_null() {
            return Err(null("passed"));
        }
        put(report_json, into_c_string(text)?)?;
        passed.write(report.passed());
        Ok(())
    })
}
