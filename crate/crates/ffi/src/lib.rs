//! C interface to the mixmorrey toolkit.
//!
//! Grids and sampled functions cross the boundary as opaque handles that the
//! caller releases with the matching `*_free` function. Every fallible call
//! returns an [`MmStatus`]; on failure a thread-local message describing the
//! error is available from [`mm_last_error`] until the next failing call.

use mixmorrey::certify::{build_corpus, certify_inequality, default_resolutions, CertifyParams, CorpusConfig};
use mixmorrey::mixed_lebesgue::{mixed_norm, MixedExponent};
use mixmorrey::morrey_herz::{lm_lambda_norm, MorreyParams, RadialGrid};
use mixmorrey::operators::hl_maximal;
use mixmorrey::sampled::{sample, FunctionSpec, Grid, SampledFunction};
use mixmorrey::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result of a call across the C boundary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Unsupported = 3,
    GridMismatch = 4,
    Numerical = 5,
    Config = 6,
    Io = 7,
    Serialization = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Logarithmic radial grid: `points_per_octave` nodes per octave over `[2^j_min, 2^j_max]`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MmRadialGrid {
    pub j_min: i32,
    pub j_max: i32,
    pub points_per_octave: u32,
}

/// Opaque uniform grid on `[-half_width, half_width]^dim`.
pub struct MmGrid(Grid);

/// Opaque function sampled on a grid.
pub struct MmFunction(SampledFunction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(MmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parameter(_) => MmStatus::InvalidArgument,
            Error::Unsupported(_) => MmStatus::Unsupported,
            Error::GridMismatch(_) => MmStatus::GridMismatch,
            Error::Numerical(_) => MmStatus::Numerical,
            Error::Config { .. } => MmStatus::Config,
            Error::Io(_) => MmStatus::Io,
            Error::Serialization(_) => MmStatus::Serialization,
        };
        Failure(status, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(MmStatus::Serialization, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(MmStatus::NullPointer, format!("`{what}` is NULL"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(MmStatus::InvalidArgument, msg.into())
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> MmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            MmStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: the caller passes either NULL or a live handle from this library.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: the caller guarantees `len` readable doubles at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: the caller passes a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| invalid(format!("`{what}` is not UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    // SAFETY: checked non-NULL; the caller provides writable storage.
    unsafe { out.write(value) };
    Ok(())
}

fn exponent(p: &[f64], grid: &Grid) -> Result<MixedExponent, Failure> {
    if p.len() != grid.dim() {
        return Err(invalid(format!("exponent has {} entries for a {}-dimensional grid", p.len(), grid.dim())));
    }
    Ok(MixedExponent::new(p.to_vec())?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call or [`mm_clear_last_error`].
#[no_mangle]
pub extern "C" fn mm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Length in bytes of the last error message, excluding the terminator.
#[no_mangle]
pub extern "C" fn mm_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes().len()))
}

#[no_mangle]
pub extern "C" fn mm_clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Creates a grid with `points` nodes per axis (odd, at least 17).
///
/// # Safety
/// `out` must be NULL or point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn mm_grid_new(dim: usize, half_width: f64, points: usize, out: *mut *mut MmGrid) -> MmStatus {
    guard(|| {
        let grid = Grid::new(dim, half_width, points)?;
        unsafe { put(out, Box::into_raw(Box::new(MmGrid(grid))), "out") }
    })
}

/// # Safety
/// `grid` must be NULL or a handle from [`mm_grid_new`] that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn mm_grid_free(grid: *mut MmGrid) {
    if !grid.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(grid) });
    }
}

/// Total number of nodes, or 0 for NULL.
///
/// # Safety
/// `grid` must be NULL or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn mm_grid_len(grid: *const MmGrid) -> usize {
    unsafe { grid.as_ref() }.map_or(0, |g| g.0.len())
}

/// Wraps `len` node values, first axis varying fastest.
///
/// # Safety
/// `grid` must be a live grid handle, `values` must hold `len` doubles and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mm_function_from_values(
    grid: *const MmGrid,
    values: *const f64,
    len: usize,
    out: *mut *mut MmFunction,
) -> MmStatus {
    guard(|| {
        let grid = unsafe { borrow(grid, "grid") }?;
        let values = unsafe { slice(values, len, "values") }?;
        let f = SampledFunction::from_values(grid.0, values.to_vec())?;
        unsafe { put(out, Box::into_raw(Box::new(MmFunction(f))), "out") }
    })
}

/// Samples an analytic function described in JSON, for example
/// `{"kind": "cube_indicator", "center": [0.0], "half_side": 1.0}`.
///
/// # Safety
/// `grid` must be a live grid handle, `spec_json` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mm_function_from_spec_json(
    grid: *const MmGrid,
    spec_json: *const c_char,
    out: *mut *mut MmFunction,
) -> MmStatus {
    guard(|| {
        let grid = unsafe { borrow(grid, "grid") }?;
        let spec: FunctionSpec = serde_json::from_str(unsafe { string(spec_json, "spec_json") }?)?;
        let f = sample(&spec, &grid.0)?;
        unsafe { put(out, Box::into_raw(Box::new(MmFunction(f))), "out") }
    })
}

/// # Safety
/// `f` must be NULL or a function handle that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn mm_function_free(f: *mut MmFunction) {
    if !f.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(f) });
    }
}

/// Number of node values, or 0 for NULL.
///
/// # Safety
/// `f` must be NULL or a live function handle.
#[no_mangle]
pub unsafe extern "C" fn mm_function_len(f: *const MmFunction) -> usize {
    unsafe { f.as_ref() }.map_or(0, |f| f.0.values().len())
}

/// Copies the node values into `buf`, which must hold at least
/// [`mm_function_len`] doubles.
///
/// # Safety
/// `f` must be a live function handle and `buf` writable for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn mm_function_copy_values(f: *const MmFunction, buf: *mut f64, cap: usize) -> MmStatus {
    guard(|| {
        let values = unsafe { borrow(f, "f") }?.0.values();
        if cap < values.len() {
            return Err(Failure(MmStatus::BufferTooSmall, format!("need {} doubles, got {cap}", values.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        // SAFETY: `buf` holds at least `values.len()` doubles.
        unsafe { ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len()) };
        Ok(())
    })
}

/// Mixed Lebesgue norm with one exponent per axis (`inf` allowed).
///
/// # Safety
/// `f` must be a live function handle, `p` must hold `p_len` doubles and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mm_mixed_norm(f: *const MmFunction, p: *const f64, p_len: usize, out: *mut f64) -> MmStatus {
    guard(|| {
        let f = &unsafe { borrow(f, "f") }?.0;
        let p = exponent(unsafe { slice(p, p_len, "p") }?, f.grid())?;
        unsafe { put(out, mixed_norm(f, &p, None)?, "out") }
    })
}

/// Local Morrey norm with index `lambda`, evaluated on the given radial grid.
///
/// # Safety
/// As for [`mm_mixed_norm`].
#[no_mangle]
pub unsafe extern "C" fn mm_lm_lambda_norm(
    f: *const MmFunction,
    p: *const f64,
    p_len: usize,
    theta: f64,
    lambda: f64,
    rgrid: MmRadialGrid,
    out: *mut f64,
) -> MmStatus {
    guard(|| {
        let f = &unsafe { borrow(f, "f") }?.0;
        let p = exponent(unsafe { slice(p, p_len, "p") }?, f.grid())?;
        let radial = RadialGrid::new(rgrid.j_min, rgrid.j_max, rgrid.points_per_octave as usize)?;
        let v = lm_lambda_norm(f, &MorreyParams::lambda(p, theta, lambda), &radial)?;
        unsafe { put(out, v.value, "out") }
    })
}

/// Centered Hardy–Littlewood maximal function over cubes, as a new handle.
///
/// # Safety
/// `f` must be a live function handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mm_hl_maximal(f: *const MmFunction, out: *mut *mut MmFunction) -> MmStatus {
    guard(|| {
        let f = &unsafe { borrow(f, "f") }?.0;
        unsafe { put(out, Box::into_raw(Box::new(MmFunction(hl_maximal(f)))), "out") }
    })
}

/// Certifies one registered inequality over the standard corpus and returns
/// the full report as JSON. `params_json` may be NULL for defaults; with
/// `resolutions_len == 0` the default resolutions for `dim` are used. The
/// returned string is released with [`mm_string_free`].
///
/// # Safety
/// `name` must be a NUL-terminated string, `params_json` NULL or one,
/// `resolutions` must hold `resolutions_len` values and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn mm_certify_json(
    name: *const c_char,
    dim: usize,
    params_json: *const c_char,
    resolutions: *const usize,
    resolutions_len: usize,
    out_json: *mut *mut c_char,
) -> MmStatus {
    guard(|| {
        let name = unsafe { string(name, "name") }?;
        let params: CertifyParams = if params_json.is_null() {
            CertifyParams::default()
        } else {
            serde_json::from_str(unsafe { string(params_json, "params_json") }?)?
        };
        let res = if resolutions_len == 0 {
            default_resolutions(dim)
        } else if resolutions.is_null() {
            return Err(null("resolutions"));
        } else {
            // SAFETY: the caller guarantees `resolutions_len` readable values.
            unsafe { std::slice::from_raw_parts(resolutions, resolutions_len) }.to_vec()
        };
        let mut corpus_cfg = CorpusConfig::standard(dim, &params.p_for(dim)?);
        corpus_cfg.seed = params.seed;
        let corpus = build_corpus(&corpus_cfg)?;
        let report = certify_inequality(name, &params, &corpus, &res)?;
        let text = CString::new(serde_json::to_string(&report)?).map_err(|e| invalid(e.to_string()))?;
        unsafe { put(out_json, text.into_raw(), "out_json") }
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string from [`mm_certify_json`] that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn mm_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: the string was produced by `CString::into_raw`.
        drop(unsafe { CString::from_raw(s) });
    }
}
