//! C ABI for `vgarrote`.
//!
//! Models are opaque handles created by [`vg_fit`] and released with
//! [`vg_model_free`]. Every fallible call returns a [`VgStatus`]; on failure
//! [`vg_last_error`] describes the most recent error on the calling thread.
//! Matrices are row-major, one sample per row.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::{DMatrix, DVector};
use vgarrote::annealing::DEFAULT_EPSILON;
use vgarrote::orthogonal::{bistable_gamma_range, gamma_star, rho_star};
use vgarrote::solver::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use vgarrote::{fit, Dataset, FitOptions, FitResult, SolverKind, VgError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidData = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VgSolver {
    Auto = 0,
    Primal = 1,
    Dual = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VgFitOptions {
    pub solver: VgSolver,
    pub epsilon: f64,
    pub tol: f64,
    pub max_iter: usize,
}

/// A fitted model.
pub struct VgModel {
    fit: FitResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn status_of(err: &VgError) -> VgStatus {
    match err {
        VgError::InvalidArgument(_) => VgStatus::InvalidArgument,
        VgError::Singular { .. } | VgError::NotPositiveDefinite(_) => VgStatus::Numerical,
        VgError::InvalidData(_) | VgError::Dimension(_) | VgError::Parse(_) | VgError::Io(_) => VgStatus::InvalidData,
    }
}

/// Runs `body`, turning errors and panics into a status and recording the
/// message.
fn guard(body: impl FnOnce() -> Result<(), (VgStatus, String)>) -> VgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            VgStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            VgStatus::Panic
        }
    }
}

fn lib_err(e: VgError) -> (VgStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (VgStatus, String) {
    (VgStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `ptr` must be null or point to `len` readable doubles.
unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], (VgStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// # Safety
/// As for [`slice`], with `rows * cols` doubles for `x` and `rows` for `y`.
unsafe fn dataset(x: *const f64, y: *const f64, rows: usize, cols: usize, held_out: bool) -> Result<Dataset, (VgStatus, String)> {
    let len = rows.checked_mul(cols).ok_or((VgStatus::InvalidArgument, "matrix size overflows".into()))?;
    let xs = slice(x, len, "x")?;
    let ys = slice(y, rows, "y")?;
    let xm = DMatrix::from_row_slice(rows, cols, xs);
    let yv = DVector::from_column_slice(ys);
    if held_out { Dataset::held_out(xm, yv) } else { Dataset::new(xm, yv) }.map_err(lib_err)
}

/// Text of the last error on this thread, empty after a successful call.
/// Valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn vg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn vg_fit_options_default() -> VgFitOptions {
    VgFitOptions { solver: VgSolver::Auto, epsilon: DEFAULT_EPSILON, tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER }
}

/// Fits a model on `p_train` training rows, choosing `gamma` on `p_val`
/// validation rows. `opts` may be null for defaults. On success `*out`
/// owns a new model.
///
/// # Safety
/// Array arguments must hold `rows * n_features` (inputs) or `rows`
/// (outputs) doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vg_fit(
    x_train: *const f64,
    y_train: *const f64,
    p_train: usize,
    x_val: *const f64,
    y_val: *const f64,
    p_val: usize,
    n_features: usize,
    opts: *const VgFitOptions,
    out: *mut *mut VgModel,
) -> VgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let train = dataset(x_train, y_train, p_train, n_features, false)?;
        let val = dataset(x_val, y_val, p_val, n_features, true)?;
        let o = if opts.is_null() { vg_fit_options_default() } else { *opts };
        let mut fit_opts = FitOptions { epsilon: o.epsilon, ..FitOptions::default() };
        fit_opts.path.solver = match o.solver {
            VgSolver::Auto => SolverKind::Auto,
            VgSolver::Primal => SolverKind::Primal,
            VgSolver::Dual => SolverKind::Dual,
        };
        fit_opts.path.solve.tol = o.tol;
        fit_opts.path.solve.max_iter = o.max_iter;
        fit_opts.path.solve.validate().map_err(lib_err)?;
        let fit = fit(&train, &val, &fit_opts).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(VgModel { fit }));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or come from [`vg_fit`] and not be freed already.
#[no_mangle]
pub unsafe extern "C" fn vg_model_free(model: *mut VgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Predicts `rows` outputs into `out`.
///
/// # Safety
/// `x` must hold `rows * n_features` doubles and `out` room for `rows`.
#[no_mangle]
pub unsafe extern "C" fn vg_predict(
    model: *const VgModel,
    x: *const f64,
    rows: usize,
    n_features: usize,
    out: *mut f64,
) -> VgStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if rows > 0 && out.is_null() {
            return Err(null("out"));
        }
        let len = rows.checked_mul(n_features).ok_or((VgStatus::InvalidArgument, "matrix size overflows".into()))?;
        let xm = DMatrix::from_row_slice(rows, n_features, slice(x, len, "x")?);
        let pred = model.fit.predict(&xm).map_err(lib_err)?;
        if rows > 0 {
            std::slice::from_raw_parts_mut(out, rows).copy_from_slice(pred.as_slice());
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be a live model or null.
#[no_mangle]
pub unsafe extern "C" fn vg_model_num_features(model: *const VgModel, out: *mut usize) -> VgStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = model.fit.best.m.len();
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VgVector {
    /// Selector means `m`.
    Inclusion = 0,
    /// Weights `w`.
    Weights = 1,
    /// Effective coefficients `m ∘ w`.
    Coefficients = 2,
}

/// Copies one per-feature vector into `out`, which must hold `len ≥ n`
/// doubles.
///
/// # Safety
/// `model` must be a live model; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn vg_model_vector(model: *const VgModel, which: VgVector, out: *mut f64, len: usize) -> VgStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let best = &model.fit.best;
        let v = match which {
            VgVector::Inclusion => best.m.clone(),
            VgVector::Weights => best.w.clone(),
            VgVector::Coefficients => best.v(),
        };
        if len < v.len() {
            return Err((VgStatus::BufferTooSmall, format!("buffer holds {len}, need {}", v.len())));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        std::slice::from_raw_parts_mut(out, v.len()).copy_from_slice(v.as_slice());
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VgModelSummary {
    pub gamma: f64,
    pub beta: f64,
    pub free_energy: f64,
    pub intercept: f64,
    pub nonzero: usize,
    pub converged: bool,
}

/// # Safety
/// `model` must be a live model; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vg_model_summary(model: *const VgModel, out: *mut VgModelSummary) -> VgStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let best = &model.fit.best;
        *out = VgModelSummary {
            gamma: best.gamma,
            beta: best.beta,
            free_energy: best.free_energy,
            intercept: model.fit.y_mean - model.fit.x_mean.dot(&best.v()),
            nonzero: best.nonzero(),
            converged: best.converged,
        };
        Ok(())
    })
}

/// Correlation above which the univariate problem can be bistable.
#[no_mangle]
pub extern "C" fn vg_rho_star(p: usize, delta: f64) -> f64 {
    rho_star(p, delta)
}

/// `gamma` of the univariate critical point.
#[no_mangle]
pub extern "C" fn vg_gamma_star(p: usize, delta: f64) -> f64 {
    gamma_star(p, delta)
}

/// Bounds of the `gamma` interval with two stable univariate solutions.
///
/// # Safety
/// `lower` and `upper` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vg_bistable_gamma_range(rho: f64, p: usize, delta: f64, lower: *mut f64, upper: *mut f64) -> VgStatus {
    guard(|| {
        let lower = lower.as_mut().ok_or_else(|| null("lower"))?;
        let upper = upper.as_mut().ok_or_else(|| null("upper"))?;
        let (lo, hi) = bistable_gamma_range(rho, p, delta).map_err(lib_err)?;
        *lower = lo;
        *upper = hi;
        Ok(())
    })
}
