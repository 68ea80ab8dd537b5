//! C ABI over `sketchls`.
//!
//! Matrices and solve traces are opaque handles created and freed through
//! this interface. Every fallible call returns an [`SlsStatus`]; on failure
//! [`sls_last_error`] describes the most recent error on the calling thread.
//! Panics are caught at the boundary and reported as `SLS_STATUS_PANIC`.
//!
//! Matrices are passed row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use sketchls::linalg::DenseMatrix;
use sketchls::precond::{self, LambdaRule};
use sketchls::sketch::{self, Rng, SketchKind};
use sketchls::solvers::{self, SolveOptions, SolveTrace};
use sketchls::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlsStatus {
    Ok = 0,
    NullPointer = 1,
    DimensionMismatch = 2,
    NonFinite = 3,
    NotPositiveDefinite = 4,
    SingularMatrix = 5,
    RankDeficient = 6,
    NotPowerOfTwo = 7,
    BadSubsampleSize = 8,
    HypothesisViolated = 9,
    ZeroDirection = 10,
    EmptyInput = 11,
    InvalidArgument = 12,
    BufferTooSmall = 13,
    Panic = 99,
}

/// Random sketch used by the iterative Hessian sketch.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlsSketch {
    Srht = 0,
    Leverage = 1,
    Uniform = 2,
}

/// How `sls_lambda_rule` chooses the ridge parameter.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlsLambdaRule {
    /// `0.1 · Σ‖x_i‖²`.
    Concentrated = 0,
    /// `0.4 · Σ‖x_i‖²`.
    HeavyTailed = 1,
    /// `value · Σ‖x_i‖²`.
    Proportion = 2,
}

/// Opaque dense matrix.
pub struct SlsMatrix {
    inner: DenseMatrix,
}

/// Opaque record of an iterative solve.
pub struct SlsTrace {
    inner: SolveTrace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SlsStatus {
    match e.root() {
        Error::DimensionMismatch { .. } => SlsStatus::DimensionMismatch,
        Error::NonFinite { .. } => SlsStatus::NonFinite,
        Error::NotPositiveDefinite { .. } => SlsStatus::NotPositiveDefinite,
        Error::SingularMatrix => SlsStatus::SingularMatrix,
        Error::RankDeficient { .. } => SlsStatus::RankDeficient,
        Error::NotPowerOfTwo(_) => SlsStatus::NotPowerOfTwo,
        Error::NotEnoughRows { .. } | Error::BadSubsampleSize { .. } => SlsStatus::BadSubsampleSize,
        Error::HypothesisViolated { .. } => SlsStatus::HypothesisViolated,
        Error::ZeroDirection => SlsStatus::ZeroDirection,
        Error::EmptyInput => SlsStatus::EmptyInput,
        Error::InvalidArgument(_) | Error::AtIteration { .. } => SlsStatus::InvalidArgument,
    }
}

struct Failure(SlsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SlsStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SlsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SlsStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("panic: {message}"));
            SlsStatus::Panic
        }
    }
}

unsafe fn matrix_ref<'a>(m: *const SlsMatrix) -> Result<&'a DenseMatrix, Failure> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null("matrix"))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, needed: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len < needed {
        return Err(Failure(
            SlsStatus::BufferTooSmall,
            format!("{what} holds {len} values, {needed} needed"),
        ));
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, needed))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sls_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version contains a nul byte"),
    };
    VERSION.as_ptr()
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn sls_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `rows × cols` row-major values into a new matrix.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sls_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut SlsMatrix,
) -> SlsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Failure(SlsStatus::InvalidArgument, "matrix size overflows".into()))?;
        let values = input(data, len, "data")?.to_vec();
        let inner = DenseMatrix::new(rows, cols, values)?;
        *out = Box::into_raw(Box::new(SlsMatrix { inner }));
        Ok(())
    })
}

/// Releases a matrix; null is ignored.
///
/// # Safety
/// `m` must come from `sls_matrix_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sls_matrix_free(m: *mut SlsMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live matrix handle or null.
#[no_mangle]
pub unsafe extern "C" fn sls_matrix_rows(m: *const SlsMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.rows())
}

/// # Safety
/// `m` must be a live matrix handle or null.
#[no_mangle]
pub unsafe extern "C" fn sls_matrix_cols(m: *const SlsMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.cols())
}

/// Full least-squares solution into `beta_out` (length at least `cols`).
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn sls_full_ls(
    x: *const SlsMatrix,
    y: *const f64,
    y_len: usize,
    beta_out: *mut f64,
    beta_len: usize,
) -> SlsStatus {
    guard(|| {
        let x = matrix_ref(x)?;
        let y = input(y, y_len, "y")?;
        let beta = solvers::full_ls(x, y)?;
        output(beta_out, beta_len, beta.len(), "beta_out")?.copy_from_slice(&beta);
        Ok(())
    })
}

/// Indices (ascending) of the `m` rows of largest norm.
///
/// # Safety
/// `indices_out` must hold at least `m` values.
#[no_mangle]
pub unsafe extern "C" fn sls_aopt_select(
    x: *const SlsMatrix,
    m: usize,
    indices_out: *mut usize,
    indices_len: usize,
) -> SlsStatus {
    guard(|| {
        let x = matrix_ref(x)?;
        let mask = sketch::aopt_select(x, m)?;
        output(indices_out, indices_len, m, "indices_out")?.copy_from_slice(mask.selected());
        Ok(())
    })
}

/// Ridge parameter for `x`. `value` is the proportion for
/// `SLS_LAMBDA_RULE_PROPORTION` and ignored otherwise.
///
/// # Safety
/// `lambda_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sls_lambda_rule(
    x: *const SlsMatrix,
    rule: SlsLambdaRule,
    value: f64,
    lambda_out: *mut f64,
) -> SlsStatus {
    guard(|| {
        let x = matrix_ref(x)?;
        let rule = match rule {
            SlsLambdaRule::Concentrated => LambdaRule::Concentrated,
            SlsLambdaRule::HeavyTailed => LambdaRule::HeavyTailed,
            SlsLambdaRule::Proportion => LambdaRule::Proportion(value),
        };
        let out = lambda_out.as_mut().ok_or_else(|| null("lambda_out"))?;
        *out = precond::lambda_rule(x, rule);
        Ok(())
    })
}

/// Conditioning improvement `1 − κ(M⁻¹XᵀX)/κ(XᵀX)` of the ridged
/// largest-norm preconditioner with `m` rows and ridge `lambda`.
///
/// # Safety
/// `delta_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sls_delta(x: *const SlsMatrix, m: usize, lambda: f64, delta_out: *mut f64) -> SlsStatus {
    guard(|| {
        let x = matrix_ref(x)?;
        let mask = sketch::aopt_select(x, m)?;
        let pre = precond::build_m(x, &mask, lambda)?;
        let q = sketchls::linalg::gram(x);
        let out = delta_out.as_mut().ok_or_else(|| null("delta_out"))?;
        *out = precond::delta_measure(&pre, &q)?;
        Ok(())
    })
}

unsafe fn finish_solve(
    x: &DenseMatrix,
    y: &[f64],
    out: *mut *mut SlsTrace,
    solve: impl FnOnce(&SolveOptions) -> sketchls::Result<SolveTrace>,
) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    let opts = SolveOptions::with_reference(solvers::full_ls(x, y)?);
    let inner = solve(&opts)?;
    *out = Box::into_raw(Box::new(SlsTrace { inner }));
    Ok(())
}

/// A-optimal IHS: largest-norm initializer, ridged preconditioner, exact
/// line search. The trace records distances to the full least-squares
/// solution.
///
/// # Safety
/// Pointers must be valid; `out` receives a handle to free with
/// `sls_trace_free`.
#[no_mangle]
pub unsafe extern "C" fn sls_aopt_ihs_solve(
    x: *const SlsMatrix,
    y: *const f64,
    y_len: usize,
    m: usize,
    n_iter: usize,
    lambda: f64,
    out: *mut *mut SlsTrace,
) -> SlsStatus {
    guard(|| {
        let x = matrix_ref(x)?;
        let y = input(y, y_len, "y")?;
        finish_solve(x, y, out, |opts| solvers::aopt_ihs_solve(x, y, m, n_iter, lambda, opts))
    })
}

/// Iterative Hessian sketch from zero with a fresh sketch per iteration.
///
/// # Safety
/// Pointers must be valid; `out` receives a handle to free with
/// `sls_trace_free`.
#[no_mangle]
pub unsafe extern "C" fn sls_ihs_solve(
    x: *const SlsMatrix,
    y: *const f64,
    y_len: usize,
    m: usize,
    n_iter: usize,
    kind: SlsSketch,
    seed: u64,
    out: *mut *mut SlsTrace,
) -> SlsStatus {
    guard(|| {
        let x = matrix_ref(x)?;
        let y = input(y, y_len, "y")?;
        let kind = match kind {
            SlsSketch::Srht => SketchKind::Srht,
            SlsSketch::Leverage => SketchKind::Leverage,
            SlsSketch::Uniform => SketchKind::Uniform,
        };
        let mut rng = Rng::new(seed);
        let beta0 = vec![0.0; x.cols()];
        finish_solve(x, y, out, |opts| {
            solvers::ihs_solve(x, y, m, n_iter, kind, &mut rng, &beta0, opts)
        })
    })
}

/// Releases a trace; null is ignored.
///
/// # Safety
/// `t` must come from a solve call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sls_trace_free(t: *mut SlsTrace) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Iterations performed; the trace holds `iterations + 1` estimates.
///
/// # Safety
/// `t` must be a live trace handle or null.
#[no_mangle]
pub unsafe extern "C" fn sls_trace_iterations(t: *const SlsTrace) -> usize {
    t.as_ref().map_or(0, |t| t.inner.iterations())
}

/// Coefficient dimension of the trace's estimates.
///
/// # Safety
/// `t` must be a live trace handle or null.
#[no_mangle]
pub unsafe extern "C" fn sls_trace_dim(t: *const SlsTrace) -> usize {
    t.as_ref().map_or(0, |t| t.inner.final_beta().len())
}

/// Copies estimate `iter` (0 is the initializer).
///
/// # Safety
/// `beta_out` must hold at least `sls_trace_dim(t)` values.
#[no_mangle]
pub unsafe extern "C" fn sls_trace_beta(
    t: *const SlsTrace,
    iter: usize,
    beta_out: *mut f64,
    beta_len: usize,
) -> SlsStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("trace"))?;
        let beta = t.inner.betas.get(iter).ok_or_else(|| {
            Failure(
                SlsStatus::InvalidArgument,
                format!("iteration {iter} beyond {}", t.inner.iterations()),
            )
        })?;
        output(beta_out, beta_len, beta.len(), "beta_out")?.copy_from_slice(beta);
        Ok(())
    })
}

/// Step length of iteration `iter` (1-based); unit-step methods report 1.
///
/// # Safety
/// `alpha_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sls_trace_alpha(t: *const SlsTrace, iter: usize, alpha_out: *mut f64) -> SlsStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("trace"))?;
        if iter == 0 || iter > t.inner.iterations() {
            return Err(Failure(
                SlsStatus::InvalidArgument,
                format!("iteration {iter} outside 1..={}", t.inner.iterations()),
            ));
        }
        let out = alpha_out.as_mut().ok_or_else(|| null("alpha_out"))?;
        *out = t.inner.alphas.get(iter - 1).copied().unwrap_or(1.0);
        Ok(())
    })
}

/// `½‖Xβ_t − y‖²` and `‖β_t − β^LS‖₂` at estimate `iter`.
///
/// # Safety
/// Output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sls_trace_errors(
    t: *const SlsTrace,
    iter: usize,
    objective_out: *mut f64,
    dist_out: *mut f64,
) -> SlsStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("trace"))?;
        let (Some(f), Some(e)) = (t.inner.objective.get(iter), t.inner.dist_to_ls.get(iter)) else {
            return Err(Failure(
                SlsStatus::InvalidArgument,
                format!("iteration {iter} beyond {}", t.inner.iterations()),
            ));
        };
        *objective_out.as_mut().ok_or_else(|| null("objective_out"))? = *f;
        *dist_out.as_mut().ok_or_else(|| null("dist_out"))? = *e;
        Ok(())
    })
}
