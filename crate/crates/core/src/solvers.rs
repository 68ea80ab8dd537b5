//! Least-squares estimators and iterative sketch solvers.
//!
//! * one-shot estimators: full least squares, classical sketch (CS),
//!   Hessian sketch (HS) and the A-optimal classical sketch;
//! * iterative schemes: the iterative Hessian sketch with a fresh sketch per
//!   step, the frozen-sketch unit-step variant (pwGradient baseline), the
//!   preconditioned conjugate-gradient variant (acc-IHS baseline), and the
//!   A-optimal IHS, a fixed ridged preconditioner with exact line search;
//! * oracles: the closed-form IHS trajectory and the isometry-based
//!   geometric error bound.
//!
//! `Xᵀy` and all residual products use the unpadded `X`; zero padding only
//! exists inside the SRHT.

use std::time::Instant;

use crate::error::{check_len, Error, Result};
use crate::linalg::{self, axpy, dist2, dot, norm2, CholeskyFactor, DenseMatrix};
use crate::precond::{self, Preconditioner};
use crate::sketch::{self, Rng, SketchKind, SubsampleMask};

/// `‖p‖₂` at or below this is treated as a zero search direction.
pub const ZERO_DIRECTION_NORM: f64 = 1e-300;

/// A unit-step run is flagged divergent once the normal-equation residual
/// exceeds this multiple of its running minimum.
pub const DIVERGENCE_GROWTH: f64 = 10.0;

/// Growth is ignored while the residual sits below this fraction of its first
/// value; at that level it is rounding noise, not divergence.
const DIVERGENCE_FLOOR: f64 = 1e-8;

/// Default precision for "iterations to precision" in `‖β̂_t − β̂^LS‖₂`.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default iteration cap for runs driven by a precision target.
pub const DEFAULT_ITER_CAP: usize = 500;

/// How an iterative run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// All requested iterations were performed.
    Completed,
    /// The gradient vanished or the step fell below the early-stopping
    /// tolerance; the trace is truncated there.
    Converged,
    /// `‖β̂_t − β̂^LS‖₂` fell to the requested target.
    ReachedTarget,
    /// The residual blew up; the trace ends at the first flagged iterate.
    Diverged,
}

impl SolveStatus {
    pub fn is_failure(self) -> bool {
        self == SolveStatus::Diverged
    }
}

/// Per-iteration record of an iterative solve.
#[derive(Debug, Clone)]
pub struct SolveTrace {
    /// `β̂_0 … β̂_N`.
    pub betas: Vec<Vec<f64>>,
    /// Step lengths `α_1 … α_N`; empty for unit-step methods.
    pub alphas: Vec<f64>,
    /// `f(β̂_t) = ½‖Xβ̂_t − y‖²`, when objective tracking is on.
    pub objective: Vec<f64>,
    /// `‖β̂_t − β̂^LS‖₂`, when a reference solution was supplied.
    pub dist_to_ls: Vec<f64>,
    /// Wall-clock seconds spent before the first iteration (sketching,
    /// initialization, preconditioner factorization).
    pub setup_seconds: f64,
    /// Wall-clock seconds spent in each iteration.
    pub elapsed: Vec<f64>,
    pub status: SolveStatus,
    /// Sketched matrices `S_t X`, when recording was requested.
    pub sketches: Vec<DenseMatrix>,
}

impl SolveTrace {
    /// Number of iterations actually performed.
    pub fn iterations(&self) -> usize {
        self.betas.len() - 1
    }

    pub fn final_beta(&self) -> &[f64] {
        self.betas.last().expect("trace holds β̂_0")
    }

    /// Setup plus the first `t` iterations, in seconds.
    pub fn seconds_through(&self, t: usize) -> f64 {
        self.setup_seconds + self.elapsed.iter().take(t).sum::<f64>()
    }

    /// First iteration whose distance to `β̂^LS` is within `tol`.
    pub fn first_within(&self, tol: f64) -> Option<usize> {
        self.dist_to_ls.iter().position(|&e| e <= tol)
    }
}

/// Options shared by the iterative solvers.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Reference solution; fills `dist_to_ls` and enables `target`.
    pub beta_ls: Option<Vec<f64>>,
    /// Stop once `‖β̂_t − β̂^LS‖₂ ≤ target` (needs `beta_ls`).
    pub target: Option<f64>,
    /// Stop once `‖β̂_t − β̂_{t−1}‖₂ ≤ step_tol`; zero disables.
    pub step_tol: f64,
    /// Record `f(β̂_t)` each iteration (one extra `O(nd)` pass).
    pub track_objective: bool,
    /// Keep each `S_t X` in the trace.
    pub record_sketches: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            beta_ls: None,
            target: None,
            step_tol: 0.0,
            track_objective: true,
            record_sketches: false,
        }
    }
}

impl SolveOptions {
    pub fn with_reference(beta_ls: Vec<f64>) -> Self {
        Self {
            beta_ls: Some(beta_ls),
            ..Self::default()
        }
    }
}

/// `f(β) = ½‖Xβ − y‖²`.
pub fn objective(x: &DenseMatrix, y: &[f64], beta: &[f64]) -> f64 {
    0.5 * x
        .iter_rows()
        .zip(y)
        .map(|(r, yi)| {
            let e = dot(r, beta) - yi;
            e * e
        })
        .sum::<f64>()
}

/// `Xᵀ(y − Xβ) = −∇f(β)`.
pub fn neg_gradient(x: &DenseMatrix, y: &[f64], beta: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; x.cols()];
    for (r, yi) in x.iter_rows().zip(y) {
        axpy(yi - dot(r, beta), r, &mut v);
    }
    v
}

struct Recorder<'a> {
    x: &'a DenseMatrix,
    y: &'a [f64],
    opts: &'a SolveOptions,
    trace: SolveTrace,
    clock: Instant,
}

impl<'a> Recorder<'a> {
    fn start(x: &'a DenseMatrix, y: &'a [f64], opts: &'a SolveOptions) -> Self {
        Self {
            x,
            y,
            opts,
            trace: SolveTrace {
                betas: Vec::new(),
                alphas: Vec::new(),
                objective: Vec::new(),
                dist_to_ls: Vec::new(),
                setup_seconds: 0.0,
                elapsed: Vec::new(),
                status: SolveStatus::Completed,
                sketches: Vec::new(),
            },
            clock: Instant::now(),
        }
    }

    /// Records `β̂_0` and closes the setup phase.
    fn initial(&mut self, beta: &[f64]) -> bool {
        self.trace.setup_seconds = self.clock.elapsed().as_secs_f64();
        self.record(beta)
    }

    /// Records `β̂_t`; returns true when the run should stop at the target.
    fn push(&mut self, beta: &[f64]) -> bool {
        // the iteration's time ends before bookkeeping passes
        self.trace.elapsed.push(self.clock.elapsed().as_secs_f64());
        self.record(beta)
    }

    fn record(&mut self, beta: &[f64]) -> bool {
        self.trace.betas.push(beta.to_vec());
        if self.opts.track_objective {
            self.trace.objective.push(objective(self.x, self.y, beta));
        }
        let mut hit = false;
        if let Some(ls) = &self.opts.beta_ls {
            let e = dist2(beta, ls);
            self.trace.dist_to_ls.push(e);
            hit = self.opts.target.is_some_and(|tol| e <= tol);
        }
        self.clock = Instant::now();
        hit
    }

    fn sketch(&mut self, sx: &DenseMatrix) {
        if self.opts.record_sketches {
            self.trace.sketches.push(sx.clone());
        }
    }

    fn finish(mut self, status: SolveStatus) -> SolveTrace {
        self.trace.status = status;
        self.trace
    }
}

/// Tracks the normal-equation residual of unit-step methods.
struct DivergenceGuard {
    first: Option<f64>,
    min: f64,
}

impl DivergenceGuard {
    fn new() -> Self {
        Self {
            first: None,
            min: f64::INFINITY,
        }
    }

    fn diverged(&mut self, residual: f64) -> bool {
        if !residual.is_finite() {
            return true;
        }
        let first = *self.first.get_or_insert(residual);
        self.min = self.min.min(residual);
        residual > DIVERGENCE_GROWTH * self.min && residual > DIVERGENCE_FLOOR * first
    }
}

/// `β̂^LS = (XᵀX)⁻¹Xᵀy` via Cholesky of the Gram matrix.
pub fn full_ls(x: &DenseMatrix, y: &[f64]) -> Result<Vec<f64>> {
    check_len("full_ls response", x.rows(), y.len())?;
    let fac = linalg::cholesky(&linalg::gram(x))?;
    fac.solve(&x.tmatvec(y)?)
}

/// Classical sketch: least squares of `Sy` on `SX`.
pub fn cs_estimate(sx: &DenseMatrix, sy: &[f64]) -> Result<Vec<f64>> {
    full_ls(sx, sy)
}

/// Hessian sketch: `((SX)ᵀSX)⁻¹ Xᵀy`.
pub fn hs_estimate(sx: &DenseMatrix, xty: &[f64]) -> Result<Vec<f64>> {
    check_len("hs_estimate gradient", sx.cols(), xty.len())?;
    linalg::cholesky(&linalg::gram(sx))?.solve(xty)
}

/// A-optimal classical sketch: least squares on the `m` rows of largest
/// norm. Returns the mask too, so it can be recycled for the preconditioner.
pub fn aopt_cs_estimate(x: &DenseMatrix, y: &[f64], m: usize) -> Result<(Vec<f64>, SubsampleMask)> {
    check_len("aopt_cs_estimate response", x.rows(), y.len())?;
    let mask = sketch::aopt_select(x, m)?;
    let beta = masked_ls(x, y, &mask)?;
    Ok((beta, mask))
}

/// Least squares restricted to the rows selected by `mask`; the `1/m`
/// weights cancel.
pub fn masked_ls(x: &DenseMatrix, y: &[f64], mask: &SubsampleMask) -> Result<Vec<f64>> {
    let g = precond::masked_gram(x, mask)?;
    let mut b = vec![0.0; x.cols()];
    for &i in mask.selected() {
        axpy(y[i], x.row(i), &mut b);
    }
    linalg::cholesky(&g)?.solve(&b)
}

fn check_problem(x: &DenseMatrix, y: &[f64], beta0: &[f64]) -> Result<()> {
    check_len("response", x.rows(), y.len())?;
    check_len("initial estimate", x.cols(), beta0.len())
}

/// Iterative Hessian sketch: a fresh sketch `S_t` every iteration and the
/// unit-step update `β̂_t = β̂_{t−1} + (XᵀS_tᵀS_tX)⁻¹Xᵀ(y − Xβ̂_{t−1})`.
#[allow(clippy::too_many_arguments)]
pub fn ihs_solve(
    x: &DenseMatrix,
    y: &[f64],
    m: usize,
    n_iter: usize,
    kind: SketchKind,
    rng: &mut Rng,
    beta0: &[f64],
    opts: &SolveOptions,
) -> Result<SolveTrace> {
    check_problem(x, y, beta0)?;
    let mut rec = Recorder::start(x, y, opts);
    let scores = match kind {
        SketchKind::Leverage => Some(sketch::leverage_scores(x)?),
        _ => None,
    };
    let mut beta = beta0.to_vec();
    if rec.initial(&beta) {
        return Ok(rec.finish(SolveStatus::ReachedTarget));
    }
    let mut guard = DivergenceGuard::new();
    for t in 1..=n_iter {
        let sx = match &scores {
            Some(h) => sketch::leverage_sample_with_scores(x, None, h, m, rng),
            None => sketch::draw(kind, x, None, m, rng),
        }
        .map_err(|e| e.at_iteration(t))?
        .0;
        rec.sketch(&sx);
        let fac = linalg::cholesky(&linalg::gram(&sx)).map_err(|e| e.at_iteration(t))?;
        let v = neg_gradient(x, y, &beta);
        if guard.diverged(norm2(&v)) {
            return Ok(rec.finish(SolveStatus::Diverged));
        }
        let step = fac.solve(&v)?;
        axpy(1.0, &step, &mut beta);
        if rec.push(&beta) {
            return Ok(rec.finish(SolveStatus::ReachedTarget));
        }
        if opts.step_tol > 0.0 && norm2(&step) <= opts.step_tol {
            return Ok(rec.finish(SolveStatus::Converged));
        }
    }
    Ok(rec.finish(SolveStatus::Completed))
}

/// Unit-step iterations `β̂_t = β̂_{t−1} + M⁻¹Xᵀ(y − Xβ̂_{t−1})` with a fixed
/// preconditioner factor.
fn fixed_unit_steps(
    x: &DenseMatrix,
    y: &[f64],
    fac: &CholeskyFactor,
    n_iter: usize,
    beta0: &[f64],
    mut rec: Recorder<'_>,
) -> Result<SolveTrace> {
    let mut beta = beta0.to_vec();
    if rec.initial(&beta) {
        return Ok(rec.finish(SolveStatus::ReachedTarget));
    }
    let mut guard = DivergenceGuard::new();
    for _ in 1..=n_iter {
        let v = neg_gradient(x, y, &beta);
        if guard.diverged(norm2(&v)) {
            return Ok(rec.finish(SolveStatus::Diverged));
        }
        let step = fac.solve(&v)?;
        axpy(1.0, &step, &mut beta);
        if rec.push(&beta) {
            return Ok(rec.finish(SolveStatus::ReachedTarget));
        }
        if rec.opts.step_tol > 0.0 && norm2(&step) <= rec.opts.step_tol {
            return Ok(rec.finish(SolveStatus::Converged));
        }
    }
    Ok(rec.finish(SolveStatus::Completed))
}

/// pwGradient baseline: the IHS recursion with one frozen sketch `S_1` and
/// unit steps. Divergence is reported through [`SolveStatus::Diverged`].
#[allow(clippy::too_many_arguments)]
pub fn pw_gradient_solve(
    x: &DenseMatrix,
    y: &[f64],
    m: usize,
    n_iter: usize,
    kind: SketchKind,
    rng: &mut Rng,
    beta0: &[f64],
    opts: &SolveOptions,
) -> Result<SolveTrace> {
    check_problem(x, y, beta0)?;
    let mut rec = Recorder::start(x, y, opts);
    let (sx, _) = sketch::draw(kind, x, None, m, rng)?;
    rec.sketch(&sx);
    let fac = linalg::cholesky(&linalg::gram(&sx))?;
    fixed_unit_steps(x, y, &fac, n_iter, beta0, rec)
}

/// acc-IHS baseline (reconstructed): preconditioned conjugate gradient on
/// `XᵀXβ = Xᵀy` with the fixed preconditioner `M = (SX)ᵀ(SX)`, Polak–Ribière
/// update. Equivalent to CG in the transformed parameter `η = M^{1/2}β`.
#[allow(clippy::too_many_arguments)]
pub fn acc_ihs_solve(
    x: &DenseMatrix,
    y: &[f64],
    m: usize,
    n_iter: usize,
    kind: SketchKind,
    rng: &mut Rng,
    beta0: &[f64],
    opts: &SolveOptions,
) -> Result<SolveTrace> {
    check_problem(x, y, beta0)?;
    let mut rec = Recorder::start(x, y, opts);
    let (sx, _) = sketch::draw(kind, x, None, m, rng)?;
    rec.sketch(&sx);
    let precond = Preconditioner::from_matrix(linalg::gram(&sx))?;
    pcg_normal_equations(x, y, &precond, n_iter, beta0, rec)
}

fn pcg_normal_equations(
    x: &DenseMatrix,
    y: &[f64],
    precond: &Preconditioner,
    n_iter: usize,
    beta0: &[f64],
    mut rec: Recorder<'_>,
) -> Result<SolveTrace> {
    let mut beta = beta0.to_vec();
    if rec.initial(&beta) {
        return Ok(rec.finish(SolveStatus::ReachedTarget));
    }
    let mut r = neg_gradient(x, y, &beta);
    let mut z = precond.apply_inverse(&r)?;
    let mut dir = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 1..=n_iter {
        let xp = x.matvec(&dir)?;
        let curvature = dot(&xp, &xp);
        if curvature.sqrt() <= ZERO_DIRECTION_NORM || rz == 0.0 {
            return Ok(rec.finish(SolveStatus::Converged));
        }
        let alpha = rz / curvature;
        axpy(alpha, &dir, &mut beta);
        let q = x.tmatvec(&xp)?;
        axpy(-alpha, &q, &mut r);
        rec.trace.alphas.push(alpha);
        if rec.push(&beta) {
            return Ok(rec.finish(SolveStatus::ReachedTarget));
        }
        if rec.opts.step_tol > 0.0 && alpha.abs() * norm2(&dir) <= rec.opts.step_tol {
            return Ok(rec.finish(SolveStatus::Converged));
        }
        let z_new = precond.apply_inverse(&r)?;
        // Polak–Ribière: (r_new − r_old)ᵀ z_new / r_oldᵀ z_old, with the
        // difference formed from the recurrence q
        let rz_new = dot(&r, &z_new);
        let pr = -alpha * dot(&q, &z_new) / rz;
        for (d, zi) in dir.iter_mut().zip(&z_new) {
            *d = zi + pr * *d;
        }
        z = z_new;
        rz = rz_new;
    }
    let _ = z;
    Ok(rec.finish(SolveStatus::Completed))
}

/// Exact line-search step `α = vᵀu / pᵀp` for the quadratic objective along
/// `u`, where `v = −∇f`, `u = M⁻¹v` and `p = Xu`.
pub fn exact_alpha(v: &[f64], u: &[f64], p: &[f64]) -> Result<f64> {
    check_len("exact_alpha direction", v.len(), u.len())?;
    let pp = dot(p, p);
    if pp.sqrt() <= ZERO_DIRECTION_NORM {
        return Err(Error::ZeroDirection);
    }
    Ok(dot(v, u) / pp)
}

/// Fixed-preconditioner first-order iterations with exact line search:
/// `v_t = Xᵀ(y − Xβ̂_{t−1})`, `u_t = M⁻¹v_t`, `p_t = Xu_t`,
/// `α_t = v_tᵀu_t / p_tᵀp_t`, `β̂_t = β̂_{t−1} + α_t u_t`.
pub fn line_search_solve(
    x: &DenseMatrix,
    y: &[f64],
    precond: &Preconditioner,
    n_iter: usize,
    beta0: &[f64],
    opts: &SolveOptions,
) -> Result<SolveTrace> {
    check_problem(x, y, beta0)?;
    check_len("preconditioner", x.cols(), precond.factor().dim())?;
    let rec = Recorder::start(x, y, opts);
    line_search_steps(x, y, precond, n_iter, beta0, rec)
}

fn line_search_steps(
    x: &DenseMatrix,
    y: &[f64],
    precond: &Preconditioner,
    n_iter: usize,
    beta0: &[f64],
    mut rec: Recorder<'_>,
) -> Result<SolveTrace> {
    let mut beta = beta0.to_vec();
    if rec.initial(&beta) {
        return Ok(rec.finish(SolveStatus::ReachedTarget));
    }
    for _ in 1..=n_iter {
        let v = neg_gradient(x, y, &beta);
        let u = precond.apply_inverse(&v)?;
        let p = x.matvec(&u)?;
        let alpha = match exact_alpha(&v, &u, &p) {
            Ok(a) => a,
            Err(Error::ZeroDirection) => return Ok(rec.finish(SolveStatus::Converged)),
            Err(e) => return Err(e),
        };
        axpy(alpha, &u, &mut beta);
        rec.trace.alphas.push(alpha);
        if rec.push(&beta) {
            return Ok(rec.finish(SolveStatus::ReachedTarget));
        }
        if rec.opts.step_tol > 0.0 && alpha.abs() * norm2(&u) <= rec.opts.step_tol {
            return Ok(rec.finish(SolveStatus::Converged));
        }
    }
    Ok(rec.finish(SolveStatus::Completed))
}

/// A-optimal IHS: initialize with the A-optimal classical sketch, build the
/// ridged preconditioner `M(δ, λ)` once from the same mask, then iterate
/// with exact line search.
pub fn aopt_ihs_solve(
    x: &DenseMatrix,
    y: &[f64],
    m: usize,
    n_iter: usize,
    lambda: f64,
    opts: &SolveOptions,
) -> Result<SolveTrace> {
    check_len("response", x.rows(), y.len())?;
    let rec = Recorder::start(x, y, opts);
    let (beta0, mask) = aopt_cs_estimate(x, y, m)?;
    let precond = precond::build_m(x, &mask, lambda)?;
    line_search_steps(x, y, &precond, n_iter, &beta0, rec)
}

/// Closed-form IHS iterate after the recorded sketches:
/// `β̂_t = Π(I − A_i)β̂_0 + [I − Π(I − A_i)]β̂^LS` with
/// `A_i = ((S_iX)ᵀS_iX)⁻¹XᵀX`. An oracle for [`ihs_solve`], not a
/// production path.
pub fn lemma1_trajectory(x: &DenseMatrix, y: &[f64], beta0: &[f64], sketches: &[DenseMatrix]) -> Result<Vec<f64>> {
    check_problem(x, y, beta0)?;
    let d = x.cols();
    let q = linalg::gram(x);
    let beta_ls = full_ls(x, y)?;
    let mut product = DenseMatrix::identity(d);
    for (i, sx) in sketches.iter().enumerate() {
        check_len("recorded sketch", d, sx.cols())?;
        let fac = linalg::cholesky(&linalg::gram(sx)).map_err(|e| e.at_iteration(i + 1))?;
        // I − M⁻¹Q, one column of Q at a time (Q is symmetric: row j = column j)
        let mut step = DenseMatrix::identity(d);
        for j in 0..d {
            let col = fac.solve(q.row(j))?;
            for (k, v) in col.into_iter().enumerate() {
                step.set(k, j, step.get(k, j) - v);
            }
        }
        product = step.matmul(&product)?;
    }
    let offset: Vec<f64> = beta0.iter().zip(&beta_ls).map(|(a, b)| a - b).collect();
    let mut beta = product.matvec(&offset)?;
    axpy(1.0, &beta_ls, &mut beta);
    Ok(beta)
}

/// Measured subspace-embedding distortion of a sketch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsometryReport {
    /// `‖I_d − UᵀSᵀSU‖₂`.
    pub eps: f64,
    /// `max(0, 1 − λ_min(UᵀSᵀSU))`.
    pub eps1: f64,
    /// `max(0, λ_max(UᵀSᵀSU) − 1)`.
    pub eps2: f64,
    /// `eps1 < 1/2` and `eps2 < 1 − eps1`.
    pub satisfies: bool,
}

/// Spectrum of `G = UᵀSᵀSU` for an orthonormal basis `U` of `col(X)`,
/// computed as the pencil `((SX)ᵀSX, XᵀX)` through the Cholesky factor of
/// `XᵀX`, so `U` is never formed.
pub fn isometry_eps(x: &DenseMatrix, sx: &DenseMatrix) -> Result<IsometryReport> {
    check_len("sketched columns", x.cols(), sx.cols())?;
    let fac = linalg::cholesky(&linalg::gram(x)).map_err(|e| match e {
        Error::NotPositiveDefinite { pivot } => Error::RankDeficient { column: pivot },
        other => other,
    })?;
    let eig = linalg::pencil_eigvals(&linalg::gram(sx), &fac)?;
    let (lo, hi) = (eig[0], eig[eig.len() - 1]);
    let eps1 = (1.0 - lo).max(0.0);
    let eps2 = (hi - 1.0).max(0.0);
    Ok(IsometryReport {
        eps: eps1.max(eps2),
        eps1,
        eps2,
        satisfies: eps1 < 0.5 && eps2 < 1.0 - eps1,
    })
}

/// Geometric bound `(max{ε₁,ε₂}/(1−ε₁))^t · ‖β̂_0 − β̂^LS‖₂`.
///
/// Accepts `ε₁ ∈ [0, 1/2)` and `ε₂ ∈ [0, 1 − ε₁)`: a distortion of exactly
/// zero satisfies the isometry condition for every positive tolerance.
pub fn theorem1_bound(eps1: f64, eps2: f64, t: usize, init_err: f64) -> Result<f64> {
    if !((0.0..0.5).contains(&eps1) && eps2 >= 0.0 && eps2 < 1.0 - eps1) {
        return Err(Error::HypothesisViolated { eps1, eps2 });
    }
    let rate = eps1.max(eps2) / (1.0 - eps1);
    Ok(rate.powi(t as i32) * init_err)
}

/// Relative slack allowed when checking that an objective sequence does not
/// increase; recomputing `½‖Xβ − y‖²` carries rounding error of this order
/// once the iterates have converged.
pub const OBJECTIVE_REL_SLACK: f64 = 1e-12;

/// Number of steps where `f(β̂_t) > f(β̂_{t−1})` beyond rounding slack
/// `1e-12·f(β̂_{t−1}) + 1e-20·‖y‖²`.
pub fn objective_increases(objective: &[f64], y_norm_sq: f64) -> usize {
    objective
        .windows(2)
        .filter(|w| w[1] > w[0] + OBJECTIVE_REL_SLACK * w[0] + 1e-20 * y_norm_sq)
        .count()
}
