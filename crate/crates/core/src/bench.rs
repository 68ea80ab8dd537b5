//! Replicated experiments: error curves per iteration, initializer
//! comparison across `n`, Δ tables, λ sweeps, time and iterations to a
//! precision target, and the ridge ablation.
//!
//! Replications run on the current rayon pool. Each replication owns its
//! dataset and random streams and is single-threaded inside, and results are
//! folded in replication order, so output does not depend on the thread
//! count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{DataSpec, Dataset, Distribution};
use crate::error::{Error, Result};
use crate::linalg::{self, dist2, DenseMatrix};
use crate::precond::{self, LambdaRule, Preconditioner};
use crate::sketch::{self, Rng, SketchKind};
use crate::solvers::{self, SolveOptions, SolveStatus, SolveTrace};

/// Default trimming fraction per tail.
pub const DEFAULT_TRIM: f64 = 0.025;

/// First ChaCha stream id used by solvers; lower ids belong to data generation.
const SOLVER_STREAM: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ihs,
    AccIhs,
    PwGradient,
    AoptIhs,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ihs, Method::AccIhs, Method::PwGradient, Method::AoptIhs];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ihs => "ihs",
            Method::AccIhs => "acc-ihs",
            Method::PwGradient => "pw-gradient",
            Method::AoptIhs => "aopt-ihs",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }

    fn stream(self) -> u64 {
        SOLVER_STREAM + Method::ALL.iter().position(|&m| m == self).unwrap() as u64
    }
}

/// Starting point of the baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitPolicy {
    /// Baselines start at zero; the A-optimal IHS at its own estimate.
    ZeroForBaselines,
    /// Every method starts at the A-optimal classical-sketch estimate.
    AoptForAll,
}

impl InitPolicy {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "zero-for-baselines" => Some(InitPolicy::ZeroForBaselines),
            "aopt-for-all" => Some(InitPolicy::AoptForAll),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: DataSpec,
    /// Sketch size per iteration.
    pub m: usize,
    /// Iterations per run (or the cap, for time-to-precision runs).
    pub n_iter: usize,
    pub reps: usize,
    /// `None` uses the distribution's default rule.
    pub lambda_rule: Option<LambdaRule>,
    pub methods: Vec<Method>,
    pub trim: f64,
    pub tol: f64,
    pub init_policy: InitPolicy,
    /// Random sketch used by the baselines.
    pub sketch: SketchKind,
    /// Record wall-clock time; off gives reproducible time tables.
    pub timing: bool,
}

impl ExperimentConfig {
    /// Desk-scale defaults: `n = 2^14`, `m = 1000`, `R = 100`.
    pub fn desk(dist: Distribution, d: usize, seed: u64) -> Self {
        Self {
            data: DataSpec::new(dist, 1 << 14, d, seed),
            m: 1000,
            n_iter: 50,
            reps: 100,
            lambda_rule: None,
            methods: Method::ALL.to_vec(),
            trim: DEFAULT_TRIM,
            tol: solvers::DEFAULT_TOL,
            init_policy: InitPolicy::ZeroForBaselines,
            sketch: SketchKind::Srht,
            timing: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.data.validate()?;
        if self.reps == 0 {
            return Err(Error::InvalidArgument("reps must be at least 1".into()));
        }
        if !(0.0..0.5).contains(&self.trim) {
            return Err(Error::InvalidArgument(format!(
                "trim must be in [0, 0.5), got {}",
                self.trim
            )));
        }
        if self.m == 0 || self.m > self.data.n {
            return Err(Error::BadSubsampleSize {
                m: self.m,
                n: self.data.n,
            });
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }

    pub fn rule(&self) -> LambdaRule {
        self.lambda_rule.unwrap_or_else(|| self.data.dist.default_lambda_rule())
    }

    /// Data spec of replication `rep`.
    pub fn rep_spec(&self, rep: usize) -> DataSpec {
        DataSpec {
            seed: self.data.seed ^ rep as u64,
            ..self.data
        }
    }

    fn rep_rng(&self, rep: usize, stream: u64) -> Rng {
        Rng::derive(self.data.seed, rep as u64, stream)
    }
}

/// Mean after dropping `⌊frac·len⌋` values from each tail of the sorted input.
pub fn trimmed_mean(values: &[f64], frac: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(0.0..0.5).contains(&frac) {
        return Err(Error::InvalidArgument(format!(
            "trim fraction must be in [0, 0.5), got {frac}"
        )));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = (frac * v.len() as f64).floor() as usize;
    let kept = &v[k..v.len() - k];
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}

fn trimmed_or_nan(values: &[f64], frac: f64) -> f64 {
    trimmed_mean(values, frac).unwrap_or(f64::NAN)
}

fn plain_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// One point of an aggregated error curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveResult {
    pub method: String,
    pub iteration: usize,
    /// Trimmed mean of `‖β̂_t − β*‖²`.
    pub mse1: f64,
    /// Trimmed mean of `‖β̂_t − β̂^LS‖²`.
    pub mse2: f64,
    /// Replications excluded because the run failed or diverged.
    pub failures: usize,
}

/// Error curves plus the number of runs whose objective increased.
#[derive(Debug, Clone, PartialEq)]
pub struct Curves {
    pub rows: Vec<CurveResult>,
    pub objective_violations: usize,
}

/// Per-iteration squared errors of one run, padded with the final iterate
/// when the run stopped early at a stationary point.
struct RunErrors {
    to_star: Vec<f64>,
    to_ls: Vec<f64>,
    objective_increases: usize,
}

fn run_errors(trace: &SolveTrace, ds: &Dataset, n_iter: usize, line_search: bool) -> Option<RunErrors> {
    if trace.status.is_failure() {
        return None;
    }
    let last = trace.final_beta();
    let beta_at = |t: usize| trace.betas.get(t).map_or(last, |b| b.as_slice());
    let sq = |a: &[f64], b: &[f64]| dist2(a, b).powi(2);
    let objective_increases = if line_search {
        solvers::objective_increases(&trace.objective, linalg::dot(&ds.y, &ds.y))
    } else {
        0
    };
    Some(RunErrors {
        to_star: (0..=n_iter).map(|t| sq(beta_at(t), &ds.beta_star)).collect(),
        to_ls: (0..=n_iter).map(|t| sq(beta_at(t), &ds.beta_ls)).collect(),
        objective_increases,
    })
}

fn aggregate_curves(labels: &[String], per_rep: Vec<Vec<Option<RunErrors>>>, n_iter: usize, trim: f64) -> Curves {
    let mut rows = Vec::new();
    let mut objective_violations = 0;
    for (k, label) in labels.iter().enumerate() {
        let ok: Vec<&RunErrors> = per_rep.iter().filter_map(|r| r[k].as_ref()).collect();
        let failures = per_rep.len() - ok.len();
        objective_violations += ok.iter().filter(|r| r.objective_increases > 0).count();
        for t in 0..=n_iter {
            let e1: Vec<f64> = ok.iter().map(|r| r.to_star[t]).collect();
            let e2: Vec<f64> = ok.iter().map(|r| r.to_ls[t]).collect();
            rows.push(CurveResult {
                method: label.clone(),
                iteration: t,
                mse1: trimmed_or_nan(&e1, trim),
                mse2: trimmed_or_nan(&e2, trim),
                failures,
            });
        }
    }
    Curves {
        rows,
        objective_violations,
    }
}

/// Runs `method` on one replication.
fn solve_method(
    cfg: &ExperimentConfig,
    method: Method,
    ds: &Dataset,
    rep: usize,
    n_iter: usize,
    opts: &SolveOptions,
) -> Result<SolveTrace> {
    let (x, y) = (&ds.x, ds.y.as_slice());
    let lambda = precond::lambda_rule(x, cfg.rule());
    if method == Method::AoptIhs {
        return solvers::aopt_ihs_solve(x, y, cfg.m, n_iter, lambda, opts);
    }
    let beta0 = match cfg.init_policy {
        InitPolicy::ZeroForBaselines => vec![0.0; x.cols()],
        InitPolicy::AoptForAll => solvers::aopt_cs_estimate(x, y, cfg.m)?.0,
    };
    let mut rng = cfg.rep_rng(rep, method.stream());
    let (m, kind) = (cfg.m, cfg.sketch);
    match method {
        Method::Ihs => solvers::ihs_solve(x, y, m, n_iter, kind, &mut rng, &beta0, opts),
        Method::AccIhs => solvers::acc_ihs_solve(x, y, m, n_iter, kind, &mut rng, &beta0, opts),
        Method::PwGradient => solvers::pw_gradient_solve(x, y, m, n_iter, kind, &mut rng, &beta0, opts),
        Method::AoptIhs => unreachable!("handled above"),
    }
}

/// Error curves vs iteration for every configured method; iteration 0 is the
/// initializer.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Curves> {
    cfg.validate()?;
    if cfg.methods.is_empty() {
        return Err(Error::InvalidArgument("no methods selected".into()));
    }
    let per_rep: Vec<Vec<Option<RunErrors>>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| -> Result<Vec<Option<RunErrors>>> {
            let ds = Dataset::generate(&cfg.rep_spec(rep))?;
            let opts = SolveOptions::default();
            Ok(cfg
                .methods
                .iter()
                .map(|&method| {
                    let trace = solve_method(cfg, method, &ds, rep, cfg.n_iter, &opts).ok()?;
                    run_errors(&trace, &ds, cfg.n_iter, method == Method::AoptIhs)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let labels: Vec<String> = cfg.methods.iter().map(|m| m.name().to_string()).collect();
    Ok(aggregate_curves(&labels, per_rep, cfg.n_iter, cfg.trim))
}

/// Fixed-preconditioner variants compared by the ridge ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RidgeVariant {
    /// `M(δ, λ)`.
    Ridged,
    /// `M(δ, 0)`.
    MaskedGram,
    /// `M = I`: steepest descent with exact line search.
    Identity,
}

impl RidgeVariant {
    pub const ALL: [RidgeVariant; 3] = [RidgeVariant::Ridged, RidgeVariant::MaskedGram, RidgeVariant::Identity];

    pub fn name(self) -> &'static str {
        match self {
            RidgeVariant::Ridged => "ridged",
            RidgeVariant::MaskedGram => "masked-gram",
            RidgeVariant::Identity => "identity",
        }
    }
}

/// Line-search iterations from the A-optimal initializer under each
/// preconditioner variant.
pub fn run_ridge_ablation(cfg: &ExperimentConfig) -> Result<Curves> {
    cfg.validate()?;
    let per_rep: Vec<Vec<Option<RunErrors>>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| -> Result<Vec<Option<RunErrors>>> {
            let ds = Dataset::generate(&cfg.rep_spec(rep))?;
            let (x, y) = (&ds.x, ds.y.as_slice());
            let (beta0, mask) = solvers::aopt_cs_estimate(x, y, cfg.m)?;
            let lambda = precond::lambda_rule(x, cfg.rule());
            Ok(RidgeVariant::ALL
                .iter()
                .map(|variant| {
                    let pre = match variant {
                        RidgeVariant::Ridged => precond::build_m(x, &mask, lambda),
                        RidgeVariant::MaskedGram => precond::build_m(x, &mask, 0.0),
                        RidgeVariant::Identity => Preconditioner::from_matrix(DenseMatrix::identity(x.cols())),
                    }
                    .ok()?;
                    let trace =
                        solvers::line_search_solve(x, y, &pre, cfg.n_iter, &beta0, &SolveOptions::default()).ok()?;
                    run_errors(&trace, &ds, cfg.n_iter, true)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let labels: Vec<String> = RidgeVariant::ALL.iter().map(|v| v.name().to_string()).collect();
    Ok(aggregate_curves(&labels, per_rep, cfg.n_iter, cfg.trim))
}

/// Initializer compared across `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initializer {
    Full,
    SrhtCs,
    LevCs,
    AoptCs,
}

impl Initializer {
    pub const ALL: [Initializer; 4] = [
        Initializer::Full,
        Initializer::SrhtCs,
        Initializer::LevCs,
        Initializer::AoptCs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Initializer::Full => "full",
            Initializer::SrhtCs => "srht-cs",
            Initializer::LevCs => "lev-cs",
            Initializer::AoptCs => "aopt-cs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitResult {
    pub n: usize,
    pub estimator: &'static str,
    /// Trimmed mean of `‖β̂ − β*‖²`.
    pub mse1: f64,
    pub failures: usize,
}

/// One-shot estimators with a total sketch budget of `budget` rows,
/// for each `n` in `n_grid`. `cfg.data.n` and `cfg.m` are ignored.
pub fn run_init_comparison(cfg: &ExperimentConfig, n_grid: &[usize], budget: usize) -> Result<Vec<InitResult>> {
    let mut out = Vec::new();
    for &n in n_grid {
        if budget == 0 || budget > n {
            return Err(Error::BadSubsampleSize { m: budget, n });
        }
        let mut sub = cfg.clone();
        sub.data.n = n;
        sub.m = budget;
        sub.validate()?;
        let per_rep: Vec<Vec<Option<f64>>> = (0..sub.reps)
            .into_par_iter()
            .map(|rep| -> Result<Vec<Option<f64>>> {
                let ds = Dataset::generate(&sub.rep_spec(rep))?;
                let (x, y) = (&ds.x, ds.y.as_slice());
                Ok(Initializer::ALL
                    .iter()
                    .map(|init| {
                        let stream = SOLVER_STREAM + *init as u64;
                        let mut rng = sub.rep_rng(rep, stream);
                        let beta = match init {
                            Initializer::Full => Ok(ds.beta_ls.clone()),
                            Initializer::SrhtCs => sketch::srht_apply(x, Some(y), budget, &mut rng)
                                .and_then(|(sx, sy)| solvers::cs_estimate(&sx, &sy.unwrap())),
                            Initializer::LevCs => sketch::leverage_sample(x, Some(y), budget, &mut rng)
                                .and_then(|(sx, sy)| solvers::cs_estimate(&sx, &sy.unwrap())),
                            Initializer::AoptCs => solvers::aopt_cs_estimate(x, y, budget).map(|r| r.0),
                        };
                        beta.ok().map(|b| dist2(&b, &ds.beta_star).powi(2))
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        for (k, init) in Initializer::ALL.iter().enumerate() {
            let ok: Vec<f64> = per_rep.iter().filter_map(|r| r[k]).collect();
            out.push(InitResult {
                n,
                estimator: init.name(),
                mse1: trimmed_or_nan(&ok, sub.trim),
                failures: per_rep.len() - ok.len(),
            });
        }
    }
    Ok(out)
}

/// Preconditioners whose Δ is tabulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaVariant {
    /// `M(δ, 0)`.
    Zero,
    /// `M(δ, λ̃)` with the configured rule.
    RuleLambda,
    /// `(SX)ᵀSX` from an SRHT of size `m`.
    Srht,
    /// `λ̃ I`; Δ is zero by construction.
    LambdaIdentity,
}

impl DeltaVariant {
    pub const ALL: [DeltaVariant; 4] = [
        DeltaVariant::Zero,
        DeltaVariant::RuleLambda,
        DeltaVariant::Srht,
        DeltaVariant::LambdaIdentity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DeltaVariant::Zero => "lambda-zero",
            DeltaVariant::RuleLambda => "lambda-rule",
            DeltaVariant::Srht => "srht",
            DeltaVariant::LambdaIdentity => "lambda-identity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaResult {
    pub dist: Distribution,
    pub d: usize,
    pub variant: String,
    /// Plain mean of Δ over the replications that factorized.
    pub delta_mean: f64,
    pub failures: usize,
}

/// Centered covariates of replication `rep`; the response is not needed.
fn rep_design(cfg: &ExperimentConfig, rep: usize) -> Result<DenseMatrix> {
    let x = crate::datagen::gen_covariates(&cfg.rep_spec(rep))?;
    let zeros = vec![0.0; x.rows()];
    Ok(crate::datagen::center(&x, &zeros)?.0)
}

/// Averaged Δ for each variant.
pub fn run_delta_table(cfg: &ExperimentConfig, variants: &[DeltaVariant]) -> Result<Vec<DeltaResult>> {
    cfg.validate()?;
    let per_rep: Vec<Vec<Option<f64>>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| -> Result<Vec<Option<f64>>> {
            let x = rep_design(cfg, rep)?;
            let q = linalg::gram(&x);
            let mask = sketch::aopt_select(&x, cfg.m)?;
            let lambda = precond::lambda_rule(&x, cfg.rule());
            Ok(variants
                .iter()
                .map(|v| {
                    let pre = match v {
                        DeltaVariant::Zero => precond::build_m(&x, &mask, 0.0),
                        DeltaVariant::RuleLambda => precond::build_m(&x, &mask, lambda),
                        DeltaVariant::Srht => {
                            let mut rng = cfg.rep_rng(rep, SOLVER_STREAM);
                            sketch::srht_apply(&x, None, cfg.m, &mut rng)
                                .and_then(|(sx, _)| Preconditioner::from_matrix(linalg::gram(&sx)))
                        }
                        DeltaVariant::LambdaIdentity => {
                            Preconditioner::from_matrix(DenseMatrix::identity(x.cols()).scaled(lambda))
                        }
                    };
                    pre.and_then(|p| precond::delta_measure(&p, &q)).ok()
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(variants
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let ok: Vec<f64> = per_rep.iter().filter_map(|r| r[k]).collect();
            DeltaResult {
                dist: cfg.data.dist,
                d: cfg.data.d,
                variant: v.name().to_string(),
                delta_mean: plain_mean(&ok),
                failures: per_rep.len() - ok.len(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub dist: Distribution,
    pub d: usize,
    pub proportion: f64,
    pub delta_mean: f64,
    pub failures: usize,
}

/// Averaged Δ of `M(δ, p·Σ‖x_i‖²)` for each proportion `p`.
pub fn lambda_sweep(cfg: &ExperimentConfig, proportions: &[f64]) -> Result<Vec<SweepResult>> {
    cfg.validate()?;
    if let Some(p) = proportions.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
        return Err(Error::InvalidArgument(format!("proportions must be positive, got {p}")));
    }
    let per_rep: Vec<Vec<Option<f64>>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| -> Result<Vec<Option<f64>>> {
            let x = rep_design(cfg, rep)?;
            let q = linalg::gram(&x);
            let mask = sketch::aopt_select(&x, cfg.m)?;
            Ok(proportions
                .iter()
                .map(|&p| {
                    let lambda = precond::lambda_rule(&x, LambdaRule::Proportion(p));
                    precond::build_m(&x, &mask, lambda)
                        .and_then(|m| precond::delta_measure(&m, &q))
                        .ok()
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(proportions
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let ok: Vec<f64> = per_rep.iter().filter_map(|r| r[k]).collect();
            SweepResult {
                dist: cfg.data.dist,
                d: cfg.data.d,
                proportion: p,
                delta_mean: plain_mean(&ok),
                failures: per_rep.len() - ok.len(),
            }
        })
        .collect())
}

/// Outcome of a time-to-precision measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeStatus {
    /// Every replication reached the target.
    Ok,
    /// At least one replication diverged or failed.
    Diverge,
    /// No divergence, but some replication hit the iteration cap.
    Cap,
}

impl TimeStatus {
    pub fn name(self) -> &'static str {
        match self {
            TimeStatus::Ok => "ok",
            TimeStatus::Diverge => "diverge",
            TimeStatus::Cap => "cap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeResult {
    pub method: String,
    pub dist: Distribution,
    pub d: usize,
    /// Mean seconds to the target; `None` unless the status is ok and timing
    /// is on.
    pub mean_seconds: Option<f64>,
    /// Mean iterations to the target; `None` unless the status is ok.
    pub mean_iters: Option<f64>,
    pub status: TimeStatus,
}

enum RunOutcome {
    Reached { seconds: f64, iters: usize },
    Diverged,
    Capped,
}

/// Seconds and iterations until `‖β̂_t − β̂^LS‖₂ ≤ tol`, with `cfg.n_iter` as
/// the cap. Timing covers sketching, initialization, preconditioner
/// construction and the iterations; data generation, `β̂^LS` and the distance
/// bookkeeping are excluded.
pub fn run_time_to_precision(cfg: &ExperimentConfig) -> Result<Vec<TimeResult>> {
    cfg.validate()?;
    let per_rep: Vec<Vec<RunOutcome>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| -> Result<Vec<RunOutcome>> {
            let ds = Dataset::generate(&cfg.rep_spec(rep))?;
            let opts = SolveOptions {
                beta_ls: Some(ds.beta_ls.clone()),
                target: Some(cfg.tol),
                track_objective: false,
                ..SolveOptions::default()
            };
            Ok(cfg
                .methods
                .iter()
                .map(|&method| match solve_method(cfg, method, &ds, rep, cfg.n_iter, &opts) {
                    Err(_) => RunOutcome::Diverged,
                    Ok(trace) => match trace.status {
                        SolveStatus::ReachedTarget => {
                            let iters = trace.iterations();
                            RunOutcome::Reached {
                                seconds: trace.seconds_through(iters),
                                iters,
                            }
                        }
                        SolveStatus::Diverged => RunOutcome::Diverged,
                        SolveStatus::Completed | SolveStatus::Converged => RunOutcome::Capped,
                    },
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(cfg
        .methods
        .iter()
        .enumerate()
        .map(|(k, method)| {
            let mut seconds = Vec::new();
            let mut iters = Vec::new();
            let mut status = TimeStatus::Ok;
            for r in &per_rep {
                match r[k] {
                    RunOutcome::Reached { seconds: s, iters: i } => {
                        seconds.push(s);
                        iters.push(i as f64);
                    }
                    RunOutcome::Diverged => status = TimeStatus::Diverge,
                    RunOutcome::Capped if status == TimeStatus::Ok => status = TimeStatus::Cap,
                    RunOutcome::Capped => {}
                }
            }
            let ok = status == TimeStatus::Ok;
            TimeResult {
                method: method.name().to_string(),
                dist: cfg.data.dist,
                d: cfg.data.d,
                mean_seconds: (ok && cfg.timing).then(|| plain_mean(&seconds)),
                mean_iters: ok.then(|| plain_mean(&iters)),
                status,
            }
        })
        .collect())
}
