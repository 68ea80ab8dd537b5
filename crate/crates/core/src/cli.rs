//! Command-line front end: dataset generation, single solves on CSV data and
//! the benchmark tables.
//!
//! Every command writes its CSV outputs and a `manifest.json` into
//! `--out-dir`. Files are written to a temporary name and renamed into
//! place.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::bench::{self, DeltaVariant, ExperimentConfig, InitPolicy, Method};
use crate::datagen::{self, DataSpec, Distribution};
use crate::linalg::{self, DenseMatrix};
use crate::precond::{self, LambdaRule};
use crate::sketch::{self, Rng, SketchKind};
use crate::solvers::{self, SolveOptions, SolveTrace};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: u64,
        column: usize,
        message: String,
    },
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("invalid flag: {0}")]
    InvalidFlag(String),
    #[error(transparent)]
    Numeric(#[from] crate::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    fn config(key: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Self + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sketchls", version, about = "Sketched least-squares solvers and benchmarks")]
pub struct Cli {
    /// Base seed for all random streams.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory receiving CSV outputs and the manifest.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Worker threads for replications.
    #[arg(long, global = true, env = "SKETCHLS_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset as X.csv, y.csv and beta_star.csv.
    Gen(GenArgs),
    /// Run one solver on CSV data.
    Solve(SolveArgs),
    /// Run a benchmark described by a JSON config.
    Bench {
        #[arg(value_enum)]
        table: BenchTable,
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// normal, lognormal, t2 or mixture.
    #[arg(long)]
    pub dist: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    /// Noise standard deviation.
    #[arg(long, default_value_t = datagen::DEFAULT_SIGMA)]
    pub sigma: f64,
    /// Standardize the columns of X before forming y.
    #[arg(long)]
    pub scale: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveMethod {
    Full,
    AoptCs,
    Ihs,
    AccIhs,
    PwGradient,
    AoptIhs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long, value_enum)]
    pub method: SolveMethod,
    /// Sketch size.
    #[arg(long)]
    pub m: Option<usize>,
    /// Iteration count.
    #[arg(long, default_value_t = 20)]
    pub iters: usize,
    /// Random sketch for ihs, acc-ihs and pw-gradient: srht, leverage or uniform.
    #[arg(long, default_value = "srht")]
    pub sketch: String,
    /// Explicit ridge parameter.
    #[arg(long, conflicts_with_all = ["lambda_rule", "lambda_proportion"])]
    pub lambda: Option<f64>,
    /// Ridge rule: concentrated or heavy-tailed.
    #[arg(long, conflicts_with = "lambda_proportion")]
    pub lambda_rule: Option<String>,
    /// Ridge parameter as a proportion of the total squared row norm.
    #[arg(long)]
    pub lambda_proportion: Option<f64>,
    /// Stop once the distance to the least-squares solution is below this.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Use the data as given instead of centering it.
    #[arg(long)]
    pub no_center: bool,
    /// Standardize the columns of X after centering.
    #[arg(long)]
    pub scale: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchTable {
    Init,
    Converge,
    Delta,
    Time,
    Ridge,
    LambdaSweep,
}

impl BenchTable {
    fn name(self) -> &'static str {
        match self {
            BenchTable::Init => "init",
            BenchTable::Converge => "converge",
            BenchTable::Delta => "delta",
            BenchTable::Time => "time",
            BenchTable::Ridge => "ridge",
            BenchTable::LambdaSweep => "lambda-sweep",
        }
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::InvalidFlag("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build()?;
    fs::create_dir_all(&cli.out_dir).map_err(CliError::io(&cli.out_dir))?;
    let started = unix_now();
    let (command, config, extra) = pool.install(|| match &cli.command {
        Command::Gen(args) => cmd_gen(args, cli.seed.unwrap_or(0), &cli.out_dir),
        Command::Solve(args) => cmd_solve(args, cli.seed.unwrap_or(0), &cli.out_dir),
        Command::Bench { table, config } => cmd_bench(*table, config, cli.seed, &cli.out_dir),
    })?;
    let mut manifest = json!({
        "command": command,
        "config": config,
        "library_version": env!("CARGO_PKG_VERSION"),
        "prng_algorithm": sketch::PRNG_ALGORITHM,
        "threads": pool.current_num_threads(),
        "started": started,
        "finished": unix_now(),
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut manifest, extra) {
        m.extend(e);
    }
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&cli.out_dir.join("manifest.json"), text.as_bytes())
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

type CommandOutcome = (String, Value, Value);

fn cmd_gen(args: &GenArgs, seed: u64, out: &Path) -> Result<CommandOutcome, CliError> {
    let dist = Distribution::parse(&args.dist).ok_or_else(|| {
        CliError::InvalidFlag(format!(
            "--dist {}: expected normal, lognormal, t2 or mixture",
            args.dist
        ))
    })?;
    let spec = DataSpec {
        sigma_noise: args.sigma,
        ..DataSpec::new(dist, args.n, args.d, seed)
    };
    spec.validate().map_err(|e| CliError::InvalidFlag(e.to_string()))?;
    let (x, y, beta_star) = datagen::generate_raw(&spec, args.scale)?;
    let header: Vec<String> = (1..=x.cols()).map(|j| format!("x{j}")).collect();
    write_matrix(&out.join("X.csv"), &header, &x)?;
    write_vector(&out.join("y.csv"), "y", &y)?;
    write_vector(&out.join("beta_star.csv"), "beta", &beta_star)?;
    let config = json!({ "data": spec, "scale": args.scale });
    Ok(("gen".into(), config, json!({})))
}

fn parse_lambda(args: &SolveArgs, x: &DenseMatrix) -> Result<(f64, Value), CliError> {
    let rule = match (&args.lambda, &args.lambda_rule, &args.lambda_proportion) {
        (Some(v), _, _) => LambdaRule::Explicit(*v),
        (_, Some(r), _) => match r.as_str() {
            "concentrated" => LambdaRule::Concentrated,
            "heavy-tailed" => LambdaRule::HeavyTailed,
            other => {
                return Err(CliError::InvalidFlag(format!(
                    "--lambda-rule {other}: expected concentrated or heavy-tailed"
                )))
            }
        },
        (_, _, Some(p)) => LambdaRule::Proportion(*p),
        _ => LambdaRule::Concentrated,
    };
    let lambda = precond::lambda_rule(x, rule);
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(CliError::InvalidFlag(format!(
            "ridge parameter must be non-negative, got {lambda}"
        )));
    }
    Ok((lambda, serde_json::to_value(rule).expect("rule serializes")))
}

fn cmd_solve(args: &SolveArgs, seed: u64, out: &Path) -> Result<CommandOutcome, CliError> {
    let x = read_matrix(&args.x)?;
    let y = read_vector(&args.y)?;
    if y.len() != x.rows() {
        return Err(CliError::Parse {
            path: args.y.clone(),
            row: (y.len().min(x.rows()) + 2) as u64,
            column: 1,
            message: format!("response has {} values but X has {} rows", y.len(), x.rows()),
        });
    }
    let (mut x, y) = if args.no_center {
        (x, y)
    } else {
        datagen::center(&x, &y)?
    };
    if args.scale {
        x = datagen::scale_columns(&x);
    }
    let beta_ls = solvers::full_ls(&x, &y)?;
    let mut opts = SolveOptions::with_reference(beta_ls.clone());
    opts.target = args.tol;
    let need_m = || {
        args.m
            .ok_or_else(|| CliError::InvalidFlag(format!("--m is required for method {:?}", args.method)))
    };
    let kind = SketchKind::parse(&args.sketch)
        .filter(|k| matches!(k, SketchKind::Srht | SketchKind::Leverage | SketchKind::Uniform))
        .ok_or_else(|| {
            CliError::InvalidFlag(format!("--sketch {}: expected srht, leverage or uniform", args.sketch))
        })?;
    let mut rng = Rng::new(seed);
    let d = x.cols();
    let mut lambda_cfg = Value::Null;
    let trace = match args.method {
        SolveMethod::Full => one_shot_trace(&x, &y, beta_ls.clone(), &beta_ls),
        SolveMethod::AoptCs => {
            let (b, _) = solvers::aopt_cs_estimate(&x, &y, need_m()?)?;
            one_shot_trace(&x, &y, b, &beta_ls)
        }
        SolveMethod::Ihs => solvers::ihs_solve(&x, &y, need_m()?, args.iters, kind, &mut rng, &vec![0.0; d], &opts)?,
        SolveMethod::AccIhs => {
            solvers::acc_ihs_solve(&x, &y, need_m()?, args.iters, kind, &mut rng, &vec![0.0; d], &opts)?
        }
        SolveMethod::PwGradient => {
            solvers::pw_gradient_solve(&x, &y, need_m()?, args.iters, kind, &mut rng, &vec![0.0; d], &opts)?
        }
        SolveMethod::AoptIhs => {
            let (lambda, rule) = parse_lambda(args, &x)?;
            lambda_cfg = json!({ "rule": rule, "value": lambda });
            solvers::aopt_ihs_solve(&x, &y, need_m()?, args.iters, lambda, &opts)?
        }
    };
    write_trace(&out.join("trace.csv"), &trace, args.method)?;
    write_vector(&out.join("beta.csv"), "beta", trace.final_beta())?;
    let config = json!({
        "x": args.x,
        "y": args.y,
        "method": args.method.to_possible_value().expect("no skipped variants").get_name(),
        "m": args.m,
        "iters": args.iters,
        "sketch": kind.name(),
        "lambda": lambda_cfg,
        "tol": args.tol,
        "center": !args.no_center,
        "scale": args.scale,
        "seed": seed,
    });
    let extra = json!({ "status": format!("{:?}", trace.status).to_lowercase(), "iterations": trace.iterations() });
    Ok(("solve".into(), config, extra))
}

fn one_shot_trace(x: &DenseMatrix, y: &[f64], beta: Vec<f64>, beta_ls: &[f64]) -> SolveTrace {
    SolveTrace {
        objective: vec![solvers::objective(x, y, &beta)],
        dist_to_ls: vec![linalg::dist2(&beta, beta_ls)],
        betas: vec![beta],
        alphas: Vec::new(),
        setup_seconds: 0.0,
        elapsed: Vec::new(),
        status: solvers::SolveStatus::Completed,
        sketches: Vec::new(),
    }
}

fn write_trace(path: &Path, trace: &SolveTrace, method: SolveMethod) -> Result<(), CliError> {
    let unit_step = matches!(method, SolveMethod::Ihs | SolveMethod::PwGradient);
    let mut w = csv_writer();
    w.write_record(["iter", "alpha", "objective", "dist_to_ls"])?;
    for t in 0..=trace.iterations() {
        let alpha = match t {
            0 => String::new(),
            _ if unit_step => "1".to_string(),
            _ => fmt_f64(trace.alphas[t - 1]),
        };
        w.write_record([
            t.to_string(),
            alpha,
            fmt_opt(trace.objective.get(t).copied()),
            fmt_opt(trace.dist_to_ls.get(t).copied()),
        ])?;
    }
    finish_csv(path, w)
}

/// Which keys each benchmark accepts beyond the shared ones.
fn allowed_keys(table: BenchTable) -> &'static [&'static str] {
    match table {
        BenchTable::Init => &["dist", "d", "reps", "seed", "sigma", "trim", "n_grid", "budget"],
        BenchTable::Converge => &[
            "dist",
            "d",
            "reps",
            "seed",
            "sigma",
            "trim",
            "lambda_rule",
            "n",
            "m",
            "iters",
            "methods",
            "init",
            "sketch",
        ],
        BenchTable::Ridge => &[
            "dist",
            "d",
            "reps",
            "seed",
            "sigma",
            "trim",
            "lambda_rule",
            "n",
            "m",
            "iters",
        ],
        BenchTable::Delta => &["dist", "d", "reps", "seed", "sigma", "lambda_rule", "n", "m"],
        BenchTable::LambdaSweep => &["dist", "d", "reps", "seed", "sigma", "n", "m", "proportions"],
        BenchTable::Time => &[
            "dist",
            "d",
            "reps",
            "seed",
            "sigma",
            "lambda_rule",
            "n",
            "m",
            "iters",
            "methods",
            "init",
            "sketch",
            "tol",
            "timing",
        ],
    }
}

/// Typed view of a benchmark config object.
struct ConfigReader<'a> {
    obj: &'a Map<String, Value>,
}

impl<'a> ConfigReader<'a> {
    fn new(value: &'a Value, table: BenchTable) -> Result<Self, CliError> {
        let obj = value
            .as_object()
            .ok_or_else(|| CliError::config("<root>", "config must be a JSON object"))?;
        let allowed = allowed_keys(table);
        if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(CliError::config(
                k,
                format!("not recognized by `bench {}`", table.name()),
            ));
        }
        Ok(Self { obj })
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.obj.get(key)
    }

    fn require(&self, key: &str) -> Result<&'a Value, CliError> {
        self.get(key).ok_or_else(|| CliError::config(key, "missing"))
    }

    fn count(&self, key: &str) -> Result<usize, CliError> {
        as_count(key, self.require(key)?)
    }

    fn count_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        self.get(key).map_or(Ok(default), |v| as_count(key, v))
    }

    fn real_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| CliError::config(key, "expected a number")),
        }
    }

    /// A scalar or an array of values, each parsed by `f`.
    fn list<T>(&self, key: &str, f: impl Fn(&Value) -> Option<T>) -> Result<Vec<T>, CliError> {
        let v = self.require(key)?;
        let items: Vec<&Value> = match v {
            Value::Array(a) if a.is_empty() => return Err(CliError::config(key, "empty list")),
            Value::Array(a) => a.iter().collect(),
            other => vec![other],
        };
        items
            .into_iter()
            .map(|item| f(item).ok_or_else(|| CliError::config(key, format!("invalid value {item}"))))
            .collect()
    }

    fn single<T>(&self, key: &str, f: impl Fn(&Value) -> Option<T>) -> Result<T, CliError> {
        let mut all = self.list(key, f)?;
        if all.len() != 1 {
            return Err(CliError::config(key, "this benchmark takes a single value"));
        }
        Ok(all.remove(0))
    }
}

fn as_count(key: &str, v: &Value) -> Result<usize, CliError> {
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| CliError::config(key, "expected a non-negative integer"))
}

fn parse_dist(v: &Value) -> Option<Distribution> {
    v.as_str().and_then(Distribution::parse)
}

fn parse_d(v: &Value) -> Option<usize> {
    v.as_u64().map(|u| u as usize)
}

fn parse_lambda_rule(v: &Value) -> Result<LambdaRule, CliError> {
    let bad = || CliError::config("lambda_rule", format!("invalid value {v}"));
    match v {
        Value::String(s) => match s.as_str() {
            "concentrated" => Ok(LambdaRule::Concentrated),
            "heavy-tailed" => Ok(LambdaRule::HeavyTailed),
            _ => Err(bad()),
        },
        Value::Object(_) => serde_json::from_value(v.clone()).map_err(|_| bad()),
        _ => Err(bad()),
    }
}

/// Shared experiment settings; `dist`/`d` are filled per grid cell.
fn base_config(r: &ConfigReader<'_>, table: BenchTable, seed: u64) -> Result<ExperimentConfig, CliError> {
    let needs_n = table != BenchTable::Init;
    let n = if needs_n { r.count("n")? } else { 0 };
    let m = if needs_n { r.count("m")? } else { 0 };
    let mut cfg = ExperimentConfig::desk(Distribution::Normal, 1, seed);
    cfg.data.n = n;
    cfg.data.sigma_noise = r.real_or("sigma", datagen::DEFAULT_SIGMA)?;
    cfg.m = m;
    cfg.reps = r.count("reps")?;
    cfg.trim = r.real_or("trim", bench::DEFAULT_TRIM)?;
    cfg.tol = r.real_or("tol", solvers::DEFAULT_TOL)?;
    let default_iters = if table == BenchTable::Time {
        solvers::DEFAULT_ITER_CAP
    } else {
        50
    };
    cfg.n_iter = r.count_or("iters", default_iters)?;
    if let Some(v) = r.get("lambda_rule") {
        cfg.lambda_rule = Some(parse_lambda_rule(v)?);
    }
    if let Some(v) = r.get("timing") {
        cfg.timing = v
            .as_bool()
            .ok_or_else(|| CliError::config("timing", "expected true or false"))?;
    }
    if r.get("methods").is_some() {
        cfg.methods = r.list("methods", |v| v.as_str().and_then(Method::parse))?;
    }
    if let Some(v) = r.get("init") {
        cfg.init_policy = v
            .as_str()
            .and_then(InitPolicy::parse)
            .ok_or_else(|| CliError::config("init", "expected zero-for-baselines or aopt-for-all"))?;
    }
    if let Some(v) = r.get("sketch") {
        cfg.sketch = v
            .as_str()
            .and_then(SketchKind::parse)
            .filter(|k| *k != SketchKind::AOptimal)
            .ok_or_else(|| CliError::config("sketch", "expected srht, leverage, uniform or identity"))?;
    }
    Ok(cfg)
}

fn config_error(e: crate::Error) -> CliError {
    match e {
        crate::Error::BadSubsampleSize { .. } => CliError::config("m", e.to_string()),
        other => CliError::config("<config>", other.to_string()),
    }
}

fn cmd_bench(table: BenchTable, path: &Path, seed: Option<u64>, out: &Path) -> Result<CommandOutcome, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let raw: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        row: e.line() as u64,
        column: e.column(),
        message: e.to_string(),
    })?;
    let r = ConfigReader::new(&raw, table)?;
    let seed = match seed {
        Some(s) => s,
        None => r.get("seed").map_or(Ok(0), |v| as_count("seed", v).map(|s| s as u64))?,
    };
    let base = base_config(&r, table, seed)?;
    let dists = r.list("dist", parse_dist)?;
    let ds = r.list("d", parse_d)?;
    let cells: Vec<ExperimentConfig> = dists
        .iter()
        .flat_map(|&dist| ds.iter().map(move |&d| (dist, d)))
        .map(|(dist, d)| {
            let mut c = base.clone();
            c.data.dist = dist;
            c.data.d = d;
            c
        })
        .collect();
    let single = || -> Result<ExperimentConfig, CliError> {
        r.single("dist", parse_dist)?;
        r.single("d", parse_d)?;
        Ok(cells[0].clone())
    };
    let mut extra = Map::new();
    let mut resolved = serde_json::to_value(&cells).expect("config serializes");
    match table {
        BenchTable::Converge | BenchTable::Ridge => {
            let cfg = single()?;
            let curves = if table == BenchTable::Converge {
                bench::run_convergence(&cfg)
            } else {
                bench::run_ridge_ablation(&cfg)
            }
            .map_err(config_error)?;
            let mut w = csv_writer();
            w.write_record(["method", "iter", "mse1", "mse2", "failures"])?;
            for row in &curves.rows {
                w.write_record([
                    row.method.clone(),
                    row.iteration.to_string(),
                    fmt_f64(row.mse1),
                    fmt_f64(row.mse2),
                    row.failures.to_string(),
                ])?;
            }
            let name = if table == BenchTable::Converge {
                "converge_mse.csv"
            } else {
                "ridge_mse.csv"
            };
            finish_csv(&out.join(name), w)?;
            extra.insert("objective_violations".into(), curves.objective_violations.into());
        }
        BenchTable::Init => {
            let cfg = single()?;
            let n_grid = r.list("n_grid", parse_d)?;
            let budget = r.count("budget")?;
            let rows = bench::run_init_comparison(&cfg, &n_grid, budget).map_err(|e| match e {
                crate::Error::BadSubsampleSize { .. } => CliError::config("budget", e.to_string()),
                other => config_error(other),
            })?;
            let mut w = csv_writer();
            w.write_record(["n", "estimator", "mse1", "failures"])?;
            for row in &rows {
                w.write_record([
                    row.n.to_string(),
                    row.estimator.to_string(),
                    fmt_f64(row.mse1),
                    row.failures.to_string(),
                ])?;
            }
            finish_csv(&out.join("init_mse.csv"), w)?;
            resolved = json!({ "experiment": cfg, "n_grid": n_grid, "budget": budget });
        }
        BenchTable::Delta => {
            let mut w = csv_writer();
            w.write_record(["dist", "d", "variant", "delta_mean", "failures"])?;
            for cfg in &cells {
                for row in bench::run_delta_table(cfg, &DeltaVariant::ALL).map_err(config_error)? {
                    w.write_record([
                        row.dist.name().to_string(),
                        row.d.to_string(),
                        row.variant,
                        fmt_f64(row.delta_mean),
                        row.failures.to_string(),
                    ])?;
                }
            }
            finish_csv(&out.join("delta.csv"), w)?;
        }
        BenchTable::LambdaSweep => {
            let proportions = match r.get("proportions") {
                Some(_) => r.list("proportions", Value::as_f64)?,
                None => (1..=10).map(|k| k as f64 / 10.0).collect(),
            };
            let mut w = csv_writer();
            w.write_record(["dist", "d", "proportion", "delta_mean", "failures"])?;
            for cfg in &cells {
                let rows = bench::lambda_sweep(cfg, &proportions).map_err(|e| match e {
                    crate::Error::InvalidArgument(msg) => CliError::config("proportions", msg),
                    other => config_error(other),
                })?;
                for row in rows {
                    w.write_record([
                        row.dist.name().to_string(),
                        row.d.to_string(),
                        fmt_f64(row.proportion),
                        fmt_f64(row.delta_mean),
                        row.failures.to_string(),
                    ])?;
                }
            }
            finish_csv(&out.join("lambda_sweep.csv"), w)?;
            extra.insert("proportions".into(), json!(proportions));
        }
        BenchTable::Time => {
            let mut w = csv_writer();
            w.write_record(["method", "dist", "d", "mean_seconds", "mean_iters", "status"])?;
            for cfg in &cells {
                for row in bench::run_time_to_precision(cfg).map_err(config_error)? {
                    w.write_record([
                        row.method,
                        row.dist.name().to_string(),
                        row.d.to_string(),
                        fmt_opt(row.mean_seconds),
                        fmt_opt(row.mean_iters),
                        row.status.name().to_string(),
                    ])?;
                }
            }
            finish_csv(&out.join("time.csv"), w)?;
            extra.insert(
                "timing_scope".into(),
                "sketching, initialization, preconditioner build and iterations; excludes data generation and the reference solution".into(),
            );
        }
    }
    let config = json!({ "source": path, "seed": seed, "resolved": resolved });
    Ok((format!("bench {}", table.name()), config, Value::Object(extra)))
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new())
}

fn finish_csv(path: &Path, w: csv::Writer<Vec<u8>>) -> Result<(), CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.into_error(),
    })?;
    write_atomic(path, &bytes)
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let file_name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(CliError::io(path))
}

pub fn write_matrix(path: &Path, header: &[String], x: &DenseMatrix) -> Result<(), CliError> {
    let mut w = csv_writer();
    w.write_record(header)?;
    for row in x.iter_rows() {
        w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    finish_csv(path, w)
}

pub fn write_vector(path: &Path, name: &str, v: &[f64]) -> Result<(), CliError> {
    let mut w = csv_writer();
    w.write_record([name])?;
    for x in v {
        w.write_record([fmt_f64(*x)])?;
    }
    finish_csv(path, w)
}

/// Reads a numeric CSV with a header row.
pub fn read_matrix(path: &Path) -> Result<DenseMatrix, CliError> {
    let file = fs::File::open(path).map_err(CliError::io(path))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let cols = rdr.headers().map_err(|e| parse_error(path, &e, 1))?.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_error(path, &e, rows as u64 + 2))?;
        let line = rec.position().map_or(rows as u64 + 2, |p| p.line());
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| CliError::Parse {
                path: path.to_path_buf(),
                row: line,
                column: j + 1,
                message: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    row: line,
                    column: j + 1,
                    message: format!("`{field}` is not finite"),
                });
            }
            data.push(v);
        }
        rows += 1;
    }
    if rows == 0 || cols == 0 {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            row: 2,
            column: 1,
            message: "no data rows".into(),
        });
    }
    Ok(DenseMatrix::new(rows, cols, data)?)
}

fn parse_error(path: &Path, e: &csv::Error, fallback_row: u64) -> CliError {
    let row = e.position().map_or(fallback_row, |p| p.line());
    CliError::Parse {
        path: path.to_path_buf(),
        row,
        column: 1,
        message: e.to_string(),
    }
}

/// Reads a single-column numeric CSV with a header row.
pub fn read_vector(path: &Path) -> Result<Vec<f64>, CliError> {
    let m = read_matrix(path)?;
    if m.cols() != 1 {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            row: 1,
            column: 2,
            message: format!("expected one column, found {}", m.cols()),
        });
    }
    Ok(m.into_data())
}
