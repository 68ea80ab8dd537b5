//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines are printed even when output is captured;
//! the process exits non-zero if any criterion fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use sketchls::bench::{self, DeltaVariant, ExperimentConfig, Initializer, Method, TimeStatus};
use sketchls::datagen::{DataSpec, Dataset, Distribution};
use sketchls::linalg::{self, dist2, norm2, DenseMatrix};
use sketchls::precond::{self, Preconditioner};
use sketchls::sketch::{self, Rng, SketchKind};
use sketchls::solvers::{self, SolveOptions};

/// Fixed before any criterion was run; not tuned.
const SEED: u64 = 20_240_611;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn within(elapsed: Duration, limit_secs: u64, detail: String) -> Verdict {
    if elapsed.as_secs_f64() < limit_secs as f64 {
        Ok(format!("{detail}; {:.2}s", elapsed.as_secs_f64()))
    } else {
        Err(format!(
            "{detail}; took {:.2}s, limit {limit_secs}s",
            elapsed.as_secs_f64()
        ))
    }
}

fn normal_data(n: usize, d: usize, seed: u64) -> Dataset {
    Dataset::generate(&DataSpec::new(Distribution::Normal, n, d, seed)).unwrap()
}

fn closed_form_equivalence() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for run in 0..50u64 {
        let ds = normal_data(256, 5, SEED + run);
        let opts = SolveOptions {
            record_sketches: true,
            ..SolveOptions::default()
        };
        let mut rng = Rng::derive(SEED, run, 7);
        let beta0 = vec![0.0; 5];
        let trace = solvers::ihs_solve(&ds.x, &ds.y, 64, 5, SketchKind::Srht, &mut rng, &beta0, &opts).unwrap();
        for t in 0..=trace.iterations() {
            let closed = solvers::lemma1_trajectory(&ds.x, &ds.y, &beta0, &trace.sketches[..t]).unwrap();
            let rel = dist2(&closed, &trace.betas[t]) / norm2(&closed).max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
        }
    }
    let detail = format!("worst relative gap {worst:.3e} (tol 1e-8) over 50 runs");
    if worst > 1e-8 {
        return Err(detail);
    }
    within(start.elapsed(), 10, detail)
}

fn contraction_bound_never_violated() -> Verdict {
    let start = Instant::now();
    let (mut pairs, mut violations, mut worst_ratio) = (0usize, 0usize, 0.0f64);
    // same bound with errors measured as ‖X(β̂ − β̂^LS)‖₂, reported alongside
    let (mut x_violations, mut x_worst) = (0usize, 0.0f64);
    let mut run = 0u64;
    while pairs < 200 {
        let ds = normal_data(256, 5, SEED + 1000 + run);
        let mut opts = SolveOptions::with_reference(ds.beta_ls.clone());
        opts.record_sketches = true;
        let mut rng = Rng::derive(SEED, run, 8);
        let beta0 = vec![0.0; 5];
        let trace = solvers::ihs_solve(&ds.x, &ds.y, 128, 5, SketchKind::Srht, &mut rng, &beta0, &opts).unwrap();
        let init_err = trace.dist_to_ls[0];
        let x_err = |b: &[f64]| {
            let e: Vec<f64> = b.iter().zip(&ds.beta_ls).map(|(p, q)| p - q).collect();
            norm2(&ds.x.matvec(&e).unwrap())
        };
        let x_init = x_err(&trace.betas[0]);
        let (mut e1, mut e2) = (0.0f64, 0.0f64);
        for t in 1..=trace.iterations() {
            let rep = solvers::isometry_eps(&ds.x, &trace.sketches[t - 1]).unwrap();
            if !rep.satisfies {
                break;
            }
            e1 = e1.max(rep.eps1);
            e2 = e2.max(rep.eps2);
            let Ok(bound) = solvers::theorem1_bound(e1, e2, t, init_err) else {
                break;
            };
            pairs += 1;
            let err = trace.dist_to_ls[t];
            worst_ratio = worst_ratio.max(err / bound);
            if err > bound {
                violations += 1;
            }
            let x_bound = bound / init_err * x_init;
            let xe = x_err(&trace.betas[t]);
            x_worst = x_worst.max(xe / x_bound);
            if xe > x_bound * (1.0 + 1e-12) {
                x_violations += 1;
            }
            if pairs == 200 {
                break;
            }
        }
        run += 1;
    }
    let detail = format!(
        "{violations} violations in {pairs} pairs, max error/bound {worst_ratio:.3}; \
         in the X-norm {x_violations} violations, max {x_worst:.3}"
    );
    if violations > 0 {
        return Err(detail);
    }
    within(start.elapsed(), 30, detail)
}

fn exact_line_search() -> Verdict {
    let mut iterations = 0usize;
    let mut worst_stat = 0.0f64;
    let mut increases = 0usize;
    let mut runs = 0usize;
    let mut seed = 0u64;
    while iterations < 100 {
        let dist = Distribution::ALL[seed as usize % Distribution::ALL.len()];
        let ds = Dataset::generate(&DataSpec::new(dist, 512, 8, SEED + 2000 + seed)).unwrap();
        seed += 1;
        let lambda = precond::lambda_rule(&ds.x, dist.default_lambda_rule());
        let trace = solvers::aopt_ihs_solve(&ds.x, &ds.y, 64, 10, lambda, &SolveOptions::default()).unwrap();
        runs += 1;
        increases += solvers::objective_increases(&trace.objective, ds.y.iter().map(|v| v * v).sum());
        for t in 1..=trace.iterations() {
            let alpha = trace.alphas[t - 1];
            let u: Vec<f64> = trace.betas[t]
                .iter()
                .zip(&trace.betas[t - 1])
                .map(|(a, b)| (a - b) / alpha)
                .collect();
            let v_prev = solvers::neg_gradient(&ds.x, &ds.y, &trace.betas[t - 1]);
            let v_now = solvers::neg_gradient(&ds.x, &ds.y, &trace.betas[t]);
            // ψ'(α) = uᵀXᵀ(Xβ̂_t − y) = −uᵀv_t
            let scale = norm2(&u) * norm2(&v_prev);
            if scale == 0.0 {
                continue;
            }
            worst_stat = worst_stat.max(linalg::dot(&u, &v_now).abs() / scale);
            iterations += 1;
        }
    }

    let mut worst_unit = 0.0f64;
    for k in 0..10u64 {
        let ds = normal_data(300, 6, SEED + 3000 + k);
        let exact = Preconditioner::from_matrix(linalg::gram(&ds.x)).unwrap();
        let beta0 = vec![1.0; 6];
        let trace = solvers::line_search_solve(&ds.x, &ds.y, &exact, 1, &beta0, &SolveOptions::default()).unwrap();
        worst_unit = worst_unit.max((trace.alphas[0] - 1.0).abs());
    }

    let detail = format!(
        "max |psi'| rel {worst_stat:.2e} over {iterations} iterations (tol 1e-8); \
         max |alpha - 1| with exact Gram {worst_unit:.2e} (tol 1e-10); \
         {increases} objective increases in {runs} runs"
    );
    if worst_stat <= 1e-8 && worst_unit <= 1e-10 && increases == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn trace_bounds() -> Verdict {
    let start = Instant::now();
    let mut rng = Rng::new(SEED);
    let (mut checks, mut v2, mut v3) = (0usize, 0usize, 0usize);
    let mut worst = 0.0f64;
    // d = 1 attains the bound with equality, so allow rounding at that tie
    let slack = 1.0 + 1e-12;
    for _ in 0..200 {
        let d = 1 + rng.below(5);
        let n = d + 1 + rng.below(64 - d);
        let heavy = rng.uniform() < 0.5;
        let data: Vec<f64> = (0..n * d)
            .map(|_| {
                let z = rng.normal();
                if heavy {
                    z / rng.normal().abs().max(0.05)
                } else {
                    z
                }
            })
            .collect();
        let x = DenseMatrix::new(n, d, data).unwrap();
        let q = linalg::gram(&x);
        for m in d..=n {
            let mask = sketch::aopt_select(&x, m).unwrap();
            let unscaled = precond::masked_gram(&x, &mask).unwrap();
            let c = linalg::sym_eigvals(&unscaled)[0];
            if c <= 0.0 || linalg::cholesky(&unscaled).is_err() {
                continue;
            }
            checks += 1;
            let tr_inv = linalg::cholesky(&unscaled).unwrap().inverse().trace();
            let b2 = precond::aopt_trace_bound(&x, &mask, c).unwrap();
            worst = worst.max(tr_inv / b2);
            if tr_inv > b2 * slack {
                v2 += 1;
            }
            let scaled = precond::build_m(&x, &mask, 0.0).unwrap();
            let inv = scaled.factor().inverse();
            let cov = inv.matmul(&q).unwrap().matmul(&inv).unwrap();
            let b3 = precond::hs_cov_trace_bound(&x, &mask, c).unwrap();
            worst = worst.max(cov.trace() / b3);
            if cov.trace() > b3 * slack {
                v3 += 1;
            }
        }
    }
    let detail = format!("{checks} (instance, m) checks: {v2} trace-inverse violations, {v3} covariance violations, max lhs/bound {worst:.16}");
    if v2 + v3 > 0 {
        return Err(detail);
    }
    within(start.elapsed(), 20, detail)
}

fn delta_table() -> Verdict {
    let start = Instant::now();
    let cfg = ExperimentConfig::desk(Distribution::Normal, 50, SEED);
    let rows = bench::run_delta_table(&cfg, &DeltaVariant::ALL).unwrap();
    let get = |v: DeltaVariant| rows.iter().find(|r| r.variant == v.name()).unwrap().delta_mean;
    let (zero, rule, srht, ident) = (
        get(DeltaVariant::Zero),
        get(DeltaVariant::RuleLambda),
        get(DeltaVariant::Srht),
        get(DeltaVariant::LambdaIdentity),
    );
    let checks = [
        ("delta(0) < 0", zero < 0.0),
        ("delta(rule) > 0.5", rule > 0.5),
        ("delta(rule) > delta(srht)", rule > srht),
        ("delta(srht) > delta(0)", srht > zero),
        ("|delta(lambda I)| <= 1e-9", ident.abs() <= 1e-9),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let detail = format!("delta(0)={zero:.4} delta(rule)={rule:.4} delta(srht)={srht:.4} delta(lambda I)={ident:.1e}");
    if !failed.is_empty() {
        return Err(format!("{detail}; failed: {}", failed.join(", ")));
    }
    within(start.elapsed(), 300, detail)
}

fn init_comparison() -> Verdict {
    let start = Instant::now();
    let cfg = ExperimentConfig::desk(Distribution::Normal, 10, SEED);
    let grid = [1 << 11, 1 << 13, 1 << 14];
    let rows = bench::run_init_comparison(&cfg, &grid, 1000).unwrap();
    let mse = |n: usize, e: Initializer| rows.iter().find(|r| r.n == n && r.estimator == e.name()).unwrap().mse1;
    let mut failed = Vec::new();
    let mut aopt = Vec::new();
    for &n in &grid {
        let a = mse(n, Initializer::AoptCs);
        let best = mse(n, Initializer::SrhtCs).min(mse(n, Initializer::LevCs));
        if a > best {
            failed.push(format!("aopt {a:.4} > random {best:.4} at n={n}"));
        }
        aopt.push(a);
    }
    for (w, n) in aopt.windows(2).zip(&grid[1..]) {
        if w[1] > w[0] {
            failed.push(format!("aopt mse rises to {:.4} at n={n}", w[1]));
        }
    }
    let detail = format!(
        "aopt mse1 {:?}; srht {:?}; lev {:?}",
        aopt.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
        grid.iter()
            .map(|&n| format!("{:.4}", mse(n, Initializer::SrhtCs)))
            .collect::<Vec<_>>(),
        grid.iter()
            .map(|&n| format!("{:.4}", mse(n, Initializer::LevCs)))
            .collect::<Vec<_>>(),
    );
    if !failed.is_empty() {
        return Err(format!("{detail}; {}", failed.join("; ")));
    }
    within(start.elapsed(), 300, detail)
}

fn iterations_to_precision() -> Verdict {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::desk(Distribution::Normal, 50, SEED);
    cfg.reps = 50;
    cfg.tol = 1e-10;
    cfg.n_iter = solvers::DEFAULT_ITER_CAP;
    cfg.methods = vec![Method::Ihs, Method::AoptIhs];
    cfg.timing = false;
    let rows = bench::run_time_to_precision(&cfg).unwrap();
    let get = |m: Method| rows.iter().find(|r| r.method == m.name()).unwrap();
    let (ihs, aopt) = (get(Method::Ihs), get(Method::AoptIhs));
    let detail = format!(
        "mean iterations ihs={:?} ({}) aopt-ihs={:?} ({})",
        ihs.mean_iters,
        ihs.status.name(),
        aopt.mean_iters,
        aopt.status.name()
    );
    let (Some(i), Some(a)) = (ihs.mean_iters, aopt.mean_iters) else {
        return Err(format!(
            "{detail}; a method did not reach the target in every replication"
        ));
    };
    let mut failed = Vec::new();
    if ihs.status != TimeStatus::Ok || aopt.status != TimeStatus::Ok {
        failed.push("status not ok".to_string());
    }
    if a >= i {
        failed.push("aopt-ihs does not need fewer iterations than ihs".to_string());
    }
    if !(5.0..=30.0).contains(&a) {
        failed.push("aopt-ihs mean iterations outside [5, 30]".to_string());
    }
    if !failed.is_empty() {
        return Err(format!("{detail}; {}", failed.join("; ")));
    }
    within(start.elapsed(), 600, detail)
}

fn srht_full_isometry() -> Verdict {
    let mut worst_eps = 0.0f64;
    for k in 0..20u64 {
        let n = 100 + 37 * k as usize;
        let ds = normal_data(n, 4, SEED + 4000 + k);
        let mut rng = Rng::derive(SEED, k, 9);
        let (sx, _) = sketch::srht_apply(&ds.x, None, sketch::padded_len(n), &mut rng).unwrap();
        let rep = solvers::isometry_eps(&ds.x, &sx).unwrap();
        worst_eps = worst_eps.max(rep.eps1).max(rep.eps2);
    }
    let mut rng = Rng::new(SEED);
    let (mut worst_inv, mut worst_norm) = (0.0f64, 0.0f64);
    for p in 0..=12 {
        let v: Vec<f64> = (0..1usize << p).map(|_| rng.normal()).collect();
        let hv = sketch::fwht(&v).unwrap();
        let back = sketch::fwht(&hv).unwrap();
        worst_inv = worst_inv.max(dist2(&back, &v) / norm2(&v));
        worst_norm = worst_norm.max((norm2(&hv) - norm2(&v)).abs() / norm2(&v));
    }
    let detail = format!(
        "max eps {worst_eps:.2e} (tol 1e-9); fwht involution {worst_inv:.2e}, norm {worst_norm:.2e} (tol 1e-12)"
    );
    if worst_eps <= 1e-9 && worst_inv <= 1e-12 && worst_norm <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run_bench(table: &str, config: &Path, threads: u32, out: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_sketchls"))
        .args(["--threads", &threads.to_string(), "--out-dir"])
        .arg(out)
        .args(["bench", table, "--config"])
        .arg(config)
        .status()
        .unwrap();
    assert!(status.success(), "bench {table} with {threads} threads failed");
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let configs = [
        ("converge", r#"{"dist":"t2","d":6,"n":1024,"m":64,"reps":12,"iters":8}"#),
        (
            "ridge",
            r#"{"dist":"lognormal","d":5,"n":512,"m":48,"reps":10,"iters":6}"#,
        ),
        (
            "init",
            r#"{"dist":"normal","d":4,"n_grid":[256,512],"budget":64,"reps":12}"#,
        ),
        (
            "delta",
            r#"{"dist":["normal","mixture"],"d":[4,6],"n":512,"m":64,"reps":8}"#,
        ),
        (
            "lambda-sweep",
            r#"{"dist":"t2","d":5,"n":512,"m":64,"reps":8,"proportions":[0.1,0.5]}"#,
        ),
        (
            "time",
            r#"{"dist":"normal","d":5,"n":1024,"m":128,"reps":10,"iters":200,"timing":false}"#,
        ),
    ];
    let mut compared = 0usize;
    let mut mismatched = Vec::new();
    for (table, body) in configs {
        let config = tmp.path().join(format!("{table}.json"));
        fs::write(&config, body).unwrap();
        let runs: Vec<Vec<(String, Vec<u8>)>> = [(1, "a"), (8, "b"), (8, "c"), (1, "d")]
            .iter()
            .map(|&(threads, tag)| {
                let out = tmp.path().join(format!("{table}-{tag}"));
                fs::create_dir_all(&out).unwrap();
                run_bench(table, &config, threads, &out);
                csv_files(&out)
            })
            .collect();
        if runs[0].is_empty() {
            mismatched.push(format!("{table}: no csv written"));
        }
        for other in &runs[1..] {
            compared += 1;
            if other != &runs[0] {
                mismatched.push(table.to_string());
            }
        }
    }
    let detail = format!("{compared} repeated runs across 6 benchmarks, threads 1 and 8");
    if mismatched.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; differing: {}", mismatched.join(", ")))
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 closed-form trajectory equivalence", closed_form_equivalence),
        ("2 isometry bound never violated", contraction_bound_never_violated),
        ("3 exact line search", exact_line_search),
        ("4 trace bounds", trace_bounds),
        ("5 delta table ordering", delta_table),
        ("6 initializer mse ordering", init_comparison),
        ("7 iterations to precision", iterations_to_precision),
        ("8 full srht isometry and fwht", srht_full_isometry),
        ("9 determinism across thread counts", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let verdict = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match verdict {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failures += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
