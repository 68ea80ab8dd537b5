use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sketchls::datagen::{self, DataSpec, Distribution};
use sketchls::linalg::DenseMatrix;
use sketchls::solvers;

fn sketchls(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sketchls"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .env_remove("SKETCHLS_THREADS")
        .output()
        .unwrap()
}

fn ok(args: &[&str], out: &Path) -> Output {
    let o = sketchls(args, out);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn numbers(path: &Path) -> Vec<Vec<f64>> {
    read_csv(path)
        .1
        .iter()
        .map(|r| r.iter().map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn gen_writes_three_files_of_the_right_shape() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &["--seed", "7", "gen", "--dist", "normal", "--n", "4096", "--d", "10"],
        dir.path(),
    );
    let (header, rows) = read_csv(&dir.path().join("X.csv"));
    assert_eq!(header, (1..=10).map(|j| format!("x{j}")).collect::<Vec<_>>());
    assert_eq!(rows.len(), 4096);
    assert!(rows.iter().all(|r| r.len() == 10));
    assert_eq!(read_csv(&dir.path().join("y.csv")).1.len(), 4096);
    assert_eq!(read_csv(&dir.path().join("beta_star.csv")).1.len(), 10);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "gen");
    assert_eq!(manifest["config"]["data"]["seed"], 7);
}

#[test]
fn gen_is_deterministic_and_matches_the_library() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["--seed", "7", "gen", "--dist", "t2", "--n", "300", "--d", "3"];
    ok(&args, a.path());
    ok(&args, b.path());
    for f in ["X.csv", "y.csv", "beta_star.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    // written floats parse back to the generated values exactly
    let (x, _, _) = datagen::generate_raw(&DataSpec::new(Distribution::T2, 300, 3, 7), false).unwrap();
    let parsed: Vec<f64> = numbers(&a.path().join("X.csv")).concat();
    assert_eq!(parsed, x.data());
}

#[test]
fn unknown_distribution_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = sketchls(&["gen", "--dist", "cauchy", "--n", "10", "--d", "2"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("invalid flag"), "{}", stderr(&o));
    assert!(stderr(&o).contains("cauchy"));
}

#[test]
fn full_solve_is_one_row_with_the_least_squares_fit() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &[
            "solve",
            "--x",
            &fixture("small_x.csv"),
            "--y",
            &fixture("small_y.csv"),
            "--method",
            "full",
        ],
        dir.path(),
    );
    let (header, rows) = read_csv(&dir.path().join("trace.csv"));
    assert_eq!(header, ["iter", "alpha", "objective", "dist_to_ls"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 0.0);

    let x = numbers(Path::new(&fixture("small_x.csv")));
    let y: Vec<f64> = numbers(Path::new(&fixture("small_y.csv"))).concat();
    let x = DenseMatrix::from_rows(&x);
    let (xc, yc) = datagen::center(&x, &y).unwrap();
    let want = solvers::full_ls(&xc, &yc).unwrap();
    let got: Vec<f64> = numbers(&dir.path().join("beta.csv")).concat();
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
    }
}

#[test]
fn aopt_ihs_solve_converges_on_the_fixture() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &[
            "solve",
            "--x",
            &fixture("small_x.csv"),
            "--y",
            &fixture("small_y.csv"),
            "--method",
            "aopt-ihs",
            "--m",
            "40",
            "--iters",
            "60",
        ],
        dir.path(),
    );
    let rows = read_csv(&dir.path().join("trace.csv")).1;
    assert_eq!(rows.len(), 61);
    assert_eq!(rows[0][1], "");
    let last: f64 = rows[60][3].parse().unwrap();
    assert!(last <= 1e-8, "final distance {last}");
    let objective: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(solvers::objective_increases(&objective, 0.0), 0);
}

#[test]
fn unit_step_methods_report_alpha_one() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &[
            "--seed",
            "3",
            "solve",
            "--x",
            &fixture("small_x.csv"),
            "--y",
            &fixture("small_y.csv"),
            "--method",
            "ihs",
            "--m",
            "64",
            "--iters",
            "5",
        ],
        dir.path(),
    );
    let rows = read_csv(&dir.path().join("trace.csv")).1;
    assert!(rows[1..].iter().all(|r| r[1] == "1"));
}

#[test]
fn response_length_mismatch_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let short = dir.path().join("y_short.csv");
    let text = fs::read_to_string(fixture("small_y.csv")).unwrap();
    let kept: Vec<&str> = text.lines().take(150).collect();
    fs::write(&short, kept.join("\n")).unwrap();
    let o = sketchls(
        &[
            "solve",
            "--x",
            &fixture("small_x.csv"),
            "--y",
            short.to_str().unwrap(),
            "--method",
            "full",
        ],
        dir.path(),
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("y_short.csv: row"), "{}", stderr(&o));
    assert!(stderr(&o).contains("149 values but X has 200 rows"), "{}", stderr(&o));
}

#[test]
fn malformed_cells_are_located() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("x.csv");
    fs::write(&bad, "x1,x2\n1,2\n3,oops\n").unwrap();
    let y = dir.path().join("y.csv");
    fs::write(&y, "y\n1\n2\n").unwrap();
    let o = sketchls(
        &[
            "solve",
            "--x",
            bad.to_str().unwrap(),
            "--y",
            y.to_str().unwrap(),
            "--method",
            "full",
        ],
        dir.path(),
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("row 3, column 2"), "{}", stderr(&o));
}

fn bench(table: &str, config: &str, dir: &Path) -> Output {
    let path = dir.join("config.json");
    fs::write(&path, config).unwrap();
    sketchls(&["bench", table, "--config", path.to_str().unwrap()], dir)
}

#[test]
fn missing_sketch_size_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = bench("converge", r#"{"dist":"normal","d":4,"n":256,"reps":2}"#, dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("config key `m`: missing"), "{}", stderr(&o));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = bench(
        "delta",
        r#"{"dist":"normal","d":4,"n":256,"m":32,"reps":2,"iters":3}"#,
        dir.path(),
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("`iters`"), "{}", stderr(&o));
}

#[test]
fn converge_writes_the_curve_schema() {
    let dir = tempfile::tempdir().unwrap();
    let o = bench(
        "converge",
        r#"{"dist":"normal","d":4,"n":512,"m":48,"reps":4,"iters":5,"seed":3}"#,
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("converge_mse.csv"));
    assert_eq!(header, ["method", "iter", "mse1", "mse2", "failures"]);
    // four methods, iterations 0..=5
    assert_eq!(rows.len(), 24);
    let methods: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    for m in ["ihs", "acc-ihs", "pw-gradient", "aopt-ihs"] {
        assert!(methods.contains(&m));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "bench converge");
    assert!(manifest["prng_algorithm"].as_str().unwrap().contains("ChaCha8"));
}

#[test]
fn time_table_statuses_and_blank_means() {
    let dir = tempfile::tempdir().unwrap();
    let o = bench(
        "time",
        r#"{"dist":"normal","d":5,"n":1024,"m":128,"reps":4,"iters":3,"timing":false,"methods":["ihs","aopt-ihs"]}"#,
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("time.csv"));
    assert_eq!(header, ["method", "dist", "d", "mean_seconds", "mean_iters", "status"]);
    for r in &rows {
        assert!(["ok", "diverge", "cap"].contains(&r[5].as_str()));
        // three iterations cannot reach 1e-10
        assert_eq!(r[5], "cap");
        assert_eq!(r[3], "");
        assert_eq!(r[4], "");
    }

    let o = bench(
        "time",
        r#"{"dist":"normal","d":5,"n":1024,"m":128,"reps":4,"timing":false,"methods":["aopt-ihs"]}"#,
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&dir.path().join("time.csv")).1;
    assert_eq!(rows[0][5], "ok");
    assert_eq!(rows[0][3], "");
    assert!(rows[0][4].parse::<f64>().unwrap() >= 1.0);
}

#[test]
fn seed_flag_overrides_the_config() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = r#"{"dist":"normal","d":4,"n":256,"m":32,"reps":3,"seed":1}"#;
    assert!(bench("delta", cfg, a.path()).status.success());
    let path = b.path().join("config.json");
    fs::write(&path, cfg).unwrap();
    ok(
        &["--seed", "2", "bench", "delta", "--config", path.to_str().unwrap()],
        b.path(),
    );
    assert_ne!(
        fs::read(a.path().join("delta.csv")).unwrap(),
        fs::read(b.path().join("delta.csv")).unwrap()
    );
}
