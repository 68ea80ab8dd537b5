//! The generated header declares the full surface and a C program built
//! against it links and runs.

use std::path::{Path, PathBuf};
use std::process::Command;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/sketchls.h")).unwrap();
    for name in [
        "sls_version",
        "sls_last_error",
        "sls_matrix_new",
        "sls_matrix_free",
        "sls_full_ls",
        "sls_aopt_select",
        "sls_lambda_rule",
        "sls_delta",
        "sls_aopt_ihs_solve",
        "sls_ihs_solve",
        "sls_trace_beta",
        "sls_trace_errors",
        "sls_trace_free",
        "typedef struct SlsMatrix SlsMatrix",
        "typedef struct SlsTrace SlsTrace",
        "SLS_STATUS_NOT_POSITIVE_DEFINITE = 4",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

fn static_lib() -> Option<PathBuf> {
    // tests run from target/<profile>/deps
    let deps = std::env::current_exe().ok()?.parent()?.to_path_buf();
    let profile_dir = deps.parent()?;
    let direct = profile_dir.join("libsketchls_ffi.a");
    if direct.exists() {
        return Some(direct);
    }
    std::fs::read_dir(&deps)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("libsketchls_ffi") && n.ends_with(".a"))
        })
        .max_by_key(|p| p.metadata().and_then(|m| m.modified()).ok())
}

fn have_cc() -> bool {
    Command::new("cc")
        .arg("--version")
        .output()
        .is_ok_and(|o| o.status.success())
}

#[test]
fn c_program_links_and_runs() {
    let Some(lib) = static_lib() else {
        eprintln!("skipping: static library not found next to the test binary");
        return;
    };
    if !have_cc() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(crate_dir().join("examples/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "compiling against {}", lib.display());
    let out = Command::new(Path::new(&exe)).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("full 1.000000000000 2.000000000000 3.000000000000"),
        "{text}"
    );
    assert!(text.contains("mismatch status 2: dimension mismatch"), "{text}");
    assert!(
        text.contains(&format!("version {}", env!("CARGO_PKG_VERSION"))),
        "{text}"
    );
}
