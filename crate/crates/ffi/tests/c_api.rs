use std::ffi::CStr;
use std::ptr;

use sketchls::datagen::{DataSpec, Dataset, Distribution};
use sketchls_ffi::*;

fn last_error() -> String {
    let p = sls_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn dataset() -> Dataset {
    Dataset::generate(&DataSpec::new(Distribution::Normal, 200, 4, 9)).unwrap()
}

fn handle(ds: &Dataset) -> *mut SlsMatrix {
    let mut m = ptr::null_mut();
    let st = unsafe { sls_matrix_new(ds.x.rows(), ds.x.cols(), ds.x.data().as_ptr(), &mut m) };
    assert_eq!(st, SlsStatus::Ok);
    m
}

#[test]
fn matrix_lifecycle_and_full_ls() {
    let ds = dataset();
    let m = handle(&ds);
    unsafe {
        assert_eq!(sls_matrix_rows(m), 200);
        assert_eq!(sls_matrix_cols(m), 4);
        let mut beta = [0.0; 4];
        assert_eq!(
            sls_full_ls(m, ds.y.as_ptr(), ds.y.len(), beta.as_mut_ptr(), 4),
            SlsStatus::Ok
        );
        for (a, b) in beta.iter().zip(&ds.beta_ls) {
            assert!((a - b).abs() <= 1e-12);
        }
        assert!(sls_last_error().is_null());
        sls_matrix_free(m);
        sls_matrix_free(ptr::null_mut());
    }
}

#[test]
fn errors_map_to_codes() {
    let ds = dataset();
    let m = handle(&ds);
    unsafe {
        let mut beta = [0.0; 4];
        let st = sls_full_ls(m, ds.y.as_ptr(), 199, beta.as_mut_ptr(), 4);
        assert_eq!(st, SlsStatus::DimensionMismatch);
        assert!(last_error().contains("dimension mismatch"));

        let st = sls_full_ls(m, ds.y.as_ptr(), 200, beta.as_mut_ptr(), 3);
        assert_eq!(st, SlsStatus::BufferTooSmall);

        let st = sls_full_ls(ptr::null(), ds.y.as_ptr(), 200, beta.as_mut_ptr(), 4);
        assert_eq!(st, SlsStatus::NullPointer);

        let mut idx = [0usize; 4];
        assert_eq!(sls_aopt_select(m, 0, idx.as_mut_ptr(), 4), SlsStatus::BadSubsampleSize);

        let bad = [1.0, f64::NAN];
        let mut h = ptr::null_mut();
        assert_eq!(sls_matrix_new(1, 2, bad.as_ptr(), &mut h), SlsStatus::NonFinite);
        assert!(h.is_null());

        let rank1 = [1.0, 2.0, 2.0, 4.0, 3.0, 6.0];
        assert_eq!(sls_matrix_new(3, 2, rank1.as_ptr(), &mut h), SlsStatus::Ok);
        let y = [1.0, 2.0, 3.0];
        assert_eq!(
            sls_full_ls(h, y.as_ptr(), 3, beta.as_mut_ptr(), 2),
            SlsStatus::NotPositiveDefinite
        );
        sls_matrix_free(h);
        sls_matrix_free(m);
    }
}

#[test]
fn aopt_select_matches_core() {
    let ds = dataset();
    let m = handle(&ds);
    let mut idx = [0usize; 10];
    unsafe {
        assert_eq!(sls_aopt_select(m, 10, idx.as_mut_ptr(), 10), SlsStatus::Ok);
        sls_matrix_free(m);
    }
    let mask = sketchls::sketch::aopt_select(&ds.x, 10).unwrap();
    assert_eq!(&idx[..], mask.selected());
}

#[test]
fn solves_through_handles() {
    let ds = dataset();
    let m = handle(&ds);
    unsafe {
        let mut lambda = 0.0;
        assert_eq!(
            sls_lambda_rule(m, SlsLambdaRule::Concentrated, 0.0, &mut lambda),
            SlsStatus::Ok
        );
        let total: f64 = ds.x.data().iter().map(|v| v * v).sum();
        assert!((lambda - 0.1 * total).abs() <= 1e-9 * total);

        let mut delta = 0.0;
        assert_eq!(sls_delta(m, 20, lambda, &mut delta), SlsStatus::Ok);
        assert!(delta < 1.0);

        let mut t = ptr::null_mut();
        let st = sls_aopt_ihs_solve(m, ds.y.as_ptr(), 200, 20, 60, lambda, &mut t);
        assert_eq!(st, SlsStatus::Ok);
        let iters = sls_trace_iterations(t);
        assert!(iters >= 1);
        assert_eq!(sls_trace_dim(t), 4);
        let (mut f, mut e) = (0.0, 0.0);
        assert_eq!(sls_trace_errors(t, iters, &mut f, &mut e), SlsStatus::Ok);
        assert!(e <= 1e-6, "{e}");
        let mut a = 0.0;
        assert_eq!(sls_trace_alpha(t, 1, &mut a), SlsStatus::Ok);
        assert!(a > 0.0);
        assert_eq!(sls_trace_alpha(t, 0, &mut a), SlsStatus::InvalidArgument);
        let mut beta = [0.0; 4];
        assert_eq!(
            sls_trace_beta(t, iters + 1, beta.as_mut_ptr(), 4),
            SlsStatus::InvalidArgument
        );
        sls_trace_free(t);

        let mut t = ptr::null_mut();
        let st = sls_ihs_solve(m, ds.y.as_ptr(), 200, 128, 20, SlsSketch::Srht, 3, &mut t);
        assert_eq!(st, SlsStatus::Ok);
        assert_eq!(sls_trace_iterations(t), 20);
        assert_eq!(sls_trace_alpha(t, 3, &mut a), SlsStatus::Ok);
        assert_eq!(a, 1.0);
        assert_eq!(sls_trace_beta(t, 20, beta.as_mut_ptr(), 4), SlsStatus::Ok);
        let err: f64 = beta
            .iter()
            .zip(&ds.beta_ls)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-6, "{err}");
        sls_trace_free(t);

        let st = sls_ihs_solve(m, ds.y.as_ptr(), 200, 2, 3, SlsSketch::Uniform, 3, &mut t);
        assert_eq!(st, SlsStatus::NotPositiveDefinite);
        assert!(last_error().starts_with("iteration 1"));
        sls_matrix_free(m);
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(sls_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
