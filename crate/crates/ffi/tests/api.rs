//! Exercises the C entry points from Rust, the way a foreign caller would.

use std::ffi::{CStr, CString};
use std::ptr;

use likert_cluster_ffi::*;

fn last_error() -> String {
    let p = lc_last_error_message();
    assert!(!p.is_null(), "no error recorded");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn new_matrix(rows: usize, cols: usize, data: &[f64]) -> *mut LcMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { lc_matrix_new(rows, cols, data.as_ptr(), &mut m) },
        LcStatus::Ok
    );
    m
}

/// Two tight pairs on a line.
const PAIRS: [f64; 4] = [0.0, 1.0, 10.0, 11.0];

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(lc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn kmeans_round_trip() {
    let m = new_matrix(4, 1, &PAIRS);
    assert_eq!(unsafe { lc_matrix_rows(m) }, 4);
    assert_eq!(unsafe { lc_matrix_cols(m) }, 1);

    let mut c = ptr::null_mut();
    assert_eq!(
        unsafe { lc_kmeans_fit(m, 2, 42, 10, 300, 1e-4, &mut c) },
        LcStatus::Ok
    );
    assert_eq!(unsafe { lc_clustering_k(c) }, 2);
    assert_eq!(unsafe { lc_clustering_len(c) }, 4);
    assert!((unsafe { lc_clustering_inertia(c) } - 1.0).abs() < 1e-12);

    let mut labels = [9usize; 4];
    assert_eq!(
        unsafe { lc_clustering_assignments(c, labels.as_mut_ptr(), 4) },
        LcStatus::Ok
    );
    assert_eq!(labels[0], labels[1]);
    assert_eq!(labels[2], labels[3]);
    assert_ne!(labels[0], labels[2]);

    let mut centroids = [0.0; 2];
    assert_eq!(
        unsafe { lc_clustering_centroids(c, centroids.as_mut_ptr(), 2) },
        LcStatus::Ok
    );
    centroids.sort_by(f64::total_cmp);
    assert_eq!(centroids, [0.5, 10.5]);

    let mut mean = 0.0;
    let mut per_point = [0.0; 4];
    let status = unsafe { lc_silhouette(m, labels.as_ptr(), 4, &mut mean, per_point.as_mut_ptr()) };
    assert_eq!(status, LcStatus::Ok);
    assert!((per_point[0] - 9.5 / 10.5).abs() < 1e-12);
    assert!((mean - per_point.iter().sum::<f64>() / 4.0).abs() < 1e-12);

    unsafe {
        lc_clustering_free(c);
        lc_matrix_free(m);
    }
}

#[test]
fn scaler_and_pca_chain() {
    let data = [1.0, 2.0, 2.0, 4.1, 3.0, 5.9, 4.0, 8.2, 5.0, 9.8];
    let m = new_matrix(5, 2, &data);

    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { lc_scaler_fit(m, LcScalerKind::Zscore, &mut s) },
        LcStatus::Ok
    );
    let mut z = ptr::null_mut();
    assert_eq!(unsafe { lc_scaler_transform(s, m, &mut z) }, LcStatus::Ok);
    let mut values = [0.0; 10];
    assert_eq!(
        unsafe { lc_matrix_values(z, values.as_mut_ptr(), 10) },
        LcStatus::Ok
    );
    let col0_mean: f64 = values.iter().step_by(2).sum::<f64>() / 5.0;
    assert!(col0_mean.abs() < 1e-12);

    let mut p = ptr::null_mut();
    assert_eq!(unsafe { lc_pca_fit(z, 0.9, &mut p) }, LcStatus::Ok);
    assert_eq!(unsafe { lc_pca_components(p) }, 1);
    let mut ratio = [0.0; 1];
    assert_eq!(
        unsafe { lc_pca_explained_ratio(p, ratio.as_mut_ptr(), 1) },
        LcStatus::Ok
    );
    assert!(ratio[0] > 0.9);

    let mut projected = ptr::null_mut();
    assert_eq!(
        unsafe { lc_pca_project(p, z, &mut projected) },
        LcStatus::Ok
    );
    assert_eq!(unsafe { lc_matrix_cols(projected) }, 1);
    assert_eq!(unsafe { lc_matrix_rows(projected) }, 5);

    let mut full = ptr::null_mut();
    assert_eq!(
        unsafe { lc_pca_fit_components(z, 2, &mut full) },
        LcStatus::Ok
    );
    assert_eq!(unsafe { lc_pca_components(full) }, 2);

    unsafe {
        lc_pca_free(full);
        lc_matrix_free(projected);
        lc_pca_free(p);
        lc_matrix_free(z);
        lc_scaler_free(s);
        lc_matrix_free(m);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { lc_matrix_new(2, 2, ptr::null(), &mut m) },
        LcStatus::NullPointer
    );
    assert!(last_error().contains("data"));

    let bad = [0.0, f64::NAN];
    assert_eq!(
        unsafe { lc_matrix_new(2, 1, bad.as_ptr(), &mut m) },
        LcStatus::NumericError
    );

    let m = new_matrix(4, 1, &PAIRS);
    let mut c = ptr::null_mut();
    assert_eq!(
        unsafe { lc_kmeans_fit(m, 0, 1, 1, 10, 0.0, &mut c) },
        LcStatus::InvalidArgument
    );
    assert!(c.is_null());

    let same = new_matrix(3, 1, &[2.0, 2.0, 2.0]);
    assert_eq!(
        unsafe { lc_kmeans_fit(same, 2, 1, 1, 10, 0.0, &mut c) },
        LcStatus::NumericError
    );
    assert!(last_error().contains("distinct"));

    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { lc_pca_fit(same, 0.5, &mut p) },
        LcStatus::NumericError
    );
    assert_eq!(unsafe { lc_pca_fit(m, 1.5, &mut p) }, LcStatus::ConfigError);

    // buffer too small
    assert_eq!(
        unsafe { lc_kmeans_fit(m, 2, 1, 2, 10, 0.0, &mut c) },
        LcStatus::Ok
    );
    let mut one = [0usize; 1];
    assert_eq!(
        unsafe { lc_clustering_assignments(c, one.as_mut_ptr(), 1) },
        LcStatus::InvalidArgument
    );

    // a success clears the message
    assert_eq!(
        unsafe { lc_clustering_assignments(c, [0usize; 4].as_mut_ptr(), 4) },
        LcStatus::Ok
    );
    assert!(lc_last_error_message().is_null());

    assert_eq!(unsafe { lc_clustering_k(ptr::null()) }, 0);
    assert!(unsafe { lc_clustering_inertia(ptr::null()) }.is_nan());
    unsafe {
        lc_clustering_free(c);
        lc_matrix_free(same);
        lc_matrix_free(m);
        lc_matrix_free(ptr::null_mut());
    }
}

#[test]
fn pipeline_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("respondent_id");
    for j in 0..84 {
        csv.push_str(&format!(",q{j}"));
    }
    csv.push('\n');
    for i in 0..30usize {
        csv.push_str(&format!("r{i}"));
        for j in 0..84usize {
            let top = if j < 24 { 7 } else { 5 };
            csv.push_str(&format!(",{}", 1 + (i * 7 + j * 3 + (i % 3) * j) % top));
        }
        csv.push('\n');
    }
    std::fs::write(dir.path().join("survey.csv"), csv).unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"input_path": "survey.csv", "output_dir": "out", "k": 3, "restarts": 3}"#,
    )
    .unwrap();

    let path = CString::new(config.to_str().unwrap()).unwrap();
    let mut k = 0usize;
    let mut s = f64::NAN;
    let status = unsafe { lc_run_pipeline(path.as_ptr(), &mut k, &mut s) };
    assert_eq!(status, LcStatus::Ok, "{}", last_error());
    assert_eq!(k, 3);
    assert!((-1.0..=1.0).contains(&s));
    assert!(dir.path().join("out/report.json").exists());

    let missing = CString::new("/nonexistent/config.json").unwrap();
    assert_eq!(
        unsafe { lc_run_pipeline(missing.as_ptr(), ptr::null_mut(), ptr::null_mut()) },
        LcStatus::ConfigError
    );
    assert_eq!(
        unsafe { lc_run_pipeline(ptr::null(), ptr::null_mut(), ptr::null_mut()) },
        LcStatus::NullPointer
    );
}
