//! C ABI over `likert_cluster`.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `lc_*_free`. Every fallible call returns an [`LcStatus`]; on
//! failure a message for the calling thread is available from
//! [`lc_last_error_message`]. Panics never unwind into C: they surface as
//! `LC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use likert_cluster::{
    evaluate, kmeans, pca, pipeline, ComponentSelection, Error, ErrorKind, FeatureMatrix,
    KMeansParams, PcaModel, PipelineConfig, ScalerKind, ScalerModel,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    DataError = 4,
    NumericError = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcScalerKind {
    Zscore = 0,
    Robust = 1,
}

/// Row-major matrix of finite doubles.
pub struct LcMatrix(FeatureMatrix);

/// Result of a k-means fit.
pub struct LcClustering(likert_cluster::ClusteringResult);

/// Fitted principal component model.
pub struct LcPca(PcaModel);

/// Fitted column scaler.
pub struct LcScaler(ScalerModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(LcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match (&e, e.kind()) {
            (Error::InvalidArgument(_), _) => LcStatus::InvalidArgument,
            (_, ErrorKind::Config) => LcStatus::ConfigError,
            (_, ErrorKind::Data) => LcStatus::DataError,
            (_, ErrorKind::Numeric) => LcStatus::NumericError,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LcStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(LcStatus::InvalidArgument, msg.into())
}

/// Runs `f`, records any failure for the calling thread and maps it to a
/// status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LcStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            LcStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn copy_out<T: Copy>(src: &[T], out: *mut T, len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if len < src.len() {
        return Err(invalid(format!(
            "buffer holds {len} values, {} needed",
            src.len()
        )));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

unsafe fn drop_handle<T>(p: *mut T) {
    if !p.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(p))));
    }
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn lc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the last failed call on this thread, or null. The
/// pointer stays valid until the next `lc_*` call on the same thread.
#[no_mangle]
pub extern "C" fn lc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `rows * cols` row-major values into a new matrix.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn lc_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut LcMatrix,
) -> LcStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if rows == 0 || cols == 0 {
            return Err(invalid("matrix needs at least one row and one column"));
        }
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| invalid("rows * cols overflows"))?;
        let values = std::slice::from_raw_parts(data, len).to_vec();
        let row_ids = (0..rows).map(|i| format!("r{i}")).collect();
        let columns = (0..cols).map(|j| format!("x{j}")).collect();
        put(out, LcMatrix(FeatureMatrix::new(row_ids, columns, values)?))
    })
}

/// # Safety
/// `m` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lc_matrix_free(m: *mut LcMatrix) {
    drop_handle(m)
}

/// # Safety
/// `m` must be a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn lc_matrix_rows(m: *const LcMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.nrows())
}

/// # Safety
/// `m` must be a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn lc_matrix_cols(m: *const LcMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.ncols())
}

/// Copies the row-major values into `out` (at least rows * cols doubles).
///
/// # Safety
/// `m` must be a live handle and `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lc_matrix_values(
    m: *const LcMatrix,
    out: *mut f64,
    len: usize,
) -> LcStatus {
    guard(|| copy_out(deref(m, "matrix")?.0.values(), out, len))
}

/// Fits a z-score or robust scaler to `m`.
///
/// # Safety
/// `m` must be a live matrix handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_scaler_fit(
    m: *const LcMatrix,
    kind: LcScalerKind,
    out: *mut *mut LcScaler,
) -> LcStatus {
    guard(|| {
        let kind = match kind {
            LcScalerKind::Zscore => ScalerKind::Zscore,
            LcScalerKind::Robust => ScalerKind::Robust,
        };
        put(
            out,
            LcScaler(ScalerModel::fit(kind, &deref(m, "matrix")?.0)?),
        )
    })
}

/// Applies a fitted scaler, producing a new matrix.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_scaler_transform(
    s: *const LcScaler,
    m: *const LcMatrix,
    out: *mut *mut LcMatrix,
) -> LcStatus {
    guard(|| {
        let scaled = deref(s, "scaler")?.0.transform(&deref(m, "matrix")?.0)?;
        put(out, LcMatrix(scaled))
    })
}

/// # Safety
/// `s` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lc_scaler_free(s: *mut LcScaler) {
    drop_handle(s)
}

/// Fits PCA keeping the fewest components whose cumulative explained
/// variance reaches `threshold` (in (0, 1]).
///
/// # Safety
/// `m` must be a live matrix handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_pca_fit(
    m: *const LcMatrix,
    threshold: f64,
    out: *mut *mut LcPca,
) -> LcStatus {
    guard(|| {
        let model = pca::fit_with(
            &deref(m, "matrix")?.0,
            ComponentSelection::VarianceThreshold(threshold),
        )?;
        put(out, LcPca(model))
    })
}

/// Fits PCA keeping exactly `components` components.
///
/// # Safety
/// `m` must be a live matrix handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_pca_fit_components(
    m: *const LcMatrix,
    components: usize,
    out: *mut *mut LcPca,
) -> LcStatus {
    guard(|| {
        let model = pca::fit_with(
            &deref(m, "matrix")?.0,
            ComponentSelection::Fixed(components),
        )?;
        put(out, LcPca(model))
    })
}

/// # Safety
/// `p` must be a live PCA handle.
#[no_mangle]
pub unsafe extern "C" fn lc_pca_components(p: *const LcPca) -> usize {
    p.as_ref().map_or(0, |p| p.0.n_components())
}

/// Copies the explained variance ratio of each retained component.
///
/// # Safety
/// `p` must be live and `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lc_pca_explained_ratio(
    p: *const LcPca,
    out: *mut f64,
    len: usize,
) -> LcStatus {
    guard(|| copy_out(&deref(p, "pca")?.0.explained_ratio, out, len))
}

/// Projects `m` onto the retained components.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_pca_project(
    p: *const LcPca,
    m: *const LcMatrix,
    out: *mut *mut LcMatrix,
) -> LcStatus {
    guard(|| {
        let projected = pca::project(&deref(p, "pca")?.0, &deref(m, "matrix")?.0)?;
        put(out, LcMatrix(projected))
    })
}

/// # Safety
/// `p` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lc_pca_free(p: *mut LcPca) {
    drop_handle(p)
}

/// k-means++ seeded Lloyd's algorithm; the best of `restarts` runs is kept.
///
/// # Safety
/// `m` must be a live matrix handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_kmeans_fit(
    m: *const LcMatrix,
    k: usize,
    seed: u64,
    restarts: usize,
    max_iter: usize,
    tol: f64,
    out: *mut *mut LcClustering,
) -> LcStatus {
    guard(|| {
        let params = KMeansParams {
            seed,
            restarts,
            max_iter,
            tol,
        };
        put(
            out,
            LcClustering(kmeans::fit(&deref(m, "matrix")?.0, k, &params)?),
        )
    })
}

/// # Safety
/// `c` must be a live clustering handle.
#[no_mangle]
pub unsafe extern "C" fn lc_clustering_k(c: *const LcClustering) -> usize {
    c.as_ref().map_or(0, |c| c.0.k())
}

/// Number of clustered points.
///
/// # Safety
/// `c` must be a live clustering handle.
#[no_mangle]
pub unsafe extern "C" fn lc_clustering_len(c: *const LcClustering) -> usize {
    c.as_ref().map_or(0, |c| c.0.assignments.len())
}

/// Sum of squared distances to the assigned centroids, or NaN for null.
///
/// # Safety
/// `c` must be a live clustering handle.
#[no_mangle]
pub unsafe extern "C" fn lc_clustering_inertia(c: *const LcClustering) -> f64 {
    c.as_ref().map_or(f64::NAN, |c| c.0.inertia)
}

/// Copies the 0-based cluster index of every point.
///
/// # Safety
/// `c` must be live and `out` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn lc_clustering_assignments(
    c: *const LcClustering,
    out: *mut usize,
    len: usize,
) -> LcStatus {
    guard(|| copy_out(&deref(c, "clustering")?.0.assignments, out, len))
}

/// Copies the centroids row-major (k rows of the input dimension).
///
/// # Safety
/// `c` must be live and `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lc_clustering_centroids(
    c: *const LcClustering,
    out: *mut f64,
    len: usize,
) -> LcStatus {
    guard(|| {
        let flat: Vec<f64> = deref(c, "clustering")?.0.centroids.concat();
        copy_out(&flat, out, len)
    })
}

/// # Safety
/// `c` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lc_clustering_free(c: *mut LcClustering) {
    drop_handle(c)
}

/// Mean silhouette of a partition of `m`; per-point values are copied into
/// `per_point` when it is not null (it must then hold `n` doubles).
///
/// # Safety
/// `m` must be live, `assignments` must hold `n` values and `mean` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn lc_silhouette(
    m: *const LcMatrix,
    assignments: *const usize,
    n: usize,
    mean: *mut f64,
    per_point: *mut f64,
) -> LcStatus {
    guard(|| {
        if assignments.is_null() {
            return Err(null("assignments"));
        }
        if mean.is_null() {
            return Err(null("mean"));
        }
        let labels = std::slice::from_raw_parts(assignments, n);
        let report = evaluate::silhouette(&deref(m, "matrix")?.0, labels)?;
        if !per_point.is_null() {
            copy_out(&report.per_point, per_point, n)?;
        }
        *mean = report.mean;
        Ok(())
    })
}

/// Runs the full pipeline from a JSON config file and writes its artifacts.
/// `k` and `silhouette` receive the chosen K and mean silhouette when not
/// null.
///
/// # Safety
/// `config_path` must be a nul-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn lc_run_pipeline(
    config_path: *const c_char,
    k: *mut usize,
    silhouette: *mut f64,
) -> LcStatus {
    guard(|| {
        if config_path.is_null() {
            return Err(null("config_path"));
        }
        let path = CStr::from_ptr(config_path)
            .to_str()
            .map_err(|_| invalid("config_path is not UTF-8"))?;
        let config = PipelineConfig::load(path)?;
        let summary = pipeline::run(&config)?;
        if !k.is_null() {
            *k = summary.k;
        }
        if !silhouette.is_null() {
            *silhouette = summary.silhouette_mean;
        }
        Ok(())
    })
}
