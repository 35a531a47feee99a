#ifndef LIKERT_CLUSTER_H
#define LIKERT_CLUSTER_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LcStatus {
  LC_STATUS_OK = 0,
  LC_STATUS_NULL_POINTER = 1,
  LC_STATUS_INVALID_ARGUMENT = 2,
  LC_STATUS_CONFIG_ERROR = 3,
  LC_STATUS_DATA_ERROR = 4,
  LC_STATUS_NUMERIC_ERROR = 5,
  LC_STATUS_PANIC = 6,
} LcStatus;

typedef enum LcScalerKind {
  LC_SCALER_KIND_ZSCORE = 0,
  LC_SCALER_KIND_ROBUST = 1,
} LcScalerKind;

/**
 * Result of a k-means fit.
 */
typedef struct LcClustering LcClustering;

/**
 * Row-major matrix of finite doubles.
 */
typedef struct LcMatrix LcMatrix;

/**
 * Fitted principal component model.
 */
typedef struct LcPca LcPca;

/**
 * Fitted column scaler.
 */
typedef struct LcScaler LcScaler;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *lc_version(void);

/**
 * Message describing the last failed call on this thread, or null. The
 * pointer stays valid until the next `lc_*` call on the same thread.
 */
const char *lc_last_error_message(void);

/**
 * Copies `rows * cols` row-major values into a new matrix.
 *
 * # Safety
 * `data` must point to `rows * cols` readable doubles.
 */
enum LcStatus lc_matrix_new(size_t rows, size_t cols, const double *data, struct LcMatrix **out);

/**
 * # Safety
 * `m` must be null or a handle from this library not yet freed.
 */
void lc_matrix_free(struct LcMatrix *m);

/**
 * # Safety
 * `m` must be a live matrix handle.
 */
size_t lc_matrix_rows(const struct LcMatrix *m);

/**
 * # Safety
 * `m` must be a live matrix handle.
 */
size_t lc_matrix_cols(const struct LcMatrix *m);

/**
 * Copies the row-major values into `out` (at least rows * cols doubles).
 *
 * # Safety
 * `m` must be a live handle and `out` must have room for `len` doubles.
 */
enum LcStatus lc_matrix_values(const struct LcMatrix *m, double *out, size_t len);

/**
 * Fits a z-score or robust scaler to `m`.
 *
 * # Safety
 * `m` must be a live matrix handle; `out` must be writable.
 */
enum LcStatus lc_scaler_fit(const struct LcMatrix *m,
                            enum LcScalerKind kind,
                            struct LcScaler **out);

/**
 * Applies a fitted scaler, producing a new matrix.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum LcStatus lc_scaler_transform(const struct LcScaler *s,
                                  const struct LcMatrix *m,
                                  struct LcMatrix **out);

/**
 * # Safety
 * `s` must be null or a handle from this library not yet freed.
 */
void lc_scaler_free(struct LcScaler *s);

/**
 * Fits PCA keeping the fewest components whose cumulative explained
 * variance reaches `threshold` (in (0, 1]).
 *
 * # Safety
 * `m` must be a live matrix handle; `out` must be writable.
 */
enum LcStatus lc_pca_fit(const struct LcMatrix *m, double threshold, struct LcPca **out);

/**
 * Fits PCA keeping exactly `components` components.
 *
 * # Safety
 * `m` must be a live matrix handle; `out` must be writable.
 */
enum LcStatus lc_pca_fit_components(const struct LcMatrix *m,
                                    size_t components,
                                    struct LcPca **out);

/**
 * # Safety
 * `p` must be a live PCA handle.
 */
size_t lc_pca_components(const struct LcPca *p);

/**
 * Copies the explained variance ratio of each retained component.
 *
 * # Safety
 * `p` must be live and `out` must have room for `len` doubles.
 */
enum LcStatus lc_pca_explained_ratio(const struct LcPca *p, double *out, size_t len);

/**
 * Projects `m` onto the retained components.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum LcStatus lc_pca_project(const struct LcPca *p,
                             const struct LcMatrix *m,
                             struct LcMatrix **out);

/**
 * # Safety
 * `p` must be null or a handle from this library not yet freed.
 */
void lc_pca_free(struct LcPca *p);

/**
 * k-means++ seeded Lloyd's algorithm; the best of `restarts` runs is kept.
 *
 * # Safety
 * `m` must be a live matrix handle; `out` must be writable.
 */
enum LcStatus lc_kmeans_fit(const struct LcMatrix *m,
                            size_t k,
                            uint64_t seed,
                            size_t restarts,
                            size_t max_iter,
                            double tol,
                            struct LcClustering **out);

/**
 * # Safety
 * `c` must be a live clustering handle.
 */
size_t lc_clustering_k(const struct LcClustering *c);

/**
 * Number of clustered points.
 *
 * # Safety
 * `c` must be a live clustering handle.
 */
size_t lc_clustering_len(const struct LcClustering *c);

/**
 * Sum of squared distances to the assigned centroids, or NaN for null.
 *
 * # Safety
 * `c` must be a live clustering handle.
 */
double lc_clustering_inertia(const struct LcClustering *c);

/**
 * Copies the 0-based cluster index of every point.
 *
 * # Safety
 * `c` must be live and `out` must have room for `len` values.
 */
enum LcStatus lc_clustering_assignments(const struct LcClustering *c, size_t *out, size_t len);

/**
 * Copies the centroids row-major (k rows of the input dimension).
 *
 * # Safety
 * `c` must be live and `out` must have room for `len` doubles.
 */
enum LcStatus lc_clustering_centroids(const struct LcClustering *c, double *out, size_t len);

/**
 * # Safety
 * `c` must be null or a handle from this library not yet freed.
 */
void lc_clustering_free(struct LcClustering *c);

/**
 * Mean silhouette of a partition of `m`; per-point values are copied into
 * `per_point` when it is not null (it must then hold `n` doubles).
 *
 * # Safety
 * `m` must be live, `assignments` must hold `n` values and `mean` must be
 * writable.
 */
enum LcStatus lc_silhouette(const struct LcMatrix *m,
                            const size_t *assignments,
                            size_t n,
                            double *mean,
                            double *per_point);

/**
 * Runs the full pipeline from a JSON config file and writes its artifacts.
 * `k` and `silhouette` receive the chosen K and mean silhouette when not
 * null.
 *
 * # Safety
 * `config_path` must be a nul-terminated UTF-8 string.
 */
enum LcStatus lc_run_pipeline(const char *config_path, size_t *k, double *silhouette);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIKERT_CLUSTER_H */
