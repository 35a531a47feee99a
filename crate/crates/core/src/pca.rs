//! Principal component analysis via symmetric eigendecomposition of the
//! sample covariance matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

const JACOBI_TOL: f64 = 1e-10;
const JACOBI_MAX_SWEEPS: usize = 100;
/// Slack when comparing a cumulative ratio against the requested threshold,
/// so that `1.0` is reachable despite rounding in the eigenvalue sum.
const THRESHOLD_SLACK: f64 = 1e-12;

/// How many leading components to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComponentSelection {
    /// Smallest `m` whose cumulative explained ratio reaches the threshold.
    VarianceThreshold(f64),
    /// Exactly `m` components.
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// Input column names, in order.
    pub columns: Vec<String>,
    pub mean: Vec<f64>,
    /// Retained components, one unit-norm row of length `d` each.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub explained_ratio: Vec<f64>,
    pub cumulative_ratio: Vec<f64>,
    pub total_components_available: usize,
    /// Every covariance eigenvalue, descending. Retained or not.
    pub spectrum: Vec<f64>,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Explained ratio of every available component (the scree curve).
    pub fn spectrum_ratio(&self) -> Vec<f64> {
        let trace: f64 = self.spectrum.iter().sum();
        self.spectrum.iter().map(|l| l / trace).collect()
    }

    /// Writes `component,eigenvalue,explained_ratio,cumulative_ratio,retained`
    /// for every available component.
    pub fn write_scree_csv<W: std::io::Write>(
        &self,
        out: W,
    ) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "component",
            "eigenvalue",
            "explained_ratio",
            "cumulative_ratio",
            "retained",
        ])?;
        let mut cum = 0.0;
        for (k, (l, r)) in self.spectrum.iter().zip(self.spectrum_ratio()).enumerate() {
            cum += r;
            w.write_record([
                format!("PC{}", k + 1),
                l.to_string(),
                r.to_string(),
                cum.to_string(),
                (k < self.n_components()).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Maps projected scores back into the input space.
    pub fn reconstruct(&self, scores: &FeatureMatrix) -> Result<FeatureMatrix> {
        let m = self.n_components();
        if scores.ncols() != m {
            return Err(Error::Structure(format!(
                "expected {m} component scores, got {}",
                scores.ncols()
            )));
        }
        let d = self.dim();
        let mut values = Vec::with_capacity(scores.nrows() * d);
        for row in scores.rows() {
            for j in 0..d {
                let v: f64 = row
                    .iter()
                    .zip(&self.components)
                    .map(|(s, c)| s * c[j])
                    .sum();
                values.push(v + self.mean[j]);
            }
        }
        FeatureMatrix::new(scores.row_ids().to_vec(), self.columns.clone(), values)
    }
}

/// Sample covariance (divisor `n - 1`) of the columns of `m`, row-major `d × d`.
pub fn covariance(m: &FeatureMatrix) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = (m.nrows(), m.ncols());
    let mut mean = vec![0.0; d];
    for row in m.rows() {
        for (acc, x) in mean.iter_mut().zip(row) {
            *acc += x;
        }
    }
    mean.iter_mut().for_each(|v| *v /= n as f64);
    let mut cov = vec![0.0; d * d];
    let mut centered = vec![0.0; d];
    for row in m.rows() {
        for ((c, x), mu) in centered.iter_mut().zip(row).zip(&mean) {
            *c = x - mu;
        }
        for a in 0..d {
            for b in a..d {
                cov[a * d + b] += centered[a] * centered[b];
            }
        }
    }
    let denom = (n - 1) as f64;
    for a in 0..d {
        for b in a..d {
            let v = cov[a * d + b] / denom;
            cov[a * d + b] = v;
            cov[b * d + a] = v;
        }
    }
    (mean, cov)
}

/// Eigen-decomposition of a symmetric row-major `d × d` matrix by cyclic
/// Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` unsorted, with eigenvector `k` in
/// column `k` of the row-major `d × d` output. Stops once the off-diagonal
/// Frobenius norm drops to `1e-10` times `max(1, ‖A‖_F)`.
pub fn jacobi_eigen(a: &[f64], d: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(a.len(), d * d);
    let mut a = a.to_vec();
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = JACOBI_TOL * frob.max(1.0);
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..d {
            for q in 0..d {
                if p != q {
                    s += a[p * d + q] * a[p * d + q];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if !off.is_finite() {
            return Err(Error::NonFinite("covariance eigendecomposition"));
        }
        if off <= tol {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                residual: off,
            });
        }
        sweeps += 1;
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                a[p * d + q] = 0.0;
                a[q * d + p] = 0.0;
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let values = (0..d).map(|i| a[i * d + i]).collect();
    Ok((values, v))
}

/// Fits PCA keeping the fewest components that explain `variance_threshold`
/// of the total variance.
pub fn fit(m: &FeatureMatrix, variance_threshold: f64) -> Result<PcaModel> {
    fit_with(m, ComponentSelection::VarianceThreshold(variance_threshold))
}

pub fn fit_with(m: &FeatureMatrix, selection: ComponentSelection) -> Result<PcaModel> {
    let (n, d) = (m.nrows(), m.ncols());
    if n < 2 || d < 1 {
        return Err(Error::InvalidArgument(format!(
            "PCA needs at least 2 rows and 1 column, got {n}x{d}"
        )));
    }
    match selection {
        ComponentSelection::VarianceThreshold(t) if !(t > 0.0 && t <= 1.0) => {
            return Err(Error::config(
                "variance_threshold",
                format!("{t} is outside (0, 1]"),
            ));
        }
        ComponentSelection::Fixed(k) if k == 0 || k > d => {
            return Err(Error::config(
                "pca_components",
                format!("{k} is outside 1..={d}"),
            ));
        }
        _ => {}
    }

    let (mean, cov) = covariance(m);
    let trace: f64 = (0..d).map(|i| cov[i * d + i]).sum();
    if trace <= 0.0 {
        return Err(Error::Degenerate(
            "PCA input has zero total variance".into(),
        ));
    }
    let (values, vectors) = jacobi_eigen(&cov, d)?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let spectrum: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let ratios: Vec<f64> = spectrum.iter().map(|l| l / trace).collect();
    let cumulative: Vec<f64> = ratios
        .iter()
        .scan(0.0, |acc, r| {
            *acc += r;
            Some(*acc)
        })
        .collect();

    let keep = match selection {
        ComponentSelection::VarianceThreshold(t) => cumulative
            .iter()
            .position(|&c| c >= t - THRESHOLD_SLACK)
            .map_or(d, |i| i + 1),
        ComponentSelection::Fixed(k) => k,
    };
    let positive_floor = trace * 1e-12;
    if spectrum[keep - 1] <= positive_floor {
        return Err(Error::Degenerate(format!(
            "component {keep} has no variance; data rank is lower than the requested component count"
        )));
    }

    let components = order[..keep]
        .iter()
        .map(|&k| {
            let mut col: Vec<f64> = (0..d).map(|i| vectors[i * d + k]).collect();
            let pivot =
                col.iter().enumerate().fold(
                    0,
                    |best, (i, x)| if x.abs() > col[best].abs() { i } else { best },
                );
            if col[pivot] < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
            col
        })
        .collect();

    Ok(PcaModel {
        columns: m.columns().to_vec(),
        mean,
        components,
        eigenvalues: spectrum[..keep].to_vec(),
        explained_ratio: ratios[..keep].to_vec(),
        cumulative_ratio: cumulative[..keep].to_vec(),
        total_components_available: d,
        spectrum,
    })
}

/// Centers `m` on the model mean and projects it onto the retained components.
pub fn project(model: &PcaModel, m: &FeatureMatrix) -> Result<FeatureMatrix> {
    if m.ncols() != model.dim() {
        return Err(Error::Structure(format!(
            "PCA model has dimension {}, input has {} columns",
            model.dim(),
            m.ncols()
        )));
    }
    let mut values = Vec::with_capacity(m.nrows() * model.n_components());
    let mut centered = vec![0.0; model.dim()];
    for row in m.rows() {
        for ((c, x), mu) in centered.iter_mut().zip(row).zip(&model.mean) {
            *c = x - mu;
        }
        for comp in &model.components {
            values.push(comp.iter().zip(&centered).map(|(a, b)| a * b).sum());
        }
    }
    let columns = (1..=model.n_components())
        .map(|k| format!("PC{k}"))
        .collect();
    FeatureMatrix::new(m.row_ids().to_vec(), columns, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::SplitMix64;

    fn random_matrix(n: usize, d: usize, seed: u64) -> FeatureMatrix {
        let mut rng = SplitMix64::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        FeatureMatrix::from_rows(&rows).unwrap()
    }

    /// Characteristic polynomial coefficients `c[0..=d]` of `det(λI - A)`,
    /// highest power first, by the Faddeev-LeVerrier recurrence.
    fn char_poly(a: &[f64], d: usize) -> Vec<f64> {
        let matmul = |x: &[f64], y: &[f64]| {
            let mut out = vec![0.0; d * d];
            for i in 0..d {
                for k in 0..d {
                    for j in 0..d {
                        out[i * d + j] += x[i * d + k] * y[k * d + j];
                    }
                }
            }
            out
        };
        let mut coeffs = vec![1.0];
        let mut m = vec![0.0; d * d];
        let mut prev_c = 1.0;
        for k in 1..=d {
            // M_k = A M_{k-1} + c_{k-1} I
            let mut next = matmul(a, &m);
            for i in 0..d {
                next[i * d + i] += prev_c;
            }
            m = next;
            let am = matmul(a, &m);
            let tr: f64 = (0..d).map(|i| am[i * d + i]).sum();
            prev_c = -tr / k as f64;
            coeffs.push(prev_c);
        }
        coeffs
    }

    fn horner(c: &[f64], x: f64) -> f64 {
        c.iter().fold(0.0, |acc, &k| acc * x + k)
    }

    /// Real roots of a polynomial inside `[lo, hi]` by grid scan + bisection.
    fn real_roots(c: &[f64], lo: f64, hi: f64, steps: usize) -> Vec<f64> {
        let mut roots = Vec::new();
        let h = (hi - lo) / steps as f64;
        let mut x0 = lo;
        let mut f0 = horner(c, x0);
        for i in 1..=steps {
            let x1 = lo + h * i as f64;
            let f1 = horner(c, x1);
            if f0 == 0.0 {
                roots.push(x0);
            } else if f0.signum() != f1.signum() && f1 != 0.0 {
                let (mut a, mut b, mut fa) = (x0, x1, f0);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    let fm = horner(c, mid);
                    if fm.signum() == fa.signum() {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            x0 = x1;
            f0 = f1;
        }
        roots
    }

    #[test]
    fn jacobi_diagonalizes_small_matrix() {
        let a = [2.0, 1.0, 1.0, 2.0];
        let (mut vals, _) = jacobi_eigen(&a, 2).unwrap();
        vals.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn collinear_points_have_one_component() {
        let m = FeatureMatrix::from_rows(&[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).unwrap();
        let model = fit(&m, 0.6).unwrap();
        assert_eq!(model.n_components(), 1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(model.components[0][0], h, epsilon = 1e-12);
        assert_abs_diff_eq!(model.components[0][1], h, epsilon = 1e-12);
        assert_abs_diff_eq!(model.explained_ratio[0], 1.0, epsilon = 1e-12);

        // (3,3) - mean (2,2) = (1,1); dot with (1,1)/sqrt2 = sqrt2
        let p = project(&model, &m).unwrap();
        assert_eq!(p.columns(), ["PC1"]);
        assert_abs_diff_eq!(p.get(2, 0), 1.414214, epsilon = 1e-6);
    }

    #[test]
    fn threshold_one_keeps_every_component() {
        let m = random_matrix(20, 5, 7);
        let model = fit(&m, 1.0).unwrap();
        assert_eq!(model.n_components(), 5);
        assert_abs_diff_eq!(model.cumulative_ratio[4], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn eigenvalues_match_characteristic_polynomial_roots() {
        let m = random_matrix(20, 6, 2024);
        let (_, cov) = covariance(&m);
        let coeffs = char_poly(&cov, 6);
        // Gershgorin bound on the spectrum
        let bound = (0..6)
            .map(|i| (0..6).map(|j| cov[i * 6 + j].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut roots = real_roots(&coeffs, -bound - 1.0, bound + 1.0, 200_000);
        roots.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(roots.len(), 6, "roots {roots:?}");

        let model = fit(&m, 1.0).unwrap();
        for (l, r) in model.spectrum.iter().zip(&roots) {
            assert_abs_diff_eq!(*l, *r, epsilon = 1e-7);
        }
    }

    #[test]
    fn minimal_component_count_crosses_threshold() {
        let m = random_matrix(120, 84, 99);
        let model = fit(&m, 0.70).unwrap();
        let k = model.n_components();
        assert!(model.cumulative_ratio[k - 1] >= 0.70);
        if k > 1 {
            assert!(model.cumulative_ratio[k - 2] < 0.70);
        }
    }

    #[test]
    fn mean_projects_to_origin() {
        let m = random_matrix(15, 4, 3);
        let model = fit(&m, 1.0).unwrap();
        let mean = FeatureMatrix::from_rows(std::slice::from_ref(&model.mean)).unwrap();
        let p = project(&model, &mean).unwrap();
        assert!(p.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn sign_convention_makes_largest_entry_positive() {
        let m = random_matrix(30, 5, 11);
        let model = fit(&m, 1.0).unwrap();
        for c in &model.components {
            let big = c
                .iter()
                .copied()
                .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn fixed_selection_and_errors() {
        let m = random_matrix(10, 3, 1);
        assert_eq!(
            fit_with(&m, ComponentSelection::Fixed(2))
                .unwrap()
                .n_components(),
            2
        );
        assert!(fit_with(&m, ComponentSelection::Fixed(4)).is_err());
        assert!(fit(&m, 0.0).is_err());
        assert!(fit(&m, 1.5).is_err());
        let rank1 = FeatureMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]).unwrap();
        assert!(fit_with(&rank1, ComponentSelection::Fixed(2)).is_err());
    }

    #[test]
    fn projection_dimension_mismatch() {
        let model = fit(&random_matrix(10, 3, 1), 1.0).unwrap();
        assert!(matches!(
            project(&model, &random_matrix(4, 2, 1)),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn row_order_does_not_change_components() {
        let m = random_matrix(25, 4, 5);
        let order: Vec<usize> = (0..25).rev().collect();
        let a = fit(&m, 1.0).unwrap();
        let b = fit(&m.select_rows(&order), 1.0).unwrap();
        for (x, y) in a
            .components
            .iter()
            .flatten()
            .zip(b.components.iter().flatten())
        {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-9);
        }
        let pa = project(&a, &m).unwrap();
        let pb = project(&b, &m.select_rows(&order)).unwrap();
        for (i, &src) in order.iter().enumerate() {
            for k in 0..4 {
                assert_abs_diff_eq!(pb.get(i, k), pa.get(src, k), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn full_projection_preserves_distances() {
        let m = random_matrix(30, 8, 17);
        let model = fit(&m, 1.0).unwrap();
        let p = project(&model, &m).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                let before = crate::matrix::distance(m.row(i), m.row(j));
                let after = crate::matrix::distance(p.row(i), p.row(j));
                assert_abs_diff_eq!(before, after, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn scree_csv_lists_every_component() {
        let model = fit(&random_matrix(10, 3, 4), 0.5).unwrap();
        let mut buf = Vec::new();
        model.write_scree_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text
            .starts_with("component,eigenvalue,explained_ratio,cumulative_ratio,retained\nPC1,"));
    }
}
