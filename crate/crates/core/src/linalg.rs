//! Small dense linear-algebra helpers: symmetric eigen-solver, null spaces,
//! least squares and principal angles between subspaces.

use nalgebra::{DMatrix, DVector};

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns. Sweeps until the off-diagonal Frobenius norm is
/// below `1e-14` relative to the matrix norm (at most 100 sweeps).
pub fn jacobi_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "jacobi_eigen: square matrix required");
    let mut a = (m + m.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)]));
    let mut vecs = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &v.column(i));
    }
    (vals, vecs)
}

/// Extreme eigenvalues `(min, max)` of a symmetric matrix. Empty matrices
/// yield `(+inf, -inf)`, the neutral elements for inf/sup aggregation.
pub fn eigen_range(m: &DMatrix<f64>) -> (f64, f64) {
    if m.nrows() == 0 {
        return (f64::INFINITY, f64::NEG_INFINITY);
    }
    let (vals, _) = jacobi_eigen(m);
    (vals[0], vals[vals.len() - 1])
}

fn default_tol(a: &DMatrix<f64>) -> f64 {
    let dim = a.nrows().max(a.ncols()).max(1) as f64;
    dim * f64::EPSILON * a.amax().max(1.0) * 100.0
}

/// Full SVD of `a` padded with zero rows so that all right singular vectors
/// are available. Singular values are returned in descending order.
fn full_right_svd(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let mut v = DMatrix::zeros(n, idx.len());
    for (c, &i) in idx.iter().enumerate() {
        v.set_column(c, &vt.row(i).transpose());
    }
    (sv, v)
}

/// Numerical rank with tolerance `tol` on singular values (`None` selects a
/// scale-aware default).
pub fn rank(a: &DMatrix<f64>, tol: Option<f64>) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let tol = tol.unwrap_or_else(|| default_tol(a));
    let (sv, _) = full_right_svd(a);
    sv.iter().filter(|s| **s > tol).count()
}

/// Orthonormal basis (as columns) of the null space of `a`.
pub fn null_space(a: &DMatrix<f64>, tol: Option<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let tol = tol.unwrap_or_else(|| default_tol(a));
    let (sv, v) = full_right_svd(a);
    let r = sv.iter().filter(|s| **s > tol).count();
    v.columns(r, n - r).into_owned()
}

/// Orthonormal basis of the column span of `a`.
pub fn orthonormal_span(a: &DMatrix<f64>, tol: Option<f64>) -> DMatrix<f64> {
    let (m, k) = a.shape();
    if k == 0 || m == 0 {
        return DMatrix::zeros(m, 0);
    }
    let tol = tol.unwrap_or_else(|| default_tol(a));
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let cols: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol)
        .collect();
    let mut out = DMatrix::zeros(m, cols.len());
    for (c, &i) in cols.iter().enumerate() {
        out.set_column(c, &u.column(i));
    }
    out
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let tol = default_tol(a);
    let svd = a.clone().svd(true, true);
    svd.solve(b, tol).expect("svd solve with u and v_t")
}

/// Largest principal angle between the column spans of orthonormal bases
/// `a` and `b`. Returns `π/2` when the dimensions differ.
///
/// Uses `asin` of the residual norm rather than `acos` of the cosines, which
/// keeps small angles accurate.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() {
        return std::f64::consts::FRAC_PI_2;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let resid = b - a * (a.transpose() * b);
    let s = resid.svd(false, false).singular_values.max();
    s.clamp(0.0, 1.0).asin()
}

/// Projects `v` onto the orthogonal complement of the span of orthonormal
/// columns `q`.
pub fn project_out(q: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    if q.ncols() == 0 {
        return v.clone();
    }
    v - q * (q.transpose() * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        &a + a.transpose()
    }

    #[test]
    fn jacobi_agrees_with_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..8 {
            let m = random_sym(n, &mut rng);
            let (vals, vecs) = jacobi_eigen(&m);
            let mut reference: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            reference.sort_by(f64::total_cmp);
            for (a, b) in vals.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-11, "{a} vs {b}");
            }
            let recon = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
            assert!((recon - &m).amax() < 1e-11);
        }
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let k = null_space(&a, None);
        assert_eq!(k.ncols(), 2);
        assert!((&a * &k).amax() < 1e-14);
        assert!((k.transpose() * &k - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn principal_angles_detect_small_rotations() {
        let a = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let eps: f64 = 1e-11;
        let b = DMatrix::from_column_slice(3, 1, &[eps.cos(), eps.sin(), 0.0]);
        let ang = max_principal_angle(&a, &b);
        assert!((ang - eps).abs() < 1e-15);
    }

    #[test]
    fn lstsq_recovers_consistent_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let x = DVector::from_vec(vec![2.0, -1.0]);
        let b = &a * &x;
        assert!((lstsq(&a, &b) - x).amax() < 1e-14);
    }
}
