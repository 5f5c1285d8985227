//! Thin wrappers over faer decompositions.

use faer::{Mat, Side};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("decomposition did not converge")]
    NoConvergence,
    #[error("matrix has non-finite entries")]
    NonFinite,
}

pub fn from_rows(rows: &[Vec<f64>], ncols: usize) -> Mat<f64> {
    Mat::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

fn check_finite(a: &Mat<f64>) -> Result<(), LinalgError> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if !a[(i, j)].is_finite() {
                return Err(LinalgError::NonFinite);
            }
        }
    }
    Ok(())
}

/// Singular value decomposition with singular values in nonincreasing order.
pub struct Svd {
    pub u: Mat<f64>,
    pub s: Vec<f64>,
    pub v: Mat<f64>,
}

/// Full SVD: `u` is `m x m`, `v` is `n x n`, `s` has `min(m, n)` entries.
pub fn svd_full(a: &Mat<f64>) -> Result<Svd, LinalgError> {
    check_finite(a)?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Svd {
            u: Mat::identity(a.nrows(), a.nrows()),
            s: Vec::new(),
            v: Mat::identity(a.ncols(), a.ncols()),
        });
    }
    let d = a.svd().map_err(|_| LinalgError::NoConvergence)?;
    let s: Vec<f64> = d.S().column_vector().iter().copied().collect();
    Ok(Svd {
        u: d.U().to_owned(),
        s,
        v: d.V().to_owned(),
    })
}

pub fn singular_values(a: &Mat<f64>) -> Result<Vec<f64>, LinalgError> {
    check_finite(a)?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut s = a.singular_values().map_err(|_| LinalgError::NoConvergence)?;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Count of singular values above `rel_tol * s_max`.
pub fn numerical_rank(s: &[f64], rel_tol: f64) -> usize {
    let smax = s.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * smax).count()
}

pub fn rank(a: &Mat<f64>, rel_tol: f64) -> Result<usize, LinalgError> {
    Ok(numerical_rank(&singular_values(a)?, rel_tol))
}

/// Symmetric eigendecomposition, eigenvalues ascending, eigenvectors as columns.
pub fn sym_eig(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>), LinalgError> {
    check_finite(a)?;
    if a.nrows() == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let e = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| LinalgError::NoConvergence)?;
    let vals = e.S().column_vector().iter().copied().collect();
    Ok((vals, e.U().to_owned()))
}

pub fn sym_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>, LinalgError> {
    check_finite(a)?;
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| LinalgError::NoConvergence)
}

pub fn min_eigenvalue(a: &Mat<f64>) -> Result<f64, LinalgError> {
    Ok(sym_eigenvalues(a)?.first().copied().unwrap_or(0.0))
}

/// Minimum-norm least-squares solution of `a x = b`, truncating singular
/// values below `rel_tol * s_max`. Also returns the numerical rank.
pub fn lstsq_min_norm(a: &Mat<f64>, b: &[f64], rel_tol: f64) -> Result<(Vec<f64>, usize), LinalgError> {
    let n = a.ncols();
    let d = svd_full(a)?;
    let r = numerical_rank(&d.s, rel_tol);
    let mut x = vec![0.0; n];
    for k in 0..r {
        let mut ub = 0.0;
        for (i, bi) in b.iter().enumerate() {
            ub += d.u[(i, k)] * bi;
        }
        let c = ub / d.s[k];
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += c * d.v[(j, k)];
        }
    }
    Ok((x, r))
}

/// Orthonormal basis of the numerical null space, one vector per column,
/// ordered from the smallest singular value direction outward.
pub fn null_space(a: &Mat<f64>, rel_tol: f64) -> Result<(Mat<f64>, Vec<f64>), LinalgError> {
    let n = a.ncols();
    let d = svd_full(a)?;
    let r = numerical_rank(&d.s, rel_tol);
    let k = n - r;
    let basis = Mat::from_fn(n, k, |i, j| d.v[(i, n - 1 - j)]);
    Ok((basis, d.s))
}

pub fn frobenius(a: &Mat<f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)] * a[(i, j)];
        }
    }
    s.sqrt()
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_orders_and_reconstructs() {
        let a = from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]], 2);
        let d = svd_full(&a).unwrap();
        assert!(d.s[0] >= d.s[1]);
        for i in 0..3 {
            for j in 0..2 {
                let mut v = 0.0;
                for k in 0..2 {
                    v += d.u[(i, k)] * d.s[k] * d.v[(j, k)];
                }
                assert!((v - a[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn least_squares_handles_rank_deficiency() {
        let a = from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]], 2);
        let (x, r) = lstsq_min_norm(&a, &[2.0, 2.0], 1e-12).unwrap();
        assert_eq!(r, 1);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn null_space_of_row() {
        let a = from_rows(&[vec![1.0, -1.0, 0.0]], 3);
        let (ns, _) = null_space(&a, 1e-10).unwrap();
        assert_eq!(ns.ncols(), 2);
        for j in 0..2 {
            assert!((ns[(0, j)] - ns[(1, j)]).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvalues_ascend() {
        let a = from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]], 2);
        let (vals, _) = sym_eig(&a).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
    }
}
