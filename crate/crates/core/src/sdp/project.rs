use faer::linalg::solvers::{Llt, SolveCore};
use faer::{Conj, Mat, Side};

use super::{SdpError, SdpProblem, SymMat};
use crate::linalg::{self, LinalgError};

/// Frobenius-nearest PSD matrix: eigenvalues below zero are clamped.
pub fn project_psd(a: &SymMat) -> Result<SymMat, SdpError> {
    Ok(SymMat::from_faer(&project_psd_mat(&a.to_faer())?))
}

pub(crate) fn project_psd_mat(a: &Mat<f64>) -> Result<Mat<f64>, LinalgError> {
    let n = a.nrows();
    let (vals, vecs) = linalg::sym_eig(a)?;
    let npos = vals.iter().filter(|&&v| v > 0.0).count();
    if npos == n {
        return Ok(a.clone());
    }
    if npos == 0 {
        return Ok(Mat::zeros(n, n));
    }
    // rebuild from whichever side of the spectrum is smaller
    let out = if npos <= n - npos {
        let w = Mat::from_fn(n, npos, |i, k| vecs[(i, n - npos + k)] * vals[n - npos + k].sqrt());
        &w * w.transpose()
    } else {
        let nneg = n - npos;
        let w = Mat::from_fn(n, nneg, |i, k| vecs[(i, k)] * (-vals[k]).sqrt());
        a + &w * w.transpose()
    };
    Ok(symmetrize(out))
}

fn symmetrize(mut a: Mat<f64>) -> Mat<f64> {
    let n = a.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

enum Factor {
    Llt(Llt<f64>),
    /// `A A^T = D + B B^T` with `D` diagonal (block columns touch one row
    /// each) and `B` the free-scalar columns; solved through the small
    /// capacitance matrix `I + B^T D^-1 B`.
    Woodbury {
        dinv: Vec<f64>,
        free_cols: Vec<Vec<(usize, f64)>>,
        cap: Llt<f64>,
    },
    /// Eigendecomposition pseudo-inverse for rank-deficient constraint sets.
    Pinv { vecs: Mat<f64>, inv: Vec<f64> },
}

/// Orthogonal projector onto `{x : A x = b}` in the stacked coordinates,
/// with the Gram matrix `A A^T` factored once.
pub struct AffineProjector {
    dim: usize,
    /// Normalized sparse rows.
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    row_norms: Vec<f64>,
    factor: Factor,
}

impl AffineProjector {
    pub fn new(p: &SdpProblem) -> Result<Self, SdpError> {
        p.validate()?;
        let dim = p.dim();
        let scale = p.rhs_norm().max(1.0);
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mut row_norms = Vec::new();
        for c in &p.constraints {
            let mut row: Vec<(usize, f64)> = c
                .terms
                .iter()
                .map(|&(v, a)| {
                    let (col, f) = p.column(v);
                    (col, a * f)
                })
                .collect();
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (col, a) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == col => last.1 += a,
                    _ => merged.push((col, a)),
                }
            }
            merged.retain(|e| e.1 != 0.0);
            let norm = merged.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
            if norm == 0.0 {
                if c.rhs.abs() > 1e-8 * scale {
                    return Err(SdpError::StructurallyInfeasible {
                        residual: c.rhs.abs() / scale,
                    });
                }
                continue;
            }
            for e in merged.iter_mut() {
                e.1 /= norm;
            }
            rows.push(merged);
            rhs.push(c.rhs / norm);
            row_norms.push(norm);
        }
        let nrows = rows.len();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for (r, row) in rows.iter().enumerate() {
            for &(c, a) in row {
                cols[c].push((r, a));
            }
        }
        let factor = match woodbury(&cols, p.dim() - p.nfree, nrows) {
            Some(f) => f,
            None => dense_factor(&cols, nrows)?,
        };
        let proj = Self {
            dim,
            rows,
            rhs,
            row_norms,
            factor,
        };
        if nrows > 0 {
            let x = proj.project(&vec![0.0; dim]);
            let res = proj.residual_norm(&x);
            let bnorm = linalg::norm2(&proj.rhs).max(1.0);
            if res > 1e-8 * bnorm {
                return Err(SdpError::StructurallyInfeasible { residual: res / bnorm });
            }
        }
        Ok(proj)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn apply_a(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(c, a)| a * x[c]).sum())
            .collect()
    }

    /// `||A x - b||` on the normalized rows.
    pub fn residual_norm(&self, x: &[f64]) -> f64 {
        let ax = self.apply_a(x);
        ax.iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `||A x - b||` with the rows at their original scale.
    pub fn unscaled_residual_norm(&self, x: &[f64]) -> f64 {
        let ax = self.apply_a(x);
        ax.iter()
            .zip(&self.rhs)
            .zip(&self.row_norms)
            .map(|((a, b), s)| (s * (a - b)).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn solve_gram(&self, r: &[f64]) -> Vec<f64> {
        match &self.factor {
            Factor::Llt(l) => {
                let mut m = Mat::from_fn(r.len(), 1, |i, _| r[i]);
                l.solve_in_place_with_conj(Conj::No, m.as_mut());
                (0..r.len()).map(|i| m[(i, 0)]).collect()
            }
            Factor::Woodbury {
                dinv,
                free_cols,
                cap,
            } => {
                let t: Vec<f64> = r.iter().zip(dinv).map(|(a, b)| a * b).collect();
                let mut u = Mat::from_fn(free_cols.len(), 1, |k, _| {
                    free_cols[k].iter().map(|&(row, a)| a * t[row]).sum::<f64>()
                });
                cap.solve_in_place_with_conj(Conj::No, u.as_mut());
                let mut out = t;
                for (k, col) in free_cols.iter().enumerate() {
                    let w = u[(k, 0)];
                    for &(row, a) in col {
                        out[row] -= dinv[row] * a * w;
                    }
                }
                out
            }
            Factor::Pinv { vecs, inv } => {
                let n = r.len();
                let mut t = vec![0.0; n];
                for (k, tk) in t.iter_mut().enumerate() {
                    if inv[k] != 0.0 {
                        let mut s = 0.0;
                        for i in 0..n {
                            s += vecs[(i, k)] * r[i];
                        }
                        *tk = s * inv[k];
                    }
                }
                let mut out = vec![0.0; n];
                for (k, &tk) in t.iter().enumerate() {
                    if tk != 0.0 {
                        for (i, o) in out.iter_mut().enumerate() {
                            *o += vecs[(i, k)] * tk;
                        }
                    }
                }
                out
            }
        }
    }

    fn correct(&self, x: &mut [f64]) {
        let r: Vec<f64> = self
            .apply_a(x)
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| a - b)
            .collect();
        let w = self.solve_gram(&r);
        for (row, wk) in self.rows.iter().zip(&w) {
            for &(c, a) in row {
                x[c] -= a * wk;
            }
        }
    }

    /// Least-norm correction of `x` onto the affine set, with one refinement
    /// pass when the first leaves a visible residual.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        if self.rows.is_empty() {
            return y;
        }
        self.correct(&mut y);
        let scale = linalg::norm2(&self.rhs) + linalg::norm2(&self.apply_a(x));
        if self.residual_norm(&y) > 1e-13 * scale.max(1e-300) {
            self.correct(&mut y);
        }
        y
    }
}

fn dense_factor(cols: &[Vec<(usize, f64)>], nrows: usize) -> Result<Factor, SdpError> {
    let mut g = Mat::<f64>::zeros(nrows, nrows);
    for col in cols {
        for &(r1, a1) in col {
            for &(r2, a2) in col {
                g[(r1, r2)] += a1 * a2;
            }
        }
    }
    Ok(match g.llt(Side::Lower) {
        Ok(l) if llt_is_sound(&l, nrows) => Factor::Llt(l),
        _ => {
            let (vals, vecs) = linalg::sym_eig(&g)?;
            let vmax = vals.iter().copied().fold(0.0, f64::max);
            let inv = vals
                .iter()
                .map(|&v| if v > 1e-12 * vmax { 1.0 / v } else { 0.0 })
                .collect();
            Factor::Pinv { vecs, inv }
        }
    })
}

fn woodbury(cols: &[Vec<(usize, f64)>], nblock: usize, nrows: usize) -> Option<Factor> {
    let nfree = cols.len() - nblock;
    if nrows == 0 || nfree * 3 > nrows * 2 || cols[..nblock].iter().any(|c| c.len() > 1) {
        return None;
    }
    let mut d = vec![0.0; nrows];
    for col in &cols[..nblock] {
        for &(r, a) in col {
            d[r] += a * a;
        }
    }
    let dmax = d.iter().copied().fold(0.0, f64::max);
    if d.iter().any(|&v| v <= 1e-10 * dmax) {
        return None;
    }
    let dinv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    let free_cols = cols[nblock..].to_vec();
    let mut rows_of: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
    for (k, col) in free_cols.iter().enumerate() {
        for &(r, a) in col {
            rows_of[r].push((k, a));
        }
    }
    let mut cap = Mat::<f64>::identity(nfree, nfree);
    for (r, entries) in rows_of.iter().enumerate() {
        for &(k1, a1) in entries {
            for &(k2, a2) in entries {
                cap[(k1, k2)] += a1 * a2 * dinv[r];
            }
        }
    }
    let cap = cap.llt(Side::Lower).ok()?;
    if !llt_is_sound(&cap, nfree) {
        return None;
    }
    Some(Factor::Woodbury {
        dinv,
        free_cols,
        cap,
    })
}

fn llt_is_sound(l: &Llt<f64>, n: usize) -> bool {
    let lm = l.L();
    let mut dmin = f64::INFINITY;
    let mut dmax: f64 = 0.0;
    for i in 0..n {
        let d = lm[(i, i)].abs();
        if !d.is_finite() {
            return false;
        }
        dmin = dmin.min(d);
        dmax = dmax.max(d);
    }
    // squared pivot ratio bounds the condition number of A A^T from below
    n == 0 || (dmin / dmax).powi(2) > 1e-13
}
