//! Semidefinite feasibility: one symmetric PSD block plus free scalars,
//! subject to affine equality constraints.

mod io;
mod project;
mod solve;

pub use io::{dump_problem, load_problem};
pub use project::{project_psd, AffineProjector};
pub use solve::{check_solution, solve_feasibility, Method, NoCertificate, SolveOptions, SolveOutcome};

use faer::Mat;
use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("constraints are inconsistent (least-squares residual {residual:e})")]
    StructurallyInfeasible { residual: f64 },
    #[error("iterate became non-finite at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("line {line}: {msg}")]
    Load { line: usize, msg: String },
}

/// An unknown of the problem: an upper-triangle block entry or a free scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Var {
    Block(usize, usize),
    Free(usize),
}

/// `sum coef * var = rhs`. A `Block(i, j)` term with `i <= j` acts on the
/// single upper-triangle entry; the mirrored entry is implied.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(Var, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub m: usize,
    pub nfree: usize,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn validate(&self) -> Result<(), SdpError> {
        if self.constraints.is_empty() {
            return Err(SdpError::Malformed("no constraints".into()));
        }
        for (k, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(SdpError::Malformed(format!("constraint {k} has non-finite rhs")));
            }
            for &(v, a) in &c.terms {
                if !a.is_finite() {
                    return Err(SdpError::Malformed(format!("constraint {k} has a non-finite coefficient")));
                }
                match v {
                    Var::Block(i, j) if i > j || j >= self.m => {
                        return Err(SdpError::Malformed(format!(
                            "constraint {k} refers to block entry ({i}, {j}) outside the upper triangle of a {0}x{0} block",
                            self.m
                        )))
                    }
                    Var::Free(f) if f >= self.nfree => {
                        return Err(SdpError::Malformed(format!(
                            "constraint {k} refers to free scalar {f} of {}",
                            self.nfree
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn rhs_norm(&self) -> f64 {
        self.constraints.iter().map(|c| c.rhs * c.rhs).sum::<f64>().sqrt()
    }

    /// Length of the stacked unknown vector: scaled upper triangle, then free scalars.
    pub fn dim(&self) -> usize {
        svec_len(self.m) + self.nfree
    }

    /// Column of `var` in the stacked vector and the factor converting a
    /// coefficient on the matrix entry into one on the stacked entry.
    pub(crate) fn column(&self, var: Var) -> (usize, f64) {
        match var {
            Var::Block(i, j) => {
                let col = svec_index(self.m, i, j);
                (col, if i == j { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 })
            }
            Var::Free(k) => (svec_len(self.m) + k, 1.0),
        }
    }

    /// `sum coef * var - rhs` for each constraint, evaluated on a block and free vector.
    pub fn residuals(&self, block: &SymMat, free: &[f64]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| {
                let mut v = -c.rhs;
                for &(var, a) in &c.terms {
                    v += a * match var {
                        Var::Block(i, j) => block.get(i, j),
                        Var::Free(k) => free[k],
                    };
                }
                v
            })
            .collect()
    }
}

pub(crate) fn svec_len(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Column-major upper-triangle position of `(i, j)`, `i <= j`.
pub(crate) fn svec_index(_m: usize, i: usize, j: usize) -> usize {
    j * (j + 1) / 2 + i
}

/// Dense symmetric matrix stored in full, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat {
    n: usize,
    data: Vec<f64>,
}

impl SymMat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds from the upper triangle listed row by row:
    /// `(0,0), (0,1), ..., (0,n-1), (1,1), ...`.
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self, SdpError> {
        if upper.len() != svec_len(n) {
            return Err(SdpError::Malformed(format!(
                "expected {} upper-triangle entries, got {}",
                svec_len(n),
                upper.len()
            )));
        }
        let mut m = Self::zeros(n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                m.set(i, j, upper[k]);
                k += 1;
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SdpError> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(SdpError::Malformed("matrix is not square".into()));
            }
            for (j, &v) in r.iter().enumerate() {
                if (v - rows[j][i]).abs() > 1e-12 * (1.0 + v.abs()) {
                    return Err(SdpError::Malformed(format!("matrix is not symmetric at ({i}, {j})")));
                }
                if j >= i {
                    m.set(i, j, v);
                }
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    /// Upper triangle row by row, the inverse of [`SymMat::from_upper`].
    pub fn upper(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(svec_len(self.n));
        for i in 0..self.n {
            for j in i..self.n {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_faer(&self) -> Mat<f64> {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Symmetrizes a faer matrix by averaging with its transpose.
    pub fn from_faer(a: &Mat<f64>) -> Self {
        let n = a.nrows();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, 0.5 * (a[(i, j)] + a[(j, i)]));
            }
        }
        m
    }

    pub fn min_eigenvalue(&self) -> Result<f64, LinalgError> {
        crate::linalg::min_eigenvalue(&self.to_faer())
    }

    pub(crate) fn to_svec(&self, out: &mut [f64]) {
        let s = std::f64::consts::SQRT_2;
        for j in 0..self.n {
            for i in 0..=j {
                out[svec_index(self.n, i, j)] = if i == j { self.get(i, j) } else { s * self.get(i, j) };
            }
        }
    }

    pub(crate) fn from_svec(n: usize, v: &[f64]) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = Self::zeros(n);
        for j in 0..n {
            for i in 0..=j {
                let x = v[svec_index(n, i, j)];
                m.set(i, j, if i == j { x } else { s * x });
            }
        }
        m
    }
}

/// A block and free vector together with checker-recomputed statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdSolution {
    pub block: SymMat,
    pub free: Vec<f64>,
    /// `||A x - b|| / max(||b||, 1e-300)`, recomputed on the original constraints.
    pub affine_residual: f64,
    pub min_eig: f64,
    pub iterations: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svec_round_trip_preserves_frobenius() {
        let m = SymMat::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 5.0], vec![3.0, 5.0, 6.0]]).unwrap();
        let mut v = vec![0.0; 6];
        m.to_svec(&mut v);
        let n2: f64 = v.iter().map(|x| x * x).sum();
        assert!((n2.sqrt() - m.frobenius()).abs() < 1e-12);
        let back = SymMat::from_svec(3, &v).upper();
        assert!(back.iter().zip(m.upper()).all(|(a, b)| (a - b).abs() < 1e-14));
        assert_eq!(SymMat::from_upper(3, &m.upper()).unwrap(), m);
    }
}
