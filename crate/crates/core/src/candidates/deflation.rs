use thiserror::Error;

use crate::linalg::{self, LinalgError};
use crate::poly::{binomial, jacobian, minors, PolyError, Polynomial, PolynomialSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeflationOptions {
    /// Singular values below `rank_tol * max(s_max, 1)` count as zero, so a
    /// Jacobian made only of rounding noise has rank 0.
    pub rank_tol: f64,
    pub admission_tol: f64,
    /// Largest number of minors one stage may expand.
    pub minor_cap: usize,
    /// Largest total term count of a stage system.
    pub term_cap: usize,
}

impl Default for DeflationOptions {
    fn default() -> Self {
        Self {
            rank_tol: 1e-8,
            admission_tol: super::ADMISSION_TOL,
            minor_cap: 2000,
            term_cap: 200_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeflationError {
    #[error("point is not on the variety (residual {residual:e})")]
    NotOnVariety { residual: f64 },
    #[error("stage {stage} system is too large ({size} exceeds the cap {cap})")]
    TooLarge { stage: usize, size: usize, cap: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn null_dim(sys: &PolynomialSystem, z: &[f64], tol: f64) -> Result<(usize, usize), DeflationError> {
    let n = sys.nvars();
    let rows = jacobian(sys).evaluate(z)?;
    let s = linalg::singular_values(&linalg::from_rows(&rows, n))?;
    let floor = tol * s.iter().copied().fold(1.0, f64::max);
    let r = s.iter().filter(|&&v| v > floor).count();
    Ok((n - r, r))
}

/// Null dimensions `d_0, d_1, ...` of the Jacobians of the stage systems at
/// `z`. Each stage appends the `(rank + 1)`-minors of the previous stage's
/// Jacobian. Stops at 0, when a value repeats, or after `max_stage` stages.
pub fn deflation_sequence(
    f: &PolynomialSystem,
    z: &[f64],
    max_stage: usize,
    opts: &DeflationOptions,
) -> Result<Vec<usize>, DeflationError> {
    let residual = f.residual(z)?;
    if residual > opts.admission_tol {
        return Err(DeflationError::NotOnVariety { residual });
    }
    let n = f.nvars();
    let mut sys = f.clone();
    let mut seq = Vec::new();
    for stage in 0..=max_stage {
        let (d, rank) = null_dim(&sys, z, opts.rank_tol)?;
        let repeated = seq.last() == Some(&d);
        seq.push(d);
        if d == 0 || repeated || stage == max_stage {
            break;
        }
        let size = rank + 1;
        if size > sys.len().min(n) {
            // no minors of that size: the next stage is the same system
            seq.push(d);
            break;
        }
        let count = binomial(sys.len(), size) * binomial(n, size);
        if count > opts.minor_cap {
            return Err(DeflationError::TooLarge {
                stage: stage + 1,
                size: count,
                cap: opts.minor_cap,
            });
        }
        let extra: Vec<Polynomial> = minors(&jacobian(&sys), rank)?
            .into_iter()
            .filter(|p| !p.is_zero())
            .map(|p| p.normalized().0)
            .collect();
        sys = sys.extended_with(extra)?;
        let terms: usize = sys.polys().iter().map(Polynomial::num_terms).sum();
        if terms > opts.term_cap {
            return Err(DeflationError::TooLarge {
                stage: stage + 1,
                size: terms,
                cap: opts.term_cap,
            });
        }
    }
    Ok(seq)
}
