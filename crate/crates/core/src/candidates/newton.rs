use faer::Mat;
use thiserror::Error;

use crate::linalg::{self, LinalgError};
use crate::poly::{jacobian, PolyError, PolyMatrix, PolynomialSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Converged once the full Newton step is at most this long.
    pub tol: f64,
    /// Step halvings allowed per iteration while the residual does not decrease.
    pub max_halvings: u32,
    /// Iterates with larger Euclidean norm count as divergent.
    pub divergence: f64,
    /// Relative singular value cutoff for the pseudo-inverse of the Jacobian.
    pub rank_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-10,
            max_halvings: 20,
            divergence: 1e8,
            rank_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonPoint {
    pub x: Vec<f64>,
    /// `max_i |f_i(x)|`.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NewtonError {
    #[error("iterate norm exceeded the divergence bound at iteration {iteration}")]
    Divergence { iteration: usize },
    #[error("no convergence in {iterations} iterations (residual {residual:e})")]
    MaxIter { iterations: usize, x: Vec<f64>, residual: f64 },
    #[error("step halving could not reduce the residual (residual {residual:e})")]
    Stagnation { iteration: usize, x: Vec<f64>, residual: f64 },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl NewtonError {
    /// Last iterate for failures that still produced one.
    pub fn last_iterate(&self) -> Option<(&[f64], f64)> {
        match self {
            Self::MaxIter { x, residual, .. } | Self::Stagnation { x, residual, .. } => Some((x, *residual)),
            _ => None,
        }
    }
}

/// Jacobian and value evaluator sharing one symbolic Jacobian.
pub(crate) struct SystemEval<'a> {
    pub f: &'a PolynomialSystem,
    pub jac: PolyMatrix,
}

impl<'a> SystemEval<'a> {
    pub fn new(f: &'a PolynomialSystem) -> Self {
        Self { f, jac: jacobian(f) }
    }

    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>, PolyError> {
        self.f.evaluate(x)
    }

    pub fn jacobian_at(&self, x: &[f64]) -> Result<Mat<f64>, PolyError> {
        let rows = self.jac.evaluate(x)?;
        Ok(linalg::from_rows(&rows, self.f.nvars()))
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Damped least-squares Newton: `x <- x - t J^+ f(x)`, halving `t` while
/// `||f||` fails to decrease.
pub fn newton_refine(f: &PolynomialSystem, x0: &[f64], opts: &NewtonOptions) -> Result<NewtonPoint, NewtonError> {
    let ev = SystemEval::new(f);
    newton_with(&ev, x0, opts)
}

pub(crate) fn newton_with(ev: &SystemEval<'_>, x0: &[f64], opts: &NewtonOptions) -> Result<NewtonPoint, NewtonError> {
    let mut x = x0.to_vec();
    let mut fx = ev.values(&x)?;
    for it in 1..=opts.max_iter {
        if ev.f.is_empty() {
            return Ok(NewtonPoint { x, residual: 0.0, iterations: it });
        }
        let j = ev.jacobian_at(&x)?;
        let (step, _) = linalg::lstsq_min_norm(&j, &fx, opts.rank_tol)?;
        let slen = linalg::norm2(&step);
        let fnorm = linalg::norm2(&fx);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a - t * s).collect();
            let ft = ev.values(&trial)?;
            let fn_t = linalg::norm2(&ft);
            if fn_t.is_finite() && (fn_t < fnorm || fn_t == 0.0) {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        if slen <= opts.tol {
            if let Some((xn, fxn)) = accepted {
                x = xn;
                fx = fxn;
            }
            return Ok(NewtonPoint {
                residual: max_abs(&fx),
                x,
                iterations: it,
            });
        }
        match accepted {
            Some((xn, fxn)) => {
                x = xn;
                fx = fxn;
            }
            None => {
                return Err(NewtonError::Stagnation {
                    iteration: it,
                    residual: max_abs(&fx),
                    x,
                })
            }
        }
        if linalg::norm2(&x) > opts.divergence || x.iter().any(|v| !v.is_finite()) {
            return Err(NewtonError::Divergence { iteration: it });
        }
    }
    Err(NewtonError::MaxIter {
        iterations: opts.max_iter,
        residual: max_abs(&fx),
        x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_system;

    #[test]
    fn bivariate_root() {
        let f = parse_system("vars x y\nx^2 + y^2 - 2\n2*x*y^2 - x + 1").unwrap();
        let p = newton_refine(&f, &[1.3, 0.4], &NewtonOptions::default()).unwrap();
        let r = (3f64.sqrt() + 1.0) / 2.0;
        assert!((p.x[0] - r).abs() < 1e-6 && (p.x[1] - (r - 1.0)).abs() < 1e-6);
        assert!(p.residual < 1e-12);
    }

    #[test]
    fn solution_is_a_fixed_point() {
        let f = parse_system("vars x y\nx^2 + y^2 - 2\n2*x*y^2 - x + 1").unwrap();
        let p = newton_refine(&f, &[-1.0, 1.0], &NewtonOptions::default()).unwrap();
        assert_eq!(p.iterations, 1);
        assert_eq!(p.x, vec![-1.0, 1.0]);
    }

    #[test]
    fn no_real_root_fails() {
        let f = parse_system("vars x\nx^2 + 1").unwrap();
        assert!(newton_refine(&f, &[0.3], &NewtonOptions::default()).is_err());
    }
}
