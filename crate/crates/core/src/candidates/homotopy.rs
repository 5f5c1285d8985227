use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{self, LinalgError};
use crate::poly::{jacobian, Monomial, PolyError, PolyMatrix, Polynomial, PolynomialSystem};

/// `H(x, l, t) = [f(x) - t f(y); l_0 (x - y) + sum_i l_i grad f_i(x)]` over the
/// variables `(x, l_0..l_k, t)`, closed by the affine chart row `a . l = 1`.
#[derive(Debug, Clone)]
pub struct Homotopy {
    pub n: usize,
    pub k: usize,
    pub y: Vec<f64>,
    /// Starting chart `a . l = 1` for the projective multipliers.
    pub patch: Vec<f64>,
    pub system: PolynomialSystem,
    jac: PolyMatrix,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackError {
    #[error("start point is off the path (residual {residual:e})")]
    BadStart { residual: f64 },
    #[error("step size fell below {min_step:e} at t = {t}")]
    StepUnderflow { t: f64, min_step: f64 },
    #[error("path diverged at t = {t}")]
    Divergence { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    StepLimit { t: f64 },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn lift(p: &Polynomial, total: usize) -> Polynomial {
    p.extend_vars(total)
}

/// Gradient-descent homotopy for `f` from the real point `y`. The chart row
/// is drawn from ChaCha8 seeded with `patch_seed`.
pub fn build_gdh(f: &PolynomialSystem, y: &[f64], patch_seed: u64) -> Result<Homotopy, PolyError> {
    let n = f.nvars();
    if y.len() != n {
        return Err(PolyError::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let k = f.len();
    let total = n + k + 2;
    let tvar = Polynomial::var(total, n + k + 1);
    let lam = |i: usize| Polynomial::var(total, n + i);
    let fy = f.evaluate(y)?;

    let mut rows = Vec::with_capacity(k + n);
    for (fi, &c) in f.polys().iter().zip(&fy) {
        rows.push(&lift(fi, total) - &tvar.scale(c));
    }
    let grads: Vec<Vec<Polynomial>> = f.polys().iter().map(|fi| fi.gradient()).collect();
    for j in 0..n {
        let dx = &Polynomial::var(total, j) - &Polynomial::constant(total, y[j]);
        let mut row = &lam(0) * &dx;
        for (i, g) in grads.iter().enumerate() {
            row = &row + &(&lam(i + 1) * &lift(&g[j], total));
        }
        rows.push(row);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(patch_seed);
    let mut patch = vec![rng.random_range(0.5..1.5)];
    patch.extend((0..k).map(|_| rng.random_range(-1.0..1.0)));
    let mut names: Vec<String> = f.names().to_vec();
    names.extend((0..=k).map(|i| format!("lambda{i}")));
    names.push("t".into());
    let system = PolynomialSystem::new(names, rows)?;
    let jac = jacobian(&system);
    Ok(Homotopy {
        n,
        k,
        y: y.to_vec(),
        patch,
        system,
        jac,
    })
}

impl Homotopy {
    /// `x = y`, `l = e_0 / a_0`: the start point at `t = 1`.
    pub fn start(&self) -> Vec<f64> {
        let mut z = self.y.clone();
        z.push(1.0 / self.patch[0]);
        z.extend(std::iter::repeat(0.0).take(self.k));
        z
    }

    fn full(z: &[f64], t: f64) -> Vec<f64> {
        let mut v = z.to_vec();
        v.push(t);
        v
    }

    /// `H` under the starting chart.
    pub fn residual(&self, z: &[f64], t: f64) -> Result<Vec<f64>, PolyError> {
        self.residual_in(z, t, &self.patch)
    }

    fn residual_in(&self, z: &[f64], t: f64, chart: &[f64]) -> Result<Vec<f64>, PolyError> {
        let mut r = self.system.evaluate(&Self::full(z, t))?;
        r.push(chart.iter().zip(&z[self.n..]).map(|(a, l)| a * l).sum::<f64>() - 1.0);
        Ok(r)
    }

    /// Jacobian in `(x, l)` and the `t` derivative column.
    fn derivatives(&self, z: &[f64], t: f64, chart: &[f64]) -> Result<(Mat<f64>, Vec<f64>), PolyError> {
        let rows = self.jac.evaluate(&Self::full(z, t))?;
        let m = z.len();
        let nr = rows.len();
        let jz = Mat::from_fn(nr + 1, m, |i, j| {
            if i < nr {
                rows[i][j]
            } else if j >= self.n {
                chart[j - self.n]
            } else {
                0.0
            }
        });
        let mut jt: Vec<f64> = rows.iter().map(|r| r[m]).collect();
        jt.push(0.0);
        Ok((jz, jt))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOptions {
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub corrector_tol: f64,
    pub max_corrector: usize,
    pub start_tol: f64,
    pub max_steps: usize,
    pub divergence: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.01,
            max_step: 0.05,
            min_step: 1e-10,
            corrector_tol: 1e-10,
            max_corrector: 4,
            start_tol: 1e-8,
            max_steps: 200_000,
            divergence: 1e8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackResult {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    /// `max |H(x, l, 0)|`, chart row included.
    pub h_residual: f64,
    /// `max |f(x)|`.
    pub f_residual: f64,
    pub steps: usize,
}

const PINV_TOL: f64 = 1e-13;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Newton on `H(., t) = 0`. Returns the point and the total correction length.
fn correct(
    h: &Homotopy,
    z0: &[f64],
    t: f64,
    chart: &[f64],
    tol: f64,
    iters: usize,
) -> Result<Option<(Vec<f64>, f64)>, TrackError> {
    let mut z = z0.to_vec();
    let mut moved = 0.0;
    for _ in 0..iters {
        let r = h.residual_in(&z, t, chart)?;
        let (jz, _) = h.derivatives(&z, t, chart)?;
        let (dz, _) = linalg::lstsq_min_norm(&jz, &r, PINV_TOL)?;
        for (zi, d) in z.iter_mut().zip(&dz) {
            *zi -= d;
        }
        let len = linalg::norm2(&dz);
        moved += len;
        if len <= tol * (1.0 + linalg::norm2(&z)) && inf_norm(&h.residual_in(&z, t, chart)?) <= tol {
            return Ok(Some((z, moved)));
        }
    }
    if inf_norm(&h.residual_in(&z, t, chart)?) <= tol {
        return Ok(Some((z, moved)));
    }
    Ok(None)
}

/// Euler predictor, Newton corrector, `t` from 1 down to 0 with adaptive steps.
///
/// A real path of projective multipliers can cross the hyperplane `a . l = 0`
/// of any fixed real chart, so after each accepted step the chart is moved to
/// `a = l / |l|^2`, which keeps `a . l = 1` and stays transverse to the path.
pub fn track(h: &Homotopy, z_start: &[f64], opts: &TrackOptions) -> Result<TrackResult, TrackError> {
    let r0 = inf_norm(&h.residual(z_start, 1.0)?);
    if r0 > opts.start_tol {
        return Err(TrackError::BadStart { residual: r0 });
    }
    let mut z = z_start.to_vec();
    let mut chart = h.patch.clone();
    let mut t = 1.0f64;
    let mut step = opts.initial_step;
    let mut streak = 0;
    let mut steps = 0;
    while t > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(TrackError::StepLimit { t });
        }
        let dt = step.min(t);
        let (jz, jt) = h.derivatives(&z, t, &chart)?;
        let (v, _) = linalg::lstsq_min_norm(&jz, &jt, PINV_TOL)?;
        // dz/dt = -Jz^+ Ht, and t decreases by dt
        let pred: Vec<f64> = z.iter().zip(&v).map(|(zi, vi)| zi + dt * vi).collect();
        let t_new = if dt >= t { 0.0 } else { t - dt };
        let scale = 1.0 + linalg::norm2(&z);
        match correct(h, &pred, t_new, &chart, opts.corrector_tol, opts.max_corrector)? {
            Some((zn, moved)) if moved <= 0.1 * scale => {
                z = zn;
                let lam = &z[h.n..];
                let n2: f64 = lam.iter().map(|v| v * v).sum();
                chart = lam.iter().map(|v| v / n2).collect();
                t = t_new;
                streak += 1;
                if streak >= 3 {
                    step = (step * 2.0).min(opts.max_step);
                    streak = 0;
                }
            }
            _ => {
                step *= 0.5;
                streak = 0;
                if step < opts.min_step {
                    return Err(TrackError::StepUnderflow {
                        t,
                        min_step: opts.min_step,
                    });
                }
            }
        }
        if linalg::norm2(&z) > opts.divergence || z.iter().any(|v| !v.is_finite()) {
            return Err(TrackError::Divergence { t });
        }
    }
    if let Some((zn, _)) = correct(h, &z, 0.0, &chart, opts.corrector_tol * 1e-2, 8)? {
        z = zn;
    }
    let h_residual = inf_norm(&h.residual_in(&z, 0.0, &chart)?);
    let x = z[..h.n].to_vec();
    let lambda = z[h.n..].to_vec();
    let fsys = PolynomialSystem::new(
        h.system.names()[..h.n].to_vec(),
        h.system.polys()[..h.k]
            .iter()
            .map(|p| restrict(p, h.n))
            .collect(),
    )?;
    let f_residual = fsys.residual(&x)?;
    Ok(TrackResult {
        x,
        lambda,
        h_residual,
        f_residual,
        steps,
    })
}

/// `p` with `t = 0` and no dependence on the multipliers, in the first `n` variables.
fn restrict(p: &Polynomial, n: usize) -> Polynomial {
    Polynomial::from_terms(
        n,
        p.terms()
            .filter(|(m, _)| m.exponents()[n..].iter().all(|&e| e == 0))
            .map(|(m, c)| (Monomial::new(m.exponents()[..n].to_vec()), c)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_system;

    #[test]
    fn one_dimensional_path() {
        let f = parse_system("vars x\nx^2 - 4").unwrap();
        let h = build_gdh(&f, &[1.0], 3).unwrap();
        assert_eq!(h.system.nvars(), 4);
        assert_eq!(h.system.len(), 2);
        let r = track(&h, &h.start(), &TrackOptions::default()).unwrap();
        // oracle: the x-part follows x(t) = sqrt(4 - 3t)
        assert!((r.x[0] - 2.0).abs() < 1e-10);
        assert!(r.f_residual <= 1e-10);
    }

    #[test]
    fn start_on_the_variety_stays() {
        let f = parse_system("vars x y\nx^2 + y^2 - 2\n2*x*y^2 - x + 1").unwrap();
        let h = build_gdh(&f, &[-1.0, 1.0], 5).unwrap();
        let r = track(&h, &h.start(), &TrackOptions::default()).unwrap();
        assert!(r.f_residual <= 1e-8);
    }
}
