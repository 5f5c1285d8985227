use faer::Mat;

use super::project::{project_psd_mat, AffineProjector};
use super::{svec_index, svec_len, PsdSolution, SdpError, SdpProblem, SymMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Averaged alternating reflections between the PSD cone and the affine set.
    #[default]
    DouglasRachford,
    /// Dykstra-corrected alternating projections.
    Dykstra,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub method: Method,
    pub max_iter: usize,
    /// Affine residual bound, relative to `||b||`.
    pub eps_affine: f64,
    /// Eigenvalue bound, scaled by `1 + ||block||_F`.
    pub eps_eig: f64,
    /// Iterations between stagnation tests; zero disables the test.
    pub stall_window: usize,
    /// A window counts as progress when the best residual or the gap between
    /// the two iterates shrinks below this fraction of its previous value.
    pub stall_ratio: f64,
    /// Starting block and free scalars; zeros when absent.
    pub warm_start: Option<(SymMat, Vec<f64>)>,
    /// Orthonormal `m x k` basis `W`: the cone step projects onto
    /// `{W B W^T : B psd}` instead of the whole PSD cone.
    pub face: Option<Mat<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: Method::DouglasRachford,
            max_iter: 50_000,
            eps_affine: 1e-7,
            eps_eig: 1e-7,
            stall_window: 1000,
            stall_ratio: 0.95,
            warm_start: None,
            face: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIter,
    Stagnated,
}

/// Iteration ran out without a point passing the checker. This is not a
/// proof that the problem is infeasible.
#[derive(Debug, Clone, PartialEq)]
pub struct NoCertificate {
    pub iterations: usize,
    pub affine_residual: f64,
    pub min_eig: f64,
    pub reason: StopReason,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Found(PsdSolution),
    NotFound(NoCertificate),
}

/// Recomputes the relative affine residual and the smallest eigenvalue on the
/// original constraints, independently of any solver state.
pub fn check_solution(
    p: &SdpProblem,
    block: &SymMat,
    free: &[f64],
) -> Result<(f64, f64), SdpError> {
    if block.n() != p.m || free.len() != p.nfree {
        return Err(SdpError::Malformed(format!(
            "solution shape {}x{} + {} does not match problem {}x{} + {}",
            block.n(),
            block.n(),
            free.len(),
            p.m,
            p.m,
            p.nfree
        )));
    }
    let r = p.residuals(block, free);
    let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let b = p.rhs_norm();
    let rel = if b > 0.0 { rn / b } else { rn };
    let min_eig = if p.m == 0 { 0.0 } else { block.min_eigenvalue()? };
    Ok((rel, min_eig))
}

fn accept(p: &SdpProblem, block: &SymMat, free: &[f64], opts: &SolveOptions) -> Result<Option<(f64, f64)>, SdpError> {
    let (res, min_eig) = check_solution(p, block, free)?;
    let ok = res <= opts.eps_affine && min_eig >= -opts.eps_eig * (1.0 + block.frobenius());
    Ok(ok.then_some((res, min_eig)))
}

struct Layout<'a> {
    m: usize,
    nblock: usize,
    face: Option<&'a Mat<f64>>,
}

impl Layout<'_> {
    fn block_mat(&self, v: &[f64]) -> Mat<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = self.m;
        let mut a = Mat::zeros(m, m);
        for j in 0..m {
            for i in 0..=j {
                let x = v[svec_index(m, i, j)];
                let x = if i == j { x } else { s * x };
                a[(i, j)] = x;
                a[(j, i)] = x;
            }
        }
        a
    }

    fn write_block(&self, a: &Mat<f64>, out: &mut [f64]) {
        let s = std::f64::consts::SQRT_2;
        for j in 0..self.m {
            for i in 0..=j {
                out[svec_index(self.m, i, j)] = if i == j { a[(i, j)] } else { s * a[(i, j)] };
            }
        }
    }

    /// PSD projection of the block part; free scalars pass through.
    fn project_cone(&self, v: &[f64]) -> Result<Vec<f64>, SdpError> {
        let mut out = v.to_vec();
        if self.m > 0 {
            let a = self.block_mat(v);
            let a = match self.face {
                None => project_psd_mat(&a)?,
                Some(w) if w.ncols() == 0 => Mat::zeros(self.m, self.m),
                Some(w) => {
                    let b = w.transpose() * &a * w;
                    let b = project_psd_mat(&b)?;
                    w * &b * w.transpose()
                }
            };
            self.write_block(&a, &mut out);
        }
        Ok(out)
    }

    fn unpack(&self, v: &[f64]) -> (SymMat, Vec<f64>) {
        (SymMat::from_svec(self.m, &v[..self.nblock]), v[self.nblock..].to_vec())
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

struct Stall {
    window: usize,
    ratio: f64,
    best: f64,
    prev_best: f64,
    prev_gap: f64,
}

impl Stall {
    fn new(opts: &SolveOptions) -> Self {
        Self {
            window: opts.stall_window,
            ratio: opts.stall_ratio,
            best: f64::INFINITY,
            prev_best: f64::INFINITY,
            prev_gap: f64::INFINITY,
        }
    }

    /// Feeds one iteration; true once a full window passed with neither the
    /// best residual nor the iterate gap shrinking enough.
    fn update(&mut self, k: usize, res: f64, gap: f64) -> bool {
        self.best = self.best.min(res);
        if self.window == 0 || k % self.window != 0 {
            return false;
        }
        let stalled = k >= 2 * self.window
            && self.best > self.ratio * self.prev_best
            && gap > self.ratio * self.prev_gap;
        self.prev_best = self.best;
        self.prev_gap = gap;
        stalled
    }
}

/// Looks for a PSD block and free scalars satisfying the constraints.
pub fn solve_feasibility(p: &SdpProblem, opts: &SolveOptions) -> Result<SolveOutcome, SdpError> {
    let proj = AffineProjector::new(p)?;
    if let Some(w) = &opts.face {
        if w.nrows() != p.m {
            return Err(SdpError::Malformed("face basis has the wrong row count".into()));
        }
    }
    let layout = Layout {
        m: p.m,
        nblock: svec_len(p.m),
        face: opts.face.as_ref(),
    };
    let dim = p.dim();
    let mut z = vec![0.0; dim];
    if let Some((block, free)) = &opts.warm_start {
        if block.n() != p.m || free.len() != p.nfree {
            return Err(SdpError::Malformed("warm start has the wrong shape".into()));
        }
        block.to_svec(&mut z[..layout.nblock]);
        z[layout.nblock..].copy_from_slice(free);
    }
    let bnorm = {
        let b = p.rhs_norm();
        if b > 0.0 { b } else { 1.0 }
    };
    let tol = opts.eps_affine * bnorm;
    let mut stall = Stall::new(opts);
    // Dykstra keeps a correction term for each set
    let mut q = vec![0.0; dim];
    let mut pcorr = vec![0.0; dim];

    for k in 1..=opts.max_iter {
        let (x, y) = match opts.method {
            Method::DouglasRachford => {
                let x = layout.project_cone(&z)?;
                let refl: Vec<f64> = x.iter().zip(&z).map(|(a, b)| 2.0 * a - b).collect();
                let y = proj.project(&refl);
                for ((zi, yi), xi) in z.iter_mut().zip(&y).zip(&x) {
                    *zi += yi - xi;
                }
                (x, y)
            }
            Method::Dykstra => {
                let shifted: Vec<f64> = z.iter().zip(&pcorr).map(|(a, b)| a + b).collect();
                let y = proj.project(&shifted);
                for ((pc, s), yi) in pcorr.iter_mut().zip(&shifted).zip(&y) {
                    *pc = s - yi;
                }
                let shifted: Vec<f64> = y.iter().zip(&q).map(|(a, b)| a + b).collect();
                let x = layout.project_cone(&shifted)?;
                for ((qi, s), xi) in q.iter_mut().zip(&shifted).zip(&x) {
                    *qi = s - xi;
                }
                z.clone_from(&x);
                (x, y)
            }
        };
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(SdpError::NonFinite { iteration: k });
        }
        let res = proj.unscaled_residual_norm(&x);
        if res <= tol {
            let (block, free) = layout.unpack(&x);
            if let Some((affine_residual, min_eig)) = accept(p, &block, &free, opts)? {
                return Ok(SolveOutcome::Found(PsdSolution {
                    block,
                    free,
                    affine_residual,
                    min_eig,
                    iterations: k,
                }));
            }
        }
        if k % 25 == 0 || k == opts.max_iter {
            let (block, free) = layout.unpack(&y);
            if let Some((affine_residual, min_eig)) = accept(p, &block, &free, opts)? {
                return Ok(SolveOutcome::Found(PsdSolution {
                    block,
                    free,
                    affine_residual,
                    min_eig,
                    iterations: k,
                }));
            }
        }
        if stall.update(k, res, dist(&x, &y)) {
            return Ok(SolveOutcome::NotFound(not_found(p, &layout, &x, k, StopReason::Stagnated)?));
        }
    }
    let x = layout.project_cone(&z)?;
    Ok(SolveOutcome::NotFound(not_found(p, &layout, &x, opts.max_iter, StopReason::MaxIter)?))
}

fn not_found(
    p: &SdpProblem,
    layout: &Layout,
    x: &[f64],
    iterations: usize,
    reason: StopReason,
) -> Result<NoCertificate, SdpError> {
    let (block, free) = layout.unpack(x);
    let (affine_residual, min_eig) = check_solution(p, &block, &free)?;
    Ok(NoCertificate {
        iterations,
        affine_residual,
        min_eig,
        reason,
    })
}
