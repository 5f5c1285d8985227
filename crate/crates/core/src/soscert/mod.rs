//! Real-radical membership through sums of squares: `p` lies in the real
//! radical of `<f>` when `-p^(2a) + sum h_i f_i` is a sum of squares.

mod certfile;
mod slack;

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use faer::Mat;

use crate::linalg::{self, LinalgError};
use crate::poly::{monomials_up_to, Monomial, Polynomial, PolynomialSystem};
use crate::sdp::{self, Constraint, SdpError, SdpProblem, SolveOptions, SolveOutcome, SymMat, Var};

pub use certfile::{read_certificate, write_certificate};
pub use slack::slack_augment;
pub use crate::pipeline::a_radical_validate;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SosError {
    #[error("degrees too small: need deg_sos >= {needed} (got {got})")]
    Degree { needed: u32, got: u32 },
    #[error("certificate has {got} multipliers for {expected} generators")]
    MultiplierCount { expected: usize, got: usize },
    #[error("certificate parts disagree: {0}")]
    Shape(String),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("certificate file line {line}: {msg}")]
    File { line: usize, msg: String },
}

/// Which polynomial the Gram matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertForm {
    /// `C` is a Gram matrix of `q = -p^(2a) + sum h_i f_i`; `C` must be PSD.
    SosPart,
    /// `C` is a Gram matrix of `sum h_i f_i = p^(2a) + sigma`; with `v` the
    /// coefficients of `p^a` over the basis, `C - v v^T` must be PSD.
    Full,
}

/// Evidence that `p` lies in the real radical, checkable without a solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SosCertificate {
    /// The polynomial certified, already normalized.
    pub p: Polynomial,
    /// Original polynomial equals `p_scale * p`.
    pub p_scale: f64,
    pub alpha: u32,
    pub multipliers: Vec<Polynomial>,
    pub gram_basis: Vec<Monomial>,
    pub gram: SymMat,
    pub form: CertForm,
    pub residual_inf: f64,
    pub min_eig: f64,
    pub deg_sos: u32,
    pub level: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertTolerances {
    /// Coefficient mismatch bound, relative to the largest coefficient of `q` or `p^(2a)`.
    pub tol_coeff: f64,
    pub tol_eig: f64,
}

impl Default for CertTolerances {
    fn default() -> Self {
        Self {
            tol_coeff: 1e-6,
            tol_eig: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verification {
    pub residual_inf: f64,
    pub scale: f64,
    pub min_eig: f64,
    pub passed: bool,
}

/// A membership SDP with the bookkeeping needed to read a certificate back.
#[derive(Debug, Clone)]
pub struct MembershipSdp {
    pub problem: SdpProblem,
    pub gram_basis: Vec<Monomial>,
    /// Monomial basis of each multiplier; `None` for dropped generators.
    pub mult_bases: Vec<Option<Vec<Monomial>>>,
    offsets: Vec<usize>,
}

impl MembershipSdp {
    pub fn multipliers(&self, free: &[f64], nvars: usize) -> Vec<Polynomial> {
        self.mult_bases
            .iter()
            .zip(&self.offsets)
            .map(|(b, &off)| match b {
                Some(basis) => Polynomial::from_coefficients(nvars, basis, &free[off..off + basis.len()]),
                None => Polynomial::zero(nvars),
            })
            .collect()
    }
}

/// Multiplier degrees `2 deg_sos - deg f_i`, `None` where that is negative
/// or the generator is zero.
pub fn multiplier_degrees(f: &PolynomialSystem, deg_sos: u32) -> Vec<Option<u32>> {
    f.polys()
        .iter()
        .map(|g| {
            if g.is_zero() {
                None
            } else {
                (2 * deg_sos).checked_sub(g.degree())
            }
        })
        .collect()
}

/// Builds the coefficient-matching SDP for `-p^(2 alpha) + sum h_i f_i = X^T C X`
/// with `X` all monomials of degree at most `deg_sos`.
pub fn build_membership_sdp(
    p: &Polynomial,
    f: &PolynomialSystem,
    alpha: u32,
    deg_h: &[Option<u32>],
    deg_sos: u32,
) -> Result<MembershipSdp, SosError> {
    let n = f.nvars();
    if p.nvars() != n {
        return Err(SosError::Shape(format!("p has {} variables, system {}", p.nvars(), n)));
    }
    if deg_h.len() != f.len() {
        return Err(SosError::MultiplierCount {
            expected: f.len(),
            got: deg_h.len(),
        });
    }
    let target = p.pow(2 * alpha);
    let mut needed = target.degree().div_ceil(2);
    for (g, d) in f.polys().iter().zip(deg_h) {
        if let Some(d) = d {
            needed = needed.max((d + g.degree()).div_ceil(2));
        }
    }
    if needed > deg_sos {
        return Err(SosError::Degree { needed, got: deg_sos });
    }
    let gram_basis = monomials_up_to(n, deg_sos);
    let rows_basis = monomials_up_to(n, 2 * deg_sos);
    let row_of: HashMap<&Monomial, usize> = rows_basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut constraints: Vec<Constraint> = rows_basis
        .iter()
        .map(|m| Constraint {
            terms: Vec::new(),
            rhs: -target.coeff(m),
        })
        .collect();
    for a in 0..gram_basis.len() {
        for b in a..gram_basis.len() {
            let r = row_of[&gram_basis[a].mul(&gram_basis[b])];
            constraints[r]
                .terms
                .push((Var::Block(a, b), if a == b { 1.0 } else { 2.0 }));
        }
    }
    let mut mult_bases = Vec::with_capacity(f.len());
    let mut offsets = Vec::with_capacity(f.len());
    let mut nfree = 0;
    for (g, d) in f.polys().iter().zip(deg_h) {
        offsets.push(nfree);
        let Some(d) = *d else {
            mult_bases.push(None);
            continue;
        };
        let basis = monomials_up_to(n, d);
        for (k, nu) in basis.iter().enumerate() {
            for (mu, c) in g.terms() {
                let r = row_of[&nu.mul(mu)];
                constraints[r].terms.push((Var::Free(nfree + k), -c));
            }
        }
        nfree += basis.len();
        mult_bases.push(Some(basis));
    }
    Ok(MembershipSdp {
        problem: SdpProblem {
            m: gram_basis.len(),
            nfree,
            constraints,
        },
        gram_basis,
        mult_bases,
        offsets,
    })
}

/// `X^T C X` as a polynomial.
pub fn gram_polynomial(basis: &[Monomial], c: &SymMat, nvars: usize) -> Polynomial {
    let mut terms = Vec::with_capacity(basis.len() * (basis.len() + 1) / 2);
    for a in 0..basis.len() {
        for b in a..basis.len() {
            let v = c.get(a, b);
            if v != 0.0 {
                terms.push((basis[a].mul(&basis[b]), if a == b { v } else { 2.0 * v }));
            }
        }
    }
    Polynomial::from_terms_tol(nvars, terms, 0.0)
}

/// Recomputes the certificate identity and eigenvalue from scratch.
pub fn verify_certificate(
    c: &SosCertificate,
    f: &PolynomialSystem,
    tol: CertTolerances,
) -> Result<Verification, SosError> {
    let n = f.nvars();
    if c.multipliers.len() != f.len() {
        return Err(SosError::MultiplierCount {
            expected: f.len(),
            got: c.multipliers.len(),
        });
    }
    if c.p.nvars() != n || c.multipliers.iter().any(|h| h.nvars() != n) {
        return Err(SosError::Shape("variable counts differ".into()));
    }
    if c.gram.n() != c.gram_basis.len() || c.gram_basis.iter().any(|m| m.nvars() != n) {
        return Err(SosError::Shape("Gram matrix and monomial basis differ in size".into()));
    }
    let power = c.p.pow_tol(2 * c.alpha, 0.0);
    let mut combo = Polynomial::zero(n);
    for (h, g) in c.multipliers.iter().zip(f.polys()) {
        combo = combo.combine(&h.mul_tol(g, 0.0), 1.0, 0.0);
    }
    let (target, gram) = match c.form {
        CertForm::SosPart => (combo.combine(&power, -1.0, 0.0), c.gram.clone()),
        CertForm::Full => {
            let half = c.p.pow_tol(c.alpha, 0.0);
            let index: HashMap<&Monomial, usize> = c.gram_basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
            let mut v = vec![0.0; c.gram_basis.len()];
            for (m, coef) in half.terms() {
                let i = *index.get(m).ok_or_else(|| {
                    SosError::Shape("p^alpha is not spanned by the Gram basis".into())
                })?;
                v[i] = coef;
            }
            let mut g = c.gram.clone();
            for a in 0..v.len() {
                for b in a..v.len() {
                    g.set(a, b, g.get(a, b) - v[a] * v[b]);
                }
            }
            (combo, g)
        }
    };
    let sos = gram_polynomial(&c.gram_basis, &c.gram, n);
    let residual_inf = target.combine(&sos, -1.0, 0.0).max_abs_coeff();
    let scale = target.max_abs_coeff().max(power.max_abs_coeff());
    let min_eig = if gram.n() == 0 { 0.0 } else { gram.min_eigenvalue()? };
    let passed = residual_inf <= tol.tol_coeff * scale && min_eig >= -tol.tol_eig;
    Ok(Verification {
        residual_inf,
        scale,
        min_eig,
        passed,
    })
}

#[derive(Debug, Clone)]
pub struct MembershipQuery {
    pub p: Polynomial,
    pub f: PolynomialSystem,
    pub alpha_max: u32,
    /// Extra SOS degree levels tried after the base sweep over alpha.
    pub levels: Vec<u32>,
    pub tol: CertTolerances,
    pub solve: SolveOptions,
    /// Real points of the variety. Those where `p` also vanishes restrict the
    /// Gram matrix to the face `C m(s) = 0`.
    pub known_zeros: Vec<Vec<f64>>,
}

/// `|p(s)|` below this (for normalized `p`) marks `s` as a common zero.
pub const FACE_ZERO_TOL: f64 = 1e-6;
const FACE_RANK_TOL: f64 = 1e-8;

/// Orthonormal basis of the complement of `{m(s)}` over the given points,
/// `None` when no point constrains the Gram matrix.
pub fn gram_face(basis: &[Monomial], zeros: &[Vec<f64>]) -> Result<Option<Mat<f64>>, SosError> {
    let m = basis.len();
    let cols: Vec<Vec<f64>> = zeros
        .iter()
        .map(|s| {
            let v: Vec<f64> = basis.iter().map(|b| b.evaluate(s)).collect();
            let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / nrm).collect()
        })
        .filter(|v: &Vec<f64>| v.iter().all(|x| x.is_finite()))
        .collect();
    if cols.is_empty() || m == 0 {
        return Ok(None);
    }
    let a = Mat::from_fn(m, cols.len(), |i, j| cols[j][i]);
    let d = linalg::svd_full(&a)?;
    let smax = d.s.first().copied().unwrap_or(0.0);
    let rank = d.s.iter().filter(|&&x| x > FACE_RANK_TOL * smax.max(1.0)).count();
    if rank == 0 {
        return Ok(None);
    }
    Ok(Some(Mat::from_fn(m, m - rank, |i, j| d.u[(i, rank + j)])))
}

impl MembershipQuery {
    pub fn new(p: Polynomial, f: PolynomialSystem) -> Self {
        Self {
            p,
            f,
            alpha_max: 3,
            levels: vec![0, 1, 2],
            tol: CertTolerances::default(),
            solve: SolveOptions::default(),
            known_zeros: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum AttemptStatus {
    Certified,
    /// Every multiplier was dropped, so the SOS part would be `-p^(2a)`.
    DegreeInfeasible,
    StructurallyInfeasible { residual: f64 },
    SolverStopped { iterations: usize, affine_residual: f64, min_eig: f64 },
    VerifierRejected { iterations: usize, residual_inf: f64, min_eig: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attempt {
    pub alpha: u32,
    pub level: u32,
    pub deg_sos: u32,
    pub deg_h: Vec<Option<u32>>,
    pub gram_size: usize,
    pub constraints: usize,
    #[serde(flatten)]
    pub status: AttemptStatus,
}

#[derive(Debug, Clone)]
pub enum CertifyOutcome {
    Certified { cert: SosCertificate, trace: Vec<Attempt> },
    /// Inconclusive: no certificate within the ladder. Not a proof of non-membership.
    NotFound { trace: Vec<Attempt> },
}

impl CertifyOutcome {
    pub fn trace(&self) -> &[Attempt] {
        match self {
            Self::Certified { trace, .. } | Self::NotFound { trace } => trace,
        }
    }

    pub fn certificate(&self) -> Option<&SosCertificate> {
        match self {
            Self::Certified { cert, .. } => Some(cert),
            Self::NotFound { .. } => None,
        }
    }
}

const VERIFY_RETRIES: usize = 3;

/// Sweeps `alpha = 1..=alpha_max` at each level, with `deg_sos = alpha * deg p + level`,
/// and returns the first certificate the verifier accepts.
pub fn certify(q: &MembershipQuery) -> Result<CertifyOutcome, SosError> {
    let n = q.f.nvars();
    if q.p.nvars() != n {
        return Err(SosError::Shape(format!("p has {} variables, system {}", q.p.nvars(), n)));
    }
    let (p, p_scale) = q.p.normalized();
    let mut trace = Vec::new();
    if p.is_zero() {
        let cert = SosCertificate {
            p: p.clone(),
            p_scale,
            alpha: 1,
            multipliers: vec![Polynomial::zero(n); q.f.len()],
            gram_basis: vec![Monomial::one(n)],
            gram: SymMat::zeros(1),
            form: CertForm::SosPart,
            residual_inf: 0.0,
            min_eig: 0.0,
            deg_sos: 0,
            level: 0,
        };
        return Ok(CertifyOutcome::Certified { cert, trace });
    }
    let zeros: Vec<Vec<f64>> = q
        .known_zeros
        .iter()
        .filter(|s| s.len() == n && p.evaluate(s).is_ok_and(|v| v.abs() <= FACE_ZERO_TOL))
        .cloned()
        .collect();
    for &level in &q.levels {
        for alpha in 1..=q.alpha_max.max(1) {
            let deg_sos = alpha * p.degree() + level;
            let deg_h = multiplier_degrees(&q.f, deg_sos);
            let mut attempt = Attempt {
                alpha,
                level,
                deg_sos,
                deg_h: deg_h.clone(),
                gram_size: 0,
                constraints: 0,
                status: AttemptStatus::DegreeInfeasible,
            };
            if deg_h.iter().all(Option::is_none) {
                trace.push(attempt);
                continue;
            }
            let sdp = build_membership_sdp(&p, &q.f, alpha, &deg_h, deg_sos)?;
            attempt.gram_size = sdp.problem.m;
            attempt.constraints = sdp.problem.constraints.len();
            let mut solve = q.solve.clone();
            if solve.face.is_none() {
                solve.face = gram_face(&sdp.gram_basis, &zeros)?;
            }
            let mut round = 0;
            loop {
                let outcome = match sdp::solve_feasibility(&sdp.problem, &solve) {
                    Ok(o) => o,
                    Err(SdpError::StructurallyInfeasible { residual }) => {
                        attempt.status = AttemptStatus::StructurallyInfeasible { residual };
                        break;
                    }
                    Err(e) => return Err(e.into()),
                };
                let sol = match outcome {
                    SolveOutcome::NotFound(nc) => {
                        attempt.status = AttemptStatus::SolverStopped {
                            iterations: nc.iterations,
                            affine_residual: nc.affine_residual,
                            min_eig: nc.min_eig,
                        };
                        break;
                    }
                    SolveOutcome::Found(sol) => sol,
                };
                let mut cert = SosCertificate {
                    multipliers: sdp.multipliers(&sol.free, n),
                    p: p.clone(),
                    p_scale,
                    alpha,
                    gram_basis: sdp.gram_basis.clone(),
                    gram: sol.block.clone(),
                    form: CertForm::SosPart,
                    residual_inf: 0.0,
                    min_eig: 0.0,
                    deg_sos,
                    level,
                };
                let v = verify_certificate(&cert, &q.f, q.tol)?;
                cert.residual_inf = v.residual_inf;
                cert.min_eig = v.min_eig;
                if v.passed {
                    attempt.status = AttemptStatus::Certified;
                    trace.push(attempt);
                    return Ok(CertifyOutcome::Certified { cert, trace });
                }
                attempt.status = AttemptStatus::VerifierRejected {
                    iterations: sol.iterations,
                    residual_inf: v.residual_inf,
                    min_eig: v.min_eig,
                };
                // The solver's acceptance test is relative to the block norm and
                // the verifier's is absolute: tighten and continue from here.
                if round == VERIFY_RETRIES {
                    break;
                }
                round += 1;
                if v.min_eig < -q.tol.tol_eig {
                    solve.eps_eig *= (0.5 * q.tol.tol_eig / -v.min_eig).min(0.1);
                }
                if v.residual_inf > q.tol.tol_coeff * v.scale {
                    solve.eps_affine *= 0.1;
                }
                solve.warm_start = Some((sol.block, sol.free));
            }
            trace.push(attempt);
        }
    }
    Ok(CertifyOutcome::NotFound { trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_polynomial, parse_system};

    fn cubic() -> (PolynomialSystem, Polynomial) {
        let f = parse_system("vars x\nx^3 - 2").unwrap();
        let p = Polynomial::from_terms(
            1,
            [(Monomial::new(vec![1]), 1.0), (Monomial::new(vec![0]), -2f64.cbrt())],
        );
        (f, p)
    }

    #[test]
    fn constraint_count() {
        let f = parse_system("vars x y\nx^2 + y^2 - 2").unwrap();
        let p = parse_polynomial("x - 1", f.names()).unwrap();
        let sdp = build_membership_sdp(&p, &f, 1, &[Some(2)], 2).unwrap();
        assert_eq!(sdp.problem.constraints.len(), 15);
        assert_eq!(sdp.problem.m, 6);
        assert!(matches!(
            build_membership_sdp(&p, &f, 3, &[Some(2)], 2),
            Err(SosError::Degree { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn cubic_root_sdp_shape() {
        let (f, p) = cubic();
        let sdp = build_membership_sdp(&p, &f, 2, &[Some(1)], 2).unwrap();
        assert_eq!((sdp.problem.m, sdp.problem.nfree), (3, 2));
    }

    #[test]
    fn cubic_root_needs_alpha_two() {
        let (f, p) = cubic();
        let out = certify(&MembershipQuery::new(p, f.clone())).unwrap();
        let cert = out.certificate().expect("certified");
        assert_eq!(cert.alpha, 2);
        assert_eq!(out.trace()[0].status, AttemptStatus::DegreeInfeasible);
        let v = verify_certificate(cert, &f, CertTolerances::default()).unwrap();
        assert!(v.passed && v.residual_inf <= 1e-7 * v.scale);
    }

    #[test]
    fn displayed_gram_in_full_form() {
        let (f, p) = cubic();
        let c = 2f64.cbrt();
        let c2 = c * c;
        let gram = SymMat::from_rows(&[
            vec![8.0 * c, -4.0, -2.0 * c2],
            vec![-4.0, 4.0 * c2, -2.0 * c],
            vec![-2.0 * c2, -2.0 * c, 4.0],
        ])
        .unwrap();
        let mut cert = SosCertificate {
            p: p.clone(),
            p_scale: 1.0,
            alpha: 2,
            multipliers: vec![p.scale(4.0)],
            gram_basis: monomials_up_to(1, 2),
            gram,
            form: CertForm::Full,
            residual_inf: 0.0,
            min_eig: 0.0,
            deg_sos: 2,
            level: 0,
        };
        let v = verify_certificate(&cert, &f, CertTolerances::default()).unwrap();
        assert!(v.passed && v.residual_inf <= 1e-9, "{v:?}");
        cert.gram.set(2, 2, 3.0);
        let v = verify_certificate(&cert, &f, CertTolerances::default()).unwrap();
        assert!(!v.passed);
        assert!((v.residual_inf - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generator_is_trivially_certified() {
        let f = parse_system("vars x y\nx^2 + y^2 - 2; 2*x*y^2 - x + 1").unwrap();
        let p = f.polys()[0].clone();
        let cert = SosCertificate {
            p: p.clone(),
            p_scale: 1.0,
            alpha: 1,
            multipliers: vec![p.clone(), Polynomial::zero(2)],
            gram_basis: monomials_up_to(2, 2),
            gram: SymMat::zeros(6),
            form: CertForm::SosPart,
            residual_inf: 0.0,
            min_eig: 0.0,
            deg_sos: 2,
            level: 0,
        };
        assert!(verify_certificate(&cert, &f, CertTolerances::default()).unwrap().passed);
    }
}
