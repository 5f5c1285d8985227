use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use super::monomial::Monomial;
use super::PolyError;

/// Coefficients with magnitude at or below this are purged after arithmetic.
pub const DEFAULT_DROP_TOL: f64 = 1e-14;

/// Sparse multivariate polynomial with `f64` coefficients.
///
/// Terms are kept in a map keyed by [`Monomial`], so iteration runs in
/// ascending graded lexicographic order. No stored coefficient is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::from_terms(nvars, [(Monomial::one(nvars), c)])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::from_terms(nvars, [(Monomial::var(nvars, i), 1.0)])
    }

    /// Builds a polynomial, summing repeated monomials and purging terms
    /// below [`DEFAULT_DROP_TOL`].
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, f64)>,
    {
        Self::from_terms_tol(nvars, terms, DEFAULT_DROP_TOL)
    }

    pub fn from_terms_tol<I>(nvars: usize, terms: I, drop_tol: f64) -> Self
    where
        I: IntoIterator<Item = (Monomial, f64)>,
    {
        let mut map = BTreeMap::new();
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial arity does not match");
            *map.entry(m).or_insert(0.0) += c;
        }
        let mut p = Self { nvars, terms: map };
        p.purge(drop_tol);
        p
    }

    /// Coefficient vector over `basis` mapped back to a polynomial.
    pub fn from_coefficients(nvars: usize, basis: &[Monomial], coeffs: &[f64]) -> Self {
        Self::from_terms(nvars, basis.iter().cloned().zip(coeffs.iter().copied()))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, f64)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    /// Coefficients over `basis`; terms outside the basis are ignored.
    pub fn coefficients_in(&self, basis: &[Monomial]) -> Vec<f64> {
        basis.iter().map(|m| self.coeff(m)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Leading monomial and coefficient in graded lex order.
    pub fn leading_term(&self) -> Option<(&Monomial, f64)> {
        self.terms.iter().next_back().map(|(m, &c)| (m, c))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, c| acc.max(c.abs()))
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn purge(&mut self, drop_tol: f64) {
        self.terms.retain(|_, c| c.abs() > drop_tol);
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Self::from_terms(self.nvars, self.terms.iter().map(|(m, &c)| (m.clone(), c * s)))
    }

    fn check_arity(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.nvars != other.nvars {
            return Err(PolyError::ArityMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_arity(other)?;
        Ok(self.combine(other, 1.0, DEFAULT_DROP_TOL))
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_arity(other)?;
        Ok(self.combine(other, -1.0, DEFAULT_DROP_TOL))
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_arity(other)?;
        Ok(self.mul_tol(other, DEFAULT_DROP_TOL))
    }

    /// `self + s * other`, purging at `drop_tol`.
    pub fn combine(&self, other: &Polynomial, s: f64, drop_tol: f64) -> Polynomial {
        assert_eq!(self.nvars, other.nvars, "polynomial arity mismatch");
        let mut terms = self.terms.clone();
        for (m, &c) in &other.terms {
            *terms.entry(m.clone()).or_insert(0.0) += s * c;
        }
        let mut p = Polynomial {
            nvars: self.nvars,
            terms,
        };
        p.purge(drop_tol);
        p
    }

    pub fn mul_tol(&self, other: &Polynomial, drop_tol: f64) -> Polynomial {
        assert_eq!(self.nvars, other.nvars, "polynomial arity mismatch");
        let mut terms: BTreeMap<Monomial, f64> = BTreeMap::new();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                *terms.entry(a.mul(b)).or_insert(0.0) += ca * cb;
            }
        }
        let mut p = Polynomial {
            nvars: self.nvars,
            terms,
        };
        p.purge(drop_tol);
        p
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        self.pow_tol(e, DEFAULT_DROP_TOL)
    }

    /// Binary exponentiation; `p^0 = 1` including for the zero polynomial.
    pub fn pow_tol(&self, mut e: u32, drop_tol: f64) -> Polynomial {
        let mut result = Polynomial::constant(self.nvars, 1.0);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_tol(&base, drop_tol);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_tol(&base, drop_tol);
            }
        }
        result
    }

    /// Evaluates at `x` using per-variable power tables.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, PolyError> {
        if x.len() != self.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                got: x.len(),
            });
        }
        let table = PowerTable::new(x, self.max_exponents());
        Ok(self.eval_with(&table))
    }

    pub(crate) fn eval_with(&self, table: &PowerTable) -> f64 {
        self.terms
            .iter()
            .map(|(m, &c)| c * table.monomial(m))
            .sum()
    }

    pub(crate) fn max_exponents(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.nvars];
        for m in self.terms.keys() {
            for (o, &e) in out.iter_mut().zip(m.exponents()) {
                *o = (*o).max(e);
            }
        }
        out
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let terms = self.terms.iter().filter_map(|(m, &c)| {
            let e = m.exponents()[i];
            if e == 0 {
                return None;
            }
            let mut exps = m.exponents().to_vec();
            exps[i] -= 1;
            Some((Monomial::new(exps), c * e as f64))
        });
        Polynomial::from_terms(self.nvars, terms)
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.nvars).map(|i| self.derivative(i)).collect()
    }

    /// Same polynomial viewed in `nvars >= self.nvars()` variables; the new
    /// variables are appended after the existing ones.
    pub fn extend_vars(&self, nvars: usize) -> Polynomial {
        assert!(nvars >= self.nvars);
        Polynomial {
            nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (m.extended(nvars), c))
                .collect(),
        }
    }

    /// Substitutes `x_i -> subs[i]`; all substitutes share one arity.
    pub fn compose(&self, subs: &[Polynomial]) -> Result<Polynomial, PolyError> {
        if subs.len() != self.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                got: subs.len(),
            });
        }
        let target = subs.first().map(|s| s.nvars).unwrap_or(0);
        if let Some(bad) = subs.iter().find(|s| s.nvars != target) {
            return Err(PolyError::ArityMismatch {
                left: target,
                right: bad.nvars,
            });
        }
        let mut powers: Vec<Vec<Polynomial>> = Vec::with_capacity(self.nvars);
        for (s, e) in subs.iter().zip(self.max_exponents()) {
            let mut row = vec![Polynomial::constant(target, 1.0)];
            for k in 1..=e as usize {
                let next = row[k - 1].mul_tol(s, DEFAULT_DROP_TOL);
                row.push(next);
            }
            powers.push(row);
        }
        let mut acc = Polynomial::zero(target);
        for (m, &c) in &self.terms {
            let mut t = Polynomial::constant(target, c);
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    t = t.mul_tol(&powers[i][e as usize], DEFAULT_DROP_TOL);
                }
            }
            acc = acc.combine(&t, 1.0, DEFAULT_DROP_TOL);
        }
        Ok(acc)
    }

    /// Polynomial `q(x) = self(x - center)`.
    pub fn shifted(&self, center: &[f64]) -> Result<Polynomial, PolyError> {
        let n = self.nvars;
        let subs: Vec<Polynomial> = (0..n)
            .map(|i| {
                Polynomial::from_terms(
                    n,
                    [(Monomial::var(n, i), 1.0), (Monomial::one(n), -center[i])],
                )
            })
            .collect();
        self.compose(&subs)
    }

    /// Exact quotient `self / divisor` by multivariate long division in
    /// graded lex order. Fails when the remainder is not negligible relative
    /// to the dividend's largest coefficient.
    pub fn div_exact(&self, divisor: &Polynomial, rel_tol: f64) -> Result<Polynomial, PolyError> {
        self.check_arity(divisor)?;
        let (lm, lc) = match divisor.leading_term() {
            Some((m, c)) => (m.clone(), c),
            None => return Err(PolyError::DivisionByZero),
        };
        let scale = self.max_abs_coeff().max(f64::MIN_POSITIVE);
        let cut = rel_tol * scale * 1e-4;
        let mut rem = self.clone();
        let mut quot = Polynomial::zero(self.nvars);
        let mut leftover = 0.0f64;
        while let Some((m, c)) = rem.leading_term() {
            let m = m.clone();
            if lm.divides(&m) {
                let t = Polynomial::from_terms(self.nvars, [(lm.quotient_of(&m), c / lc)]);
                rem = rem.combine(&t.mul_tol(divisor, 0.0), -1.0, 0.0);
                rem.terms.remove(&m);
                rem.purge(cut);
                quot = quot.combine(&t, 1.0, 0.0);
            } else {
                leftover = leftover.max(c.abs());
                rem.terms.remove(&m);
            }
        }
        if leftover > rel_tol * scale {
            return Err(PolyError::InexactDivision {
                remainder: leftover / scale,
            });
        }
        quot.purge(DEFAULT_DROP_TOL);
        Ok(quot)
    }

    /// Unit coefficient-norm copy together with the norm that was divided out.
    pub fn normalized(&self) -> (Polynomial, f64) {
        let n = self.coeff_norm();
        if n == 0.0 {
            return (self.clone(), 1.0);
        }
        (self.scale(1.0 / n), n)
    }
}

/// Powers `x_i^k` for `k <= max_exp[i]`, shared across many monomial evaluations.
pub(crate) struct PowerTable {
    powers: Vec<Vec<f64>>,
}

impl PowerTable {
    pub(crate) fn new(x: &[f64], max_exp: Vec<u32>) -> Self {
        let powers = x
            .iter()
            .zip(max_exp)
            .map(|(&xi, e)| {
                let mut row = Vec::with_capacity(e as usize + 1);
                row.push(1.0);
                for k in 1..=e as usize {
                    row.push(row[k - 1] * xi);
                }
                row
            })
            .collect();
        Self { powers }
    }

    pub(crate) fn monomial(&self, m: &Monomial) -> f64 {
        m.exponents()
            .iter()
            .zip(&self.powers)
            .map(|(&e, row)| row[e as usize])
            .product()
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.combine(rhs, 1.0, DEFAULT_DROP_TOL)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.combine(rhs, -1.0, DEFAULT_DROP_TOL)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.mul_tol(rhs, DEFAULT_DROP_TOL)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}
