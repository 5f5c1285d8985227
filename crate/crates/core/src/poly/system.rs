use std::fmt::Write as _;

use super::monomial::Monomial;
use super::polynomial::{Polynomial, PowerTable};
use super::PolyError;

/// An ordered list of polynomials in one shared ring with named variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialSystem {
    names: Vec<String>,
    polys: Vec<Polynomial>,
}

impl PolynomialSystem {
    pub fn new(names: Vec<String>, polys: Vec<Polynomial>) -> Result<Self, PolyError> {
        let n = names.len();
        if let Some(p) = polys.iter().find(|p| p.nvars() != n) {
            return Err(PolyError::ArityMismatch {
                left: n,
                right: p.nvars(),
            });
        }
        Ok(Self { names, polys })
    }

    /// System with default variable names `x1, x2, ...`.
    pub fn with_default_names(nvars: usize, polys: Vec<Polynomial>) -> Result<Self, PolyError> {
        Self::new(default_names(nvars), polys)
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.polys.iter().map(Polynomial::degree).collect()
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Values `f_i(x)` in system order.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, PolyError> {
        if x.len() != self.nvars() {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars(),
                got: x.len(),
            });
        }
        let table = PowerTable::new(x, self.max_exponents());
        Ok(self.polys.iter().map(|p| p.eval_with(&table)).collect())
    }

    /// `max_i |f_i(x)|`, zero for an empty system.
    pub fn residual(&self, x: &[f64]) -> Result<f64, PolyError> {
        Ok(self
            .evaluate(x)?
            .into_iter()
            .fold(0.0, |acc, v| acc.max(v.abs())))
    }

    fn max_exponents(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.nvars()];
        for p in &self.polys {
            for (o, e) in out.iter_mut().zip(p.max_exponents()) {
                *o = (*o).max(e);
            }
        }
        out
    }

    /// Same variables, polynomials appended.
    pub fn extended_with(&self, extra: Vec<Polynomial>) -> Result<Self, PolyError> {
        let mut polys = self.polys.clone();
        polys.extend(extra);
        Self::new(self.names.clone(), polys)
    }
}

pub(crate) fn default_names(nvars: usize) -> Vec<String> {
    (1..=nvars).map(|i| format!("x{i}")).collect()
}

/// Shortest decimal text that parses back to exactly `c`.
pub fn format_coefficient(c: f64) -> String {
    let a = c.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{c}")
    } else {
        format!("{c:e}")
    }
}

/// Terms by descending degree, and within a degree by descending exponent of
/// the first variable, then the second, and so on: `x^2 + x*y + y^2 - x + 1`.
pub fn format_polynomial(p: &Polynomial, names: &[String]) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut terms: Vec<(&Monomial, f64)> = p.terms().collect();
    terms.sort_by(|a, b| {
        b.0.degree()
            .cmp(&a.0.degree())
            .then_with(|| b.0.exponents().cmp(a.0.exponents()))
    });
    let mut out = String::new();
    for (i, (m, c)) in terms.into_iter().enumerate() {
        let (neg, mag) = (c < 0.0 || (c == 0.0 && c.is_sign_negative()), c.abs());
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        write_term(&mut out, m, mag, names);
    }
    out
}

fn write_term(out: &mut String, m: &Monomial, mag: f64, names: &[String]) {
    let mut factors: Vec<String> = Vec::new();
    for (name, &e) in names.iter().zip(m.exponents()) {
        match e {
            0 => {}
            1 => factors.push(name.clone()),
            _ => factors.push(format!("{name}^{e}")),
        }
    }
    if factors.is_empty() {
        out.push_str(&format_coefficient(mag));
        return;
    }
    if mag != 1.0 {
        let _ = write!(out, "{}*", format_coefficient(mag));
    }
    out.push_str(&factors.join("*"));
}

/// System file text: a `vars` header followed by one polynomial per line.
pub fn format_system(sys: &PolynomialSystem) -> String {
    let mut out = format!("vars {}\n", sys.names.join(" "));
    for p in &sys.polys {
        out.push_str(&format_polynomial(p, &sys.names));
        out.push('\n');
    }
    out
}
