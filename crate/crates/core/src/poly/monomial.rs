use std::cmp::Ordering;
use std::fmt;

/// Exponent vector of a monomial `x_1^e_1 ... x_n^e_n`.
///
/// Monomials compare in graded lexicographic order: lower total degree
/// first, and within one degree `x_1 > x_2 > ... > x_n`, so sorting ascending
/// lists `1, x, y, z, x^2, xy, xz, y^2, yz, z^2` for three variables.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Self { exps }
    }

    pub fn one(nvars: usize) -> Self {
        Self {
            exps: vec![0; nvars],
        }
    }

    /// The monomial `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Self { exps }
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.nvars(), other.nvars());
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        debug_assert!(self.divides(other));
        Monomial {
            exps: other.exps.iter().zip(&self.exps).map(|(a, b)| a - b).collect(),
        }
    }

    /// Same exponents padded with zeros up to `nvars` variables.
    pub fn extended(&self, nvars: usize) -> Monomial {
        let mut exps = self.exps.clone();
        exps.resize(nvars, 0);
        Monomial { exps }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.exps
            .iter()
            .zip(x)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.exps.cmp(&self.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps)
    }
}

/// All monomials in `nvars` variables of total degree at most `degree`, in
/// ascending graded lexicographic order.
pub fn monomials_up_to(nvars: usize, degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for d in 0..=degree {
        out.extend(monomials_of_degree(nvars, d));
    }
    out
}

/// Monomials of exactly total degree `degree`, `x_1`-heavy ones first.
pub fn monomials_of_degree(nvars: usize, degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut exps = vec![0u32; nvars];
    fill(&mut exps, 0, degree, &mut out);
    out
}

fn fill(exps: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<Monomial>) {
    let n = exps.len();
    if n == 0 {
        if remaining == 0 {
            out.push(Monomial::new(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        exps[pos] = remaining;
        out.push(Monomial::new(exps.clone()));
        return;
    }
    for e in (0..=remaining).rev() {
        exps[pos] = e;
        fill(exps, pos + 1, remaining - e, out);
    }
    exps[pos] = 0;
}

/// Number of monomials of degree at most `d` in `n` variables, `C(n+d, d)`.
pub fn count_up_to(n: usize, d: u32) -> usize {
    binomial(n + d as usize, d as usize)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_listing() {
        let ms = monomials_up_to(3, 2);
        let exps: Vec<Vec<u32>> = ms.iter().map(|m| m.exponents().to_vec()).collect();
        assert_eq!(
            exps,
            vec![
                vec![0, 0, 0],
                vec![1, 0, 0],
                vec![0, 1, 0],
                vec![0, 0, 1],
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 2, 0],
                vec![0, 1, 1],
                vec![0, 0, 2],
            ]
        );
        let mut sorted = ms.clone();
        sorted.sort();
        assert_eq!(sorted, ms);
    }

    #[test]
    fn counts_match_binomials() {
        assert_eq!(monomials_up_to(6, 2).len(), 28);
        assert_eq!(count_up_to(6, 2), 28);
        assert_eq!(monomials_up_to(1, 0).len(), 1);
        assert_eq!(count_up_to(9, 3), 220);
        assert_eq!(monomials_up_to(9, 3).len(), 220);
    }

    #[test]
    fn divisibility() {
        let a = Monomial::new(vec![1, 2]);
        let b = Monomial::new(vec![2, 3]);
        assert!(a.divides(&b));
        assert!(!b.divides(&a));
        assert_eq!(a.quotient_of(&b), Monomial::new(vec![1, 1]));
    }
}
