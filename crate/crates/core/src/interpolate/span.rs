use std::collections::BTreeSet;

use faer::Mat;

use super::{multiples_up_to, InterpError};
use crate::linalg;
use crate::poly::{Monomial, Polynomial};

/// Orthonormal columns spanning the coefficient vectors of `polys` over `basis`.
pub fn orthonormal_span(polys: &[Polynomial], basis: &[Monomial], tol: f64) -> Result<Mat<f64>, InterpError> {
    if polys.is_empty() {
        return Ok(Mat::zeros(basis.len(), 0));
    }
    let cols: Vec<Vec<f64>> = polys.iter().map(|p| p.coefficients_in(basis)).collect();
    let m = Mat::from_fn(basis.len(), cols.len(), |i, j| cols[j][i]);
    let d = linalg::svd_full(&m)?;
    let r = linalg::numerical_rank(&d.s, tol);
    Ok(Mat::from_fn(basis.len(), r, |i, j| d.u[(i, j)]))
}

fn union_basis(a: &[Polynomial], b: &[Polynomial]) -> Vec<Monomial> {
    let set: BTreeSet<Monomial> = a
        .iter()
        .chain(b)
        .flat_map(|p| p.terms().map(|(m, _)| m.clone()))
        .collect();
    set.into_iter().collect()
}

fn one_way(from: &[Polynomial], onto: &Mat<f64>, basis: &[Monomial]) -> f64 {
    let mut worst = 0.0f64;
    for p in from {
        let v = p.coefficients_in(basis);
        let nv = linalg::norm2(&v);
        if nv == 0.0 {
            continue;
        }
        let mut r = v.clone();
        for j in 0..onto.ncols() {
            let c: f64 = (0..basis.len()).map(|i| onto[(i, j)] * v[i]).sum();
            for (i, ri) in r.iter_mut().enumerate() {
                *ri -= c * onto[(i, j)];
            }
        }
        worst = worst.max(linalg::norm2(&r) / nv);
    }
    worst
}

/// Largest relative residual when projecting each polynomial of one list onto
/// the coefficient span of the other, taken over both directions.
pub fn span_distance(a: &[Polynomial], b: &[Polynomial]) -> Result<f64, InterpError> {
    let basis = union_basis(a, b);
    let qa = orthonormal_span(a, &basis, 1e-10)?;
    let qb = orthonormal_span(b, &basis, 1e-10)?;
    Ok(one_way(a, &qb, &basis).max(one_way(b, &qa, &basis)))
}

/// [`span_distance`] between the degree-`d` slices of the ideals generated by `a` and `b`.
pub fn ideal_slice_distance(a: &[Polynomial], b: &[Polynomial], nvars: usize, d: u32) -> Result<f64, InterpError> {
    span_distance(&multiples_up_to(a, d, nvars), &multiples_up_to(b, d, nvars))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    fn polys(src: &[&str]) -> Vec<Polynomial> {
        let names = vec!["x".to_string(), "y".to_string()];
        src.iter().map(|s| parse_polynomial(s, &names).unwrap()).collect()
    }

    #[test]
    fn equal_spans() {
        let a = polys(&["x + y", "x - y"]);
        let b = polys(&["x", "y"]);
        assert!(span_distance(&a, &b).unwrap() < 1e-14);
        let c = polys(&["x", "y^2"]);
        assert!(span_distance(&a, &c).unwrap() > 0.5);
    }

    #[test]
    fn ideal_slices() {
        let a = polys(&["x^2 - x*y", "y^2 + x"]);
        let b = polys(&["x*(x - y)", "y^2 + x", "x*y^2 + x^2"]);
        assert!(ideal_slice_distance(&a, &b, 2, 3).unwrap() < 1e-14);
        assert!(span_distance(&a, &b).unwrap() > 0.1);
    }
}
