//! Degree-bounded vanishing ideals of point samples: evaluation matrices,
//! null spaces, Hilbert functions and the regularity test.

mod report;
mod span;

pub use report::{format_basis_report, rounded_for_display};
pub use span::{ideal_slice_distance, orthonormal_span, span_distance};

use faer::Mat;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, LinalgError};
use crate::poly::{count_up_to, monomials_up_to, Monomial, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterpError {
    #[error("no sample points")]
    NoPoints,
    #[error("point {index} has {got} coordinates, expected {expected}")]
    Dimension { index: usize, expected: usize, got: usize },
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("every singular value of the evaluation matrix is below the threshold")]
    Degenerate,
    #[error("Hilbert function did not reach {points} by degree {cap}")]
    RegularityNotReached { points: usize, cap: u32 },
    #[error("rank did not stabilize within {cap} samples")]
    SampleCap { cap: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpOptions {
    /// Singular values below `tol * s_max` count as zero.
    pub tol: f64,
    /// Divide each evaluation row by its Euclidean norm.
    pub scaling: bool,
    /// Evaluate monomials at `t - centroid` instead of `t`.
    pub center: bool,
}

impl Default for InterpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            scaling: true,
            center: false,
        }
    }
}

/// Every monomial of degree at most `d` in `n` variables, ascending.
pub fn monomial_basis(n: usize, d: u32) -> Vec<Monomial> {
    monomials_up_to(n, d)
}

/// `M[i][j] = basis[j](t_i - center)`, optionally row-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalMatrix {
    pub basis: Vec<Monomial>,
    pub rows: Vec<Vec<f64>>,
    /// Raw row `i` equals `rows[i] * scales[i]`.
    pub scales: Vec<f64>,
    pub center: Option<Vec<f64>>,
}

impl EvalMatrix {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.basis.len()
    }

    pub fn raw_row(&self, i: usize) -> Vec<f64> {
        self.rows[i].iter().map(|v| v * self.scales[i]).collect()
    }

    pub fn to_faer(&self) -> Mat<f64> {
        linalg::from_rows(&self.rows, self.ncols())
    }

    /// Leading `k` columns as a faer matrix.
    fn leading(&self, k: usize) -> Mat<f64> {
        Mat::from_fn(self.nrows(), k, |i, j| self.rows[i][j])
    }
}

fn check_points(points: &[Vec<f64>]) -> Result<usize, InterpError> {
    let first = points.first().ok_or(InterpError::NoPoints)?;
    let n = first.len();
    for (index, p) in points.iter().enumerate() {
        if p.len() != n {
            return Err(InterpError::Dimension {
                index,
                expected: n,
                got: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(InterpError::NonFinite { index });
        }
    }
    Ok(n)
}

pub fn centroid(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.first().map_or(0, Vec::len);
    let mut c = vec![0.0; n];
    for p in points {
        for (ci, pi) in c.iter_mut().zip(p) {
            *ci += pi;
        }
    }
    let k = points.len().max(1) as f64;
    c.iter_mut().for_each(|v| *v /= k);
    c
}

pub fn evaluation_matrix(points: &[Vec<f64>], d: u32, scaling: bool) -> Result<EvalMatrix, InterpError> {
    build_eval(points, d, scaling, None)
}

pub fn evaluation_matrix_centered(
    points: &[Vec<f64>],
    d: u32,
    scaling: bool,
    center: &[f64],
) -> Result<EvalMatrix, InterpError> {
    build_eval(points, d, scaling, Some(center.to_vec()))
}

fn build_eval(
    points: &[Vec<f64>],
    d: u32,
    scaling: bool,
    center: Option<Vec<f64>>,
) -> Result<EvalMatrix, InterpError> {
    let n = check_points(points)?;
    if let Some(c) = &center {
        if c.len() != n {
            return Err(InterpError::Dimension {
                index: usize::MAX,
                expected: n,
                got: c.len(),
            });
        }
    }
    let basis = monomial_basis(n, d);
    let mut rows = Vec::with_capacity(points.len());
    let mut scales = Vec::with_capacity(points.len());
    for p in points {
        let t: Vec<f64> = match &center {
            Some(c) => p.iter().zip(c).map(|(a, b)| a - b).collect(),
            None => p.clone(),
        };
        let mut row: Vec<f64> = basis.iter().map(|m| m.evaluate(&t)).collect();
        let s = if scaling { linalg::norm2(&row) } else { 1.0 };
        // the constant column keeps s >= 1
        row.iter_mut().for_each(|v| *v /= s);
        rows.push(row);
        scales.push(s);
    }
    Ok(EvalMatrix {
        basis,
        rows,
        scales,
        center,
    })
}

/// `(r, generated_at_r)`: `r` is the least degree where the Hilbert function
/// reaches the number of points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Regularity {
    pub r: u32,
    pub generated_at_r: bool,
}

impl Regularity {
    /// Degree whose slice generates the whole ideal.
    pub fn generation_degree(&self) -> u32 {
        if self.generated_at_r {
            self.r
        } else {
            self.r + 1
        }
    }
}

/// Orthonormal basis of `I(T)_{<=d}`, ordered so that the first
/// `C(n+c, c) - hilbert[c]` generators span `I(T)_{<=c}` for every `c`.
#[derive(Debug, Clone)]
pub struct VanishingBasis {
    pub nvars: usize,
    pub degree: u32,
    pub basis: Vec<Monomial>,
    pub generators: Vec<Polynomial>,
    pub generator_degrees: Vec<u32>,
    pub hilbert: Vec<usize>,
    pub singular_values: Vec<f64>,
    pub regularity: Option<Regularity>,
}

impl VanishingBasis {
    /// Generators spanning `I(T)_{<=c}`.
    pub fn slice(&self, c: u32) -> &[Polynomial] {
        let k = self.generator_degrees.iter().take_while(|&&g| g <= c).count();
        &self.generators[..k]
    }

    /// Coefficient vectors over `basis`, one column per generator.
    pub fn coefficient_matrix(&self) -> Mat<f64> {
        let cols: Vec<Vec<f64>> = self
            .generators
            .iter()
            .map(|g| g.coefficients_in(&self.basis))
            .collect();
        Mat::from_fn(self.basis.len(), cols.len(), |i, j| cols[j][i])
    }
}

fn null_dims(em: &EvalMatrix, n: usize, d: u32, tol: f64) -> Result<(Vec<Mat<f64>>, Vec<usize>, Vec<f64>), InterpError> {
    let mut nulls = Vec::new();
    let mut hilbert = Vec::new();
    let mut top_s = Vec::new();
    for c in 0..=d {
        let k = count_up_to(n, c);
        // row scaling of the full matrix rescales every leading block by the
        // same positive factors, so the ranks are unaffected
        let (ns, s) = linalg::null_space(&em.leading(k), tol)?;
        if s.iter().all(|&v| v == 0.0) {
            return Err(InterpError::Degenerate);
        }
        hilbert.push(k - ns.ncols());
        nulls.push(ns);
        top_s = s;
    }
    Ok((nulls, hilbert, top_s))
}

/// Orthonormal vectors spanning `span(cand)` modulo the column span of `q`
/// (`q` orthonormal), at most `k` of them.
fn complement(q: &Mat<f64>, cand: &Mat<f64>, k: usize) -> Result<Mat<f64>, LinalgError> {
    let dim = cand.nrows();
    let mut r = cand.clone();
    if q.ncols() > 0 {
        for _ in 0..2 {
            let proj = q * (q.transpose() * &r);
            r -= proj;
        }
    }
    if k == 0 || r.ncols() == 0 {
        return Ok(Mat::zeros(dim, 0));
    }
    let d = linalg::svd_full(&r)?;
    Ok(Mat::from_fn(dim, k.min(d.s.len()), |i, j| d.u[(i, j)]))
}

fn hcat(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols() + b.ncols(), |i, j| {
        if j < a.ncols() {
            a[(i, j)]
        } else {
            b[(i, j - a.ncols())]
        }
    })
}

fn pad_rows(a: &Mat<f64>, rows: usize) -> Mat<f64> {
    Mat::from_fn(rows, a.ncols(), |i, j| if i < a.nrows() { a[(i, j)] } else { 0.0 })
}

/// Vanishing ideal slice `I(T)_{<=d}` by full SVD of the evaluation matrix.
pub fn vanishing_space(points: &[Vec<f64>], d: u32, opts: &InterpOptions) -> Result<VanishingBasis, InterpError> {
    let n = check_points(points)?;
    let center = opts.center.then(|| centroid(points));
    let em = build_eval(points, d, opts.scaling, center.clone())?;
    let (nulls, hilbert, s) = null_dims(&em, n, d, opts.tol)?;
    let full = em.ncols();

    let mut q: Mat<f64> = Mat::zeros(full, 0);
    let mut degrees = Vec::new();
    for (c, ns) in nulls.iter().enumerate() {
        let add = ns.ncols().saturating_sub(q.ncols());
        if add == 0 {
            continue;
        }
        let fresh = complement(&q, &pad_rows(ns, full), add)?;
        degrees.extend(std::iter::repeat(c as u32).take(fresh.ncols()));
        q = hcat(&q, &fresh);
    }

    let mut generators: Vec<Polynomial> = (0..q.ncols())
        .map(|j| {
            let coeffs: Vec<f64> = (0..full).map(|i| q[(i, j)]).collect();
            Polynomial::from_coefficients(n, &em.basis, &coeffs)
        })
        .collect();
    if let Some(c) = &center {
        generators = uncenter(&generators, c, &em.basis, &degrees)?;
    }

    Ok(VanishingBasis {
        nvars: n,
        degree: d,
        basis: em.basis,
        generators,
        generator_degrees: degrees,
        hilbert,
        singular_values: s,
        regularity: None,
    })
}

/// Maps generators in centered coordinates back to `x`, then restores
/// orthonormality degree block by degree block.
fn uncenter(
    gens: &[Polynomial],
    center: &[f64],
    basis: &[Monomial],
    degrees: &[u32],
) -> Result<Vec<Polynomial>, InterpError> {
    let n = center.len();
    let shifted: Vec<Vec<f64>> = gens
        .iter()
        .map(|g| {
            g.shifted(center)
                .map(|p| p.coefficients_in(basis))
                .map_err(|_| InterpError::Dimension {
                    index: usize::MAX,
                    expected: n,
                    got: center.len(),
                })
        })
        .collect::<Result<_, _>>()?;
    let dim = basis.len();
    let mut q: Mat<f64> = Mat::zeros(dim, 0);
    let mut start = 0;
    while start < shifted.len() {
        let deg = degrees[start];
        let end = start + degrees[start..].iter().take_while(|&&g| g == deg).count();
        let cand = Mat::from_fn(dim, end - start, |i, j| shifted[start + j][i]);
        let fresh = complement(&q, &cand, end - start)?;
        q = hcat(&q, &fresh);
        start = end;
    }
    Ok((0..q.ncols())
        .map(|j| {
            let coeffs: Vec<f64> = (0..dim).map(|i| q[(i, j)]).collect();
            Polynomial::from_coefficients(n, basis, &coeffs)
        })
        .collect())
}

/// Ranks of the degree-`c` evaluation matrices, `c = 0..=dmax`.
pub fn hilbert_function(points: &[Vec<f64>], dmax: u32, tol: f64) -> Result<Vec<usize>, InterpError> {
    let n = check_points(points)?;
    let em = build_eval(points, dmax, true, None)?;
    Ok(null_dims(&em, n, dmax, tol)?.1)
}

/// Default degree cap for [`regularity_check`].
pub const REGULARITY_DEGREE_CAP: u32 = 12;

/// Index of regularity and whether `I(T)_{<=r}` already generates `I(T)`.
pub fn regularity_check(points: &[Vec<f64>], tol: f64) -> Result<Regularity, InterpError> {
    regularity_check_capped(points, tol, REGULARITY_DEGREE_CAP)
}

pub fn regularity_check_capped(points: &[Vec<f64>], tol: f64, cap: u32) -> Result<Regularity, InterpError> {
    let n = check_points(points)?;
    let npts = distinct_count(points);
    let mut r = None;
    for c in 0..=cap {
        let h = hilbert_function(points, c, tol)?;
        if h[c as usize] >= npts {
            r = Some(c);
            break;
        }
    }
    let r = r.ok_or(InterpError::RegularityNotReached { points: npts, cap })?;
    let opts = InterpOptions {
        tol,
        ..InterpOptions::default()
    };
    let vb = vanishing_space(points, r + 1, &opts)?;
    let below = vb.slice(r);
    let target = vb.generators.len();
    let products = multiples_up_to(below, r + 1, n);
    let got = if products.is_empty() {
        0
    } else {
        let basis = &vb.basis;
        let cols: Vec<Vec<f64>> = products.iter().map(|p| p.coefficients_in(basis)).collect();
        let m = Mat::from_fn(basis.len(), cols.len(), |i, j| cols[j][i]);
        linalg::rank(&m, tol)?
    };
    Ok(Regularity {
        r,
        generated_at_r: got >= target,
    })
}

fn distinct_count(points: &[Vec<f64>]) -> usize {
    let mut kept: Vec<&Vec<f64>> = Vec::new();
    for p in points {
        let dup = kept.iter().any(|q| {
            q.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() < 1e-12
        });
        if !dup {
            kept.push(p);
        }
    }
    kept.len()
}

/// `{m * g : deg(m * g) <= d}` for the given polynomials.
pub fn multiples_up_to(gens: &[Polynomial], d: u32, nvars: usize) -> Vec<Polynomial> {
    let mut out = Vec::new();
    for g in gens {
        let dg = g.degree();
        if dg > d {
            continue;
        }
        for m in monomials_up_to(nvars, d - dg) {
            out.push(&Polynomial::from_terms(nvars, [(m, 1.0)]) * g);
        }
    }
    out
}

/// Which generators of the ideal to certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorSelection {
    /// Per degree, only the part of the slice not already produced by
    /// multiples of lower-degree generators; listed from highest degree down.
    #[default]
    Minimal,
    /// An orthonormal basis of the whole slice `I(T)_{<=d}`.
    FullBasis,
}

/// Generators of degree `<= d` under `sel`. `Minimal` returns highest degree first.
pub fn select_generators(vb: &VanishingBasis, sel: GeneratorSelection, tol: f64) -> Result<Vec<Polynomial>, InterpError> {
    match sel {
        GeneratorSelection::FullBasis => Ok(vb.generators.clone()),
        GeneratorSelection::Minimal => minimal_generators(vb, tol),
    }
}

fn minimal_generators(vb: &VanishingBasis, tol: f64) -> Result<Vec<Polynomial>, InterpError> {
    let n = vb.nvars;
    let dim = vb.basis.len();
    let mut chosen: Vec<Polynomial> = Vec::new();
    for c in 0..=vb.degree {
        let slice = vb.slice(c);
        if slice.is_empty() {
            continue;
        }
        let products = multiples_up_to(&chosen, c, n);
        let span = orthonormal_span(&products, &vb.basis, tol)?;
        let have = span.ncols();
        if have >= slice.len() {
            continue;
        }
        let cand = Mat::from_fn(dim, slice.len(), |i, j| slice[j].coeff(&vb.basis[i]));
        let fresh = complement(&span, &cand, slice.len() - have)?;
        for j in 0..fresh.ncols() {
            let coeffs: Vec<f64> = (0..dim).map(|i| fresh[(i, j)]).collect();
            chosen.push(Polynomial::from_coefficients(n, &vb.basis, &coeffs));
        }
    }
    chosen.sort_by_key(|g| std::cmp::Reverse(g.degree()));
    Ok(chosen)
}

/// Samples from `draw(k)` in batches until the rank of the degree-`d`
/// evaluation matrix is the same after two consecutive batches, capped at
/// `5 * C(n+d, d)` points. `draw(k)` must return `k` fresh points.
pub fn sample_until_stable<F>(
    nvars: usize,
    d: u32,
    tol: f64,
    batch: usize,
    mut draw: F,
) -> Result<Vec<Vec<f64>>, InterpError>
where
    F: FnMut(usize) -> Vec<Vec<f64>>,
{
    let cap = 5 * count_up_to(nvars, d);
    let batch = batch.max(1);
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let mut ranks: Vec<usize> = Vec::new();
    while pts.len() < cap {
        let take = batch.min(cap - pts.len());
        pts.extend(draw(take));
        let em = evaluation_matrix(&pts, d, true)?;
        ranks.push(linalg::rank(&em.to_faer(), tol)?);
        let k = ranks.len();
        if k >= 3 && ranks[k - 1] == ranks[k - 2] && ranks[k - 2] == ranks[k - 3] {
            return Ok(pts);
        }
    }
    Err(InterpError::SampleCap { cap })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spheroloid() -> Vec<Vec<f64>> {
        vec![vec![0.0, 1.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, 1.0]]
    }

    #[test]
    fn basis_counts() {
        assert_eq!(monomial_basis(3, 2).len(), 10);
        assert_eq!(monomial_basis(1, 0).len(), 1);
        assert_eq!(monomial_basis(6, 2).len(), 28);
    }

    #[test]
    fn unscaled_table() {
        let em = evaluation_matrix(&spheroloid(), 2, false).unwrap();
        let want = [
            [1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        ];
        for (row, w) in em.rows.iter().zip(want) {
            assert_eq!(row.as_slice(), w.as_slice());
        }
    }

    #[test]
    fn scaled_rows_restore() {
        let pts = vec![vec![1.5, -2.0], vec![0.3, 0.7]];
        let raw = evaluation_matrix(&pts, 3, false).unwrap();
        let em = evaluation_matrix(&pts, 3, true).unwrap();
        for i in 0..2 {
            assert!((linalg::norm2(&em.rows[i]) - 1.0).abs() < 1e-15);
            for (a, b) in em.raw_row(i).iter().zip(&raw.rows[i]) {
                assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn triangle_has_no_linear_generators() {
        let pts = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let vb = vanishing_space(&pts, 1, &InterpOptions::default()).unwrap();
        assert!(vb.generators.is_empty());
        let reg = regularity_check(&pts, 1e-8).unwrap();
        assert_eq!((reg.r, reg.generated_at_r), (1, false));
        assert_eq!(reg.generation_degree(), 2);
    }

    #[test]
    fn filtration_and_orthonormality() {
        let vb = vanishing_space(&spheroloid(), 2, &InterpOptions::default()).unwrap();
        assert_eq!(vb.generators.len(), 7);
        assert_eq!(vb.hilbert, vec![1, 3, 3]);
        assert_eq!(vb.slice(1).len(), 1);
        let q = vb.coefficient_matrix();
        let g = q.transpose() * &q;
        for i in 0..7 {
            for j in 0..7 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn centering_keeps_the_span() {
        let pts = vec![vec![10.0, 11.0], vec![10.5, 11.0], vec![10.0, 12.0], vec![11.0, 13.0]];
        let plain = vanishing_space(&pts, 2, &InterpOptions::default()).unwrap();
        let centered = vanishing_space(
            &pts,
            2,
            &InterpOptions {
                center: true,
                ..InterpOptions::default()
            },
        )
        .unwrap();
        assert_eq!(plain.generators.len(), centered.generators.len());
        assert!(span_distance(&plain.generators, &centered.generators).unwrap() < 1e-8);
    }

    #[test]
    fn minimal_generators_of_collinear_points() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![-1.0, -1.0]];
        let reg = regularity_check(&pts, 1e-8).unwrap();
        assert_eq!((reg.r, reg.generated_at_r), (2, false));
        let vb = vanishing_space(&pts, 3, &InterpOptions::default()).unwrap();
        let gens = select_generators(&vb, GeneratorSelection::Minimal, 1e-8).unwrap();
        let degs: Vec<u32> = gens.iter().map(Polynomial::degree).collect();
        assert_eq!(degs, vec![3, 1]);
    }

    #[test]
    fn stabilization_stops_early_for_points() {
        let mut k = 0.0;
        let pts = sample_until_stable(2, 2, 1e-8, 2, |m| {
            (0..m)
                .map(|_| {
                    k += 1.0;
                    vec![k, 2.0 * k - 1.0]
                })
                .collect()
        })
        .unwrap();
        assert!(pts.len() < 30);
    }
}
