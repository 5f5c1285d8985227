use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::newton::{newton_with, SystemEval};
use super::{NewtonOptions, PointRecord, PointSet, PointSource, ADMISSION_TOL, DEDUPE_TOL};
use crate::poly::PolynomialSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub newton: NewtonOptions,
    pub admission_tol: f64,
    pub dedupe_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            admission_tol: ADMISSION_TOL,
            dedupe_tol: DEDUPE_TOL,
        }
    }
}

/// Newton refinement from `n_seeds` uniform starts in `bbox` drawn from a
/// ChaCha8 stream seeded with `seed`. Starts are drawn in order and merged in
/// order, so the result does not depend on the thread count.
pub fn random_real_search(
    f: &PolynomialSystem,
    n_seeds: usize,
    bbox: &[(f64, f64)],
    seed: u64,
    opts: &SearchOptions,
) -> PointSet {
    let n = f.nvars();
    assert_eq!(bbox.len(), n, "box must give one interval per variable");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = (0..n_seeds)
        .map(|_| bbox.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect())
        .collect();
    let ev = SystemEval::new(f);
    let refined: Vec<Option<(Vec<f64>, f64)>> = starts
        .par_iter()
        .map(|x0| match newton_with(&ev, x0, &opts.newton) {
            Ok(p) => Some((p.x, p.residual)),
            Err(e) => e.last_iterate().map(|(x, r)| (x.to_vec(), r)),
        })
        .collect();
    let mut out = PointSet::new(n);
    for (k, r) in refined.into_iter().enumerate() {
        if let Some((x, res)) = r {
            if res <= opts.admission_tol && x.iter().all(|v| v.is_finite()) {
                let mut rec = PointRecord::new(x, res, PointSource::Newton);
                rec.start = Some(k);
                out.push_unique(rec, opts.dedupe_tol);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_system;

    #[test]
    fn no_real_solutions_gives_empty_set() {
        let f = parse_system("vars x\nx^2 + 1").unwrap();
        let p = random_real_search(&f, 50, &[(-3.0, 3.0)], 7, &SearchOptions::default());
        assert!(p.is_empty());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let f = parse_system("vars x y\nx^2 + y^2 - 2\n2*x*y^2 - x + 1").unwrap();
        let b = [(-2.0, 2.0), (-2.0, 2.0)];
        let a = random_real_search(&f, 40, &b, 11, &SearchOptions::default());
        let c = random_real_search(&f, 40, &b, 11, &SearchOptions::default());
        assert_eq!(a, c);
    }
}
