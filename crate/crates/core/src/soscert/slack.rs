use crate::poly::{Polynomial, PolyError, PolynomialSystem};

/// Appends `r_i(x) - y_i^2` in fresh slack variables `y_i`, placed after the
/// original variables. The slacks are named `s1, s2, ...` unless taken.
pub fn slack_augment(f: &PolynomialSystem, r: &[Polynomial]) -> Result<PolynomialSystem, PolyError> {
    let n = f.nvars();
    let s = r.len();
    if let Some(bad) = r.iter().find(|p| p.nvars() != n) {
        return Err(PolyError::ArityMismatch {
            left: n,
            right: bad.nvars(),
        });
    }
    let total = n + s;
    let mut names = f.names().to_vec();
    for i in 1..=s {
        let mut name = format!("s{i}");
        while names.contains(&name) {
            name.push('_');
        }
        names.push(name);
    }
    let mut polys: Vec<Polynomial> = f.polys().iter().map(|p| p.extend_vars(total)).collect();
    for (i, ri) in r.iter().enumerate() {
        let y = Polynomial::var(total, n + i);
        polys.push(&ri.extend_vars(total) - &(&y * &y));
    }
    PolynomialSystem::new(names, polys)
}
