use super::polynomial::Polynomial;
use super::system::PolynomialSystem;
use super::PolyError;

/// Rectangular grid of polynomials in a common ring.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix {
    nvars: usize,
    rows: usize,
    cols: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    /// Row-major construction; every row must have `cols` entries.
    pub fn from_rows(nvars: usize, rows: Vec<Vec<Polynomial>>) -> Result<Self, PolyError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(PolyError::DimensionMismatch {
                    expected: c,
                    got: row.len(),
                });
            }
            for p in row {
                if p.nvars() != nvars {
                    return Err(PolyError::ArityMismatch {
                        left: nvars,
                        right: p.nvars(),
                    });
                }
                entries.push(p);
            }
        }
        Ok(Self {
            nvars,
            rows: r,
            cols: c,
            entries,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.cols + j]
    }

    pub fn transpose(&self) -> PolyMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        PolyMatrix {
            nvars: self.nvars,
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// Numeric matrix at `x`, row-major.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, PolyError> {
        let mut out = vec![vec![0.0; self.cols]; self.rows];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.get(i, j).evaluate(x)?;
            }
        }
        Ok(out)
    }

    fn sub(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<Polynomial>> {
        rows.iter()
            .map(|&i| cols.iter().map(|&j| self.get(i, j).clone()).collect())
            .collect()
    }
}

/// Jacobian matrix, one row per polynomial.
pub fn jacobian(sys: &PolynomialSystem) -> PolyMatrix {
    let rows = sys.polys().iter().map(Polynomial::gradient).collect();
    PolyMatrix::from_rows(sys.nvars(), rows).expect("gradients share the ring")
}

/// All `(l+1) x (l+1)` minors, row subsets in the outer loop and column
/// subsets in the inner loop, both in lexicographic order.
pub fn minors(m: &PolyMatrix, l: usize) -> Result<Vec<Polynomial>, PolyError> {
    let k = l + 1;
    if k > m.rows.min(m.cols) {
        return Err(PolyError::MinorTooLarge {
            size: k,
            rows: m.rows,
            cols: m.cols,
        });
    }
    let row_sets = subsets(m.rows, k);
    let col_sets = subsets(m.cols, k);
    let mut out = Vec::with_capacity(row_sets.len() * col_sets.len());
    for rs in &row_sets {
        for cs in &col_sets {
            out.push(determinant(m.sub(rs, cs), m.nvars));
        }
    }
    Ok(out)
}

pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn determinant(a: Vec<Vec<Polynomial>>, nvars: usize) -> Polynomial {
    if a.len() <= 4 {
        cofactor(&a, nvars)
    } else {
        bareiss(a.clone(), nvars).unwrap_or_else(|| cofactor(&a, nvars))
    }
}

fn cofactor(a: &[Vec<Polynomial>], nvars: usize) -> Polynomial {
    match a.len() {
        0 => Polynomial::constant(nvars, 1.0),
        1 => a[0][0].clone(),
        2 => &(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0]),
        n => {
            let mut acc = Polynomial::zero(nvars);
            for j in 0..n {
                if a[0][j].is_zero() {
                    continue;
                }
                let sub: Vec<Vec<Polynomial>> = a[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, p)| p.clone())
                            .collect()
                    })
                    .collect();
                let t = &a[0][j] * &cofactor(&sub, nvars);
                acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            acc
        }
    }
}

/// Fraction-free elimination; `None` when an exact division fails numerically.
fn bareiss(mut a: Vec<Vec<Polynomial>>, nvars: usize) -> Option<Polynomial> {
    let n = a.len();
    let mut sign = 1.0;
    let mut prev = Polynomial::constant(nvars, 1.0);
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let swap = (k + 1..n).find(|&i| !a[i][k].is_zero());
            match swap {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return Some(Polynomial::zero(nvars)),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&a[k][k] * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num.div_exact(&prev, 1e-9).ok()?;
            }
        }
        prev = a[k][k].clone();
    }
    Some(a[n - 1][n - 1].scale(sign))
}
