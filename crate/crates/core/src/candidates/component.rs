use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{PointRecord, PointSet, PointSource};
use crate::poly::{parse_header, parse_polynomial_at, statements, strip_comment, ParseError, PolyError, Polynomial, PolynomialSystem};

/// A parametrized real set `u -> x(u)`, `u` in a box.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentParam {
    pub params: Vec<String>,
    pub ranges: Vec<(f64, f64)>,
    /// One polynomial in the parameters per ambient coordinate.
    pub coords: Vec<Polynomial>,
    pub tag: Option<String>,
}

impl ComponentParam {
    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn nvars(&self) -> usize {
        self.coords.len()
    }

    pub fn point(&self, u: &[f64]) -> Result<Vec<f64>, PolyError> {
        self.coords.iter().map(|p| p.evaluate(u)).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComponentError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("component has {got} coordinates, system has {expected} variables")]
    Arity { expected: usize, got: usize },
    #[error("{} sampled points violate the admission tolerance (first: sample {} with residual {:e})", .0.len(), .0[0].0, .0[0].1)]
    Violations(Vec<(usize, f64)>),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

struct Block {
    params: Vec<String>,
    ranges: Vec<(f64, f64)>,
    coords: Vec<Polynomial>,
    tag: Option<String>,
    line: usize,
}

impl Block {
    fn finish(self) -> Result<ComponentParam, ComponentError> {
        if self.ranges.len() != self.params.len() {
            return Err(ComponentError::Format {
                line: self.line,
                msg: format!("{} parameters but {} range lines", self.params.len(), self.ranges.len()),
            });
        }
        if self.coords.is_empty() {
            return Err(ComponentError::Format {
                line: self.line,
                msg: "component has no coordinate polynomials".into(),
            });
        }
        Ok(ComponentParam {
            params: self.params,
            ranges: self.ranges,
            coords: self.coords,
            tag: self.tag,
        })
    }
}

/// Component file: blocks starting with `params <name>+`, then one
/// `range lo hi` line per parameter, an optional `tag <name>` line, and the
/// coordinate polynomials in system-file syntax.
pub fn parse_components(text: &str) -> Result<Vec<ComponentParam>, ComponentError> {
    let mut out = Vec::new();
    let mut cur: Option<Block> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw);
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let first = trimmed.split_whitespace().next().unwrap_or("");
        match first {
            "params" => {
                if let Some(b) = cur.take() {
                    out.push(b.finish()?);
                }
                cur = Some(Block {
                    params: parse_header(body, "params", line)?,
                    ranges: Vec::new(),
                    coords: Vec::new(),
                    tag: None,
                    line,
                });
            }
            "range" | "tag" => {
                let b = cur.as_mut().ok_or_else(|| ComponentError::Format {
                    line,
                    msg: "expected a `params` line first".into(),
                })?;
                let rest: Vec<&str> = trimmed.split_whitespace().skip(1).collect();
                if first == "tag" {
                    if rest.len() != 1 {
                        return Err(ComponentError::Format {
                            line,
                            msg: "`tag` takes one name".into(),
                        });
                    }
                    b.tag = Some(rest[0].to_string());
                } else {
                    let vals: Vec<f64> = rest.iter().filter_map(|w| w.parse().ok()).collect();
                    if vals.len() != 2 || rest.len() != 2 || !(vals[0] <= vals[1]) || !vals.iter().all(|v| v.is_finite()) {
                        return Err(ComponentError::Format {
                            line,
                            msg: "`range` needs two finite numbers lo <= hi".into(),
                        });
                    }
                    b.ranges.push((vals[0], vals[1]));
                }
            }
            _ => {
                let b = cur.as_mut().ok_or_else(|| ComponentError::Format {
                    line,
                    msg: "expected a `params` line first".into(),
                })?;
                for (col, stmt) in statements(body) {
                    b.coords.push(parse_polynomial_at(stmt, &b.params, line, col)?);
                }
            }
        }
    }
    if let Some(b) = cur {
        out.push(b.finish()?);
    }
    Ok(out)
}

/// `m` uniform parameter draws (ChaCha8 seeded with `seed`) mapped through
/// the parametrization. With `f`, each image must satisfy `max |f_i| <= admission_tol`.
pub fn sample_component(
    c: &ComponentParam,
    m: usize,
    seed: u64,
    f: Option<&PolynomialSystem>,
    admission_tol: f64,
) -> Result<PointSet, ComponentError> {
    if let Some(f) = f {
        if f.nvars() != c.nvars() {
            return Err(ComponentError::Arity {
                expected: f.nvars(),
                got: c.nvars(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = PointSet::new(c.nvars());
    let mut bad = Vec::new();
    for k in 0..m {
        let u: Vec<f64> = c.ranges.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect();
        let x = c.point(&u)?;
        let residual = match f {
            Some(f) => f.residual(&x)?,
            None => 0.0,
        };
        if residual > admission_tol {
            bad.push((k, residual));
        }
        let mut rec = PointRecord::new(x, residual, PointSource::ComponentSample);
        rec.component = c.tag.clone();
        rec.start = Some(k);
        out.points.push(rec);
    }
    if !bad.is_empty() {
        return Err(ComponentError::Violations(bad));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_system;

    const LINE: &str = "# the real line of the system\nparams u\nrange -2 2\ntag line\nu; 0; 0\n";

    #[test]
    fn line_samples() {
        let comps = parse_components(LINE).unwrap();
        assert_eq!(comps.len(), 1);
        let f = parse_system("vars x y z\nx*y*z\nz*(x^2 + y^2 + z^2 + y)\ny*(y + z)").unwrap();
        let p = sample_component(&comps[0], 3, 1, Some(&f), 1e-8).unwrap();
        assert_eq!(p.len(), 3);
        for rec in &p.points {
            assert_eq!(rec.residual, 0.0);
            assert_eq!(&rec.coords[1..], &[0.0, 0.0]);
            assert_eq!(rec.component.as_deref(), Some("line"));
        }
    }

    #[test]
    fn violations_are_listed() {
        let comps = parse_components("params u\nrange 1 2\nu; 1; 0\n").unwrap();
        let f = parse_system("vars x y z\ny*(y + z)").unwrap();
        match sample_component(&comps[0], 4, 1, Some(&f), 1e-8) {
            Err(ComponentError::Violations(v)) => assert_eq!(v.len(), 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn range_count_must_match() {
        assert!(parse_components("params u v\nrange 0 1\nu; v\n").is_err());
    }
}
