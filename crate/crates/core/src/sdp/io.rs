use std::fmt::Write as _;

use super::{Constraint, SdpError, SdpProblem, Var};
use crate::poly::format_coefficient;

/// Text form of a problem:
///
/// ```text
/// block 3
/// free 2
/// rows 5
/// rhs <row> <value>
/// b <row> <i> <j> <coef>
/// f <row> <k> <coef>
/// ```
///
/// `#` starts a comment. Rows are numbered from zero.
pub fn dump_problem(p: &SdpProblem) -> String {
    let mut out = format!("block {}\nfree {}\nrows {}\n", p.m, p.nfree, p.constraints.len());
    for (r, c) in p.constraints.iter().enumerate() {
        let _ = writeln!(out, "rhs {r} {}", format_coefficient(c.rhs));
        for &(v, a) in &c.terms {
            let _ = match v {
                Var::Block(i, j) => writeln!(out, "b {r} {i} {j} {}", format_coefficient(a)),
                Var::Free(k) => writeln!(out, "f {r} {k} {}", format_coefficient(a)),
            };
        }
    }
    out
}

pub fn load_problem(text: &str) -> Result<SdpProblem, SdpError> {
    let mut m = None;
    let mut nfree = None;
    let mut constraints: Vec<Constraint> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let f: Vec<&str> = body.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        let err = |msg: &str| SdpError::Load {
            line,
            msg: msg.to_string(),
        };
        let int = |s: &str| s.parse::<usize>().map_err(|_| err(&format!("bad integer `{s}`")));
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(&format!("bad number `{s}`")))
        };
        let row_of = |s: &str, constraints: &Vec<Constraint>| {
            let r = int(s)?;
            if r >= constraints.len() {
                return Err(err(&format!("row {r} out of range")));
            }
            Ok(r)
        };
        match (f[0], f.len()) {
            ("block", 2) => m = Some(int(f[1])?),
            ("free", 2) => nfree = Some(int(f[1])?),
            ("rows", 2) => {
                constraints = vec![
                    Constraint {
                        terms: Vec::new(),
                        rhs: 0.0
                    };
                    int(f[1])?
                ]
            }
            ("rhs", 3) => {
                let r = row_of(f[1], &constraints)?;
                constraints[r].rhs = num(f[2])?;
            }
            ("b", 5) => {
                let r = row_of(f[1], &constraints)?;
                let v = Var::Block(int(f[2])?, int(f[3])?);
                constraints[r].terms.push((v, num(f[4])?));
            }
            ("f", 4) => {
                let r = row_of(f[1], &constraints)?;
                constraints[r].terms.push((Var::Free(int(f[2])?), num(f[3])?));
            }
            _ => return Err(err(&format!("unrecognized line `{}`", body.trim()))),
        }
    }
    let p = SdpProblem {
        m: m.ok_or(SdpError::Load {
            line: 0,
            msg: "missing `block`".into(),
        })?,
        nfree: nfree.unwrap_or(0),
        constraints,
    };
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let p = SdpProblem {
            m: 2,
            nfree: 1,
            constraints: vec![
                Constraint {
                    terms: vec![(Var::Block(0, 1), 2.0), (Var::Free(0), -0.1)],
                    rhs: 1.0 / 3.0,
                },
                Constraint {
                    terms: vec![(Var::Block(1, 1), 1.0)],
                    rhs: 0.0,
                },
            ],
        };
        assert_eq!(load_problem(&dump_problem(&p)).unwrap(), p);
        assert!(matches!(
            load_problem("block 1\nrows 1\nb 3 0 0 1\n"),
            Err(SdpError::Load { line: 3, .. })
        ));
    }
}
