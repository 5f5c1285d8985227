use std::fmt::Write as _;

use thiserror::Error;

use super::{PointRecord, PointSet, PointSource};
use crate::poly::{format_coefficient, strip_comment};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PointsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: expected {expected} coordinates, got {got}")]
    Arity { line: usize, expected: usize, got: usize },
    #[error("no points")]
    Empty,
}

/// Points file: one point per line, whitespace-separated decimals, `#`
/// comments, optional trailing `| component=<tag>`.
pub fn parse_points(text: &str) -> Result<PointSet, PointsError> {
    let mut set: Option<PointSet> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw);
        if body.trim().is_empty() {
            continue;
        }
        let (coords_txt, note) = match body.split_once('|') {
            Some((a, b)) => (a, Some(b.trim())),
            None => (body, None),
        };
        let coords: Vec<f64> = coords_txt
            .split_whitespace()
            .map(|w| {
                w.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| PointsError::Syntax {
                        line,
                        msg: format!("`{w}` is not a finite number"),
                    })
            })
            .collect::<Result<_, _>>()?;
        if coords.is_empty() {
            return Err(PointsError::Syntax {
                line,
                msg: "no coordinates".into(),
            });
        }
        let component = match note {
            None => None,
            Some(n) => match n.strip_prefix("component=") {
                Some(tag) if !tag.trim().is_empty() => Some(tag.trim().to_string()),
                _ => {
                    return Err(PointsError::Syntax {
                        line,
                        msg: format!("expected `component=<tag>`, found `{n}`"),
                    })
                }
            },
        };
        let s = set.get_or_insert_with(|| PointSet::new(coords.len()));
        if coords.len() != s.nvars {
            return Err(PointsError::Arity {
                line,
                expected: s.nvars,
                got: coords.len(),
            });
        }
        let mut rec = PointRecord::new(coords, f64::NAN, PointSource::User);
        rec.component = component;
        s.points.push(rec);
    }
    set.ok_or(PointsError::Empty)
}

pub fn format_points(p: &PointSet) -> String {
    let mut out = String::new();
    for rec in &p.points {
        let cs: Vec<String> = rec.coords.iter().map(|&c| format_coefficient(c)).collect();
        out.push_str(&cs.join(" "));
        if let Some(tag) = &rec.component {
            let _ = write!(out, " | component={tag}");
        }
        out.push('\n');
    }
    out
}
