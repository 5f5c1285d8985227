use std::fmt::Write as _;

use super::{CertForm, SosCertificate, SosError};
use crate::poly::{format_coefficient, format_polynomial, parse_header, parse_polynomial, Monomial, Polynomial};
use crate::sdp::SymMat;

fn monomial_text(m: &Monomial, names: &[String]) -> String {
    format_polynomial(&Polynomial::from_terms(m.nvars(), [(m.clone(), 1.0)]), names)
}

/// Text form of a certificate. Polynomials use the system grammar; the Gram
/// matrix is written as its upper triangle, one `gram` line per row.
pub fn write_certificate(c: &SosCertificate, names: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "vars {}", names.join(" "));
    let _ = writeln!(out, "p: {}", format_polynomial(&c.p, names));
    let _ = writeln!(out, "scale: {}", format_coefficient(c.p_scale));
    let _ = writeln!(out, "alpha: {}", c.alpha);
    let _ = writeln!(
        out,
        "form: {}",
        match c.form {
            CertForm::SosPart => "sos-part",
            CertForm::Full => "full",
        }
    );
    for h in &c.multipliers {
        let _ = writeln!(out, "h: {}", format_polynomial(h, names));
    }
    let basis: Vec<String> = c.gram_basis.iter().map(|m| monomial_text(m, names)).collect();
    let _ = writeln!(out, "basis: {}", basis.join(" "));
    for i in 0..c.gram.n() {
        let row: Vec<String> = (i..c.gram.n()).map(|j| format_coefficient(c.gram.get(i, j))).collect();
        let _ = writeln!(out, "gram: {}", row.join(" "));
    }
    let _ = writeln!(out, "deg_sos: {}", c.deg_sos);
    let _ = writeln!(out, "level: {}", c.level);
    let _ = writeln!(out, "residual_inf: {}", format_coefficient(c.residual_inf));
    let _ = writeln!(out, "min_eig: {}", format_coefficient(c.min_eig));
    out
}

/// Parses [`write_certificate`] output. Returns the certificate and the
/// variable names from its header.
pub fn read_certificate(text: &str) -> Result<(SosCertificate, Vec<String>), SosError> {
    let mut names: Option<Vec<String>> = None;
    let mut p = None;
    let mut scale = 1.0;
    let mut alpha = None;
    let mut form = CertForm::SosPart;
    let mut multipliers = Vec::new();
    let mut basis: Option<Vec<Monomial>> = None;
    let mut upper: Vec<f64> = Vec::new();
    let mut grows = 0usize;
    let mut deg_sos = 0;
    let mut level = 0;
    let mut residual_inf = f64::NAN;
    let mut min_eig = f64::NAN;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let err = |msg: String| SosError::File { line, msg };
        let Some(vars) = &names else {
            names = Some(parse_header(body, "vars", line).map_err(|e| err(e.to_string()))?);
            continue;
        };
        let (key, value) = body
            .split_once(':')
            .ok_or_else(|| err("expected `key: value`".into()))?;
        let value = value.trim();
        let colon = body.find(':').unwrap_or(0) + 2;
        let poly = |v: &str| {
            parse_polynomial(v, vars).map_err(|e| {
                err(format!("column {}: {}", e.column + colon, e.kind))
            })
        };
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| err(format!("bad number `{v}`")))
        };
        let int = |v: &str| v.parse::<u32>().map_err(|_| err(format!("bad integer `{v}`")));
        match key.trim() {
            "p" => p = Some(poly(value)?),
            "scale" => scale = num(value)?,
            "alpha" => alpha = Some(int(value)?),
            "form" => {
                form = match value {
                    "sos-part" => CertForm::SosPart,
                    "full" => CertForm::Full,
                    other => return Err(err(format!("unknown form `{other}`"))),
                }
            }
            "h" => multipliers.push(poly(value)?),
            "basis" => {
                let mut ms = Vec::new();
                for w in value.split_whitespace() {
                    let q = poly(w)?;
                    let mono = match (q.num_terms(), q.leading_term()) {
                        (1, Some((m, c))) if c == 1.0 => Some(m.clone()),
                        _ => None,
                    };
                    ms.push(mono.ok_or_else(|| err(format!("`{w}` is not a monomial")))?);
                }
                basis = Some(ms);
            }
            "gram" => {
                let row: Vec<f64> = value.split_whitespace().map(num).collect::<Result<_, _>>()?;
                let n = basis.as_ref().map(Vec::len).ok_or_else(|| err("`gram` before `basis`".into()))?;
                if row.len() != n - grows.min(n) || grows >= n {
                    return Err(err(format!(
                        "gram row {} should have {} entries",
                        grows + 1,
                        n.saturating_sub(grows)
                    )));
                }
                upper.extend(row);
                grows += 1;
            }
            "deg_sos" => deg_sos = int(value)?,
            "level" => level = int(value)?,
            "residual_inf" => residual_inf = num(value)?,
            "min_eig" => min_eig = num(value)?,
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    let missing = |what: &str| SosError::File {
        line: 0,
        msg: format!("missing `{what}`"),
    };
    let names = names.ok_or_else(|| missing("vars"))?;
    let gram_basis = basis.ok_or_else(|| missing("basis"))?;
    if grows != gram_basis.len() {
        return Err(SosError::File {
            line: 0,
            msg: format!("expected {} gram rows, found {grows}", gram_basis.len()),
        });
    }
    let gram = SymMat::from_upper(gram_basis.len(), &upper)?;
    let cert = SosCertificate {
        p: p.ok_or_else(|| missing("p"))?,
        p_scale: scale,
        alpha: alpha.ok_or_else(|| missing("alpha"))?,
        multipliers,
        gram_basis,
        gram,
        form,
        residual_inf,
        min_eig,
        deg_sos,
        level,
    };
    Ok((cert, names))
}
