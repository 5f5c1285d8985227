use std::fmt::Write as _;

use super::VanishingBasis;
use crate::poly::{format_polynomial, Polynomial};

/// Copy of `p` scaled so its largest coefficient is 1, with coefficients
/// within `tol` of a multiple of 1/2 snapped to it. Display only.
pub fn rounded_for_display(p: &Polynomial, tol: f64) -> Polynomial {
    let lead = p
        .terms()
        .map(|(_, c)| c)
        .fold(0.0f64, |acc, c| if c.abs() > acc.abs() { c } else { acc });
    if lead == 0.0 {
        return p.clone();
    }
    Polynomial::from_terms(
        p.nvars(),
        p.terms().map(|(m, c)| {
            let v = c / lead;
            let h = (2.0 * v).round() / 2.0;
            (m.clone(), if (v - h).abs() <= tol { h } else { v })
        }),
    )
}

/// Plain-text summary of an interpolation run. Generators are written in
/// system-file syntax after a `vars` header.
pub fn format_basis_report(vb: &VanishingBasis, selected: &[Polynomial], names: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "degree {}", vb.degree);
    let hs: Vec<String> = vb.hilbert.iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "hilbert {}", hs.join(" "));
    match vb.regularity {
        Some(r) => {
            let _ = writeln!(out, "regularity r={} generated_at_r={}", r.r, r.generated_at_r);
        }
        None => out.push_str("regularity unknown\n"),
    }
    let _ = writeln!(out, "slice_dimension {}", vb.generators.len());
    let _ = writeln!(out, "generators {}", selected.len());
    let _ = writeln!(out, "vars {}", names.join(" "));
    for g in selected {
        out.push_str(&format_polynomial(g, names));
        out.push('\n');
    }
    out
}
