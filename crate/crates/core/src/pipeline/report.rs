use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{cert_file_name, Validation};
use crate::candidates::format_points;
use crate::interpolate::{format_basis_report, GeneratorSelection, Regularity};
use crate::poly::{format_polynomial, format_system, Polynomial, PolynomialSystem};
use crate::soscert::{write_certificate, Attempt};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToleranceReport {
    pub tol_null: f64,
    pub tol_coeff: f64,
    pub tol_eig: f64,
    pub admission: f64,
    pub dedupe: f64,
    pub eps_affine: f64,
    pub eps_eig: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSummary {
    pub count: usize,
    pub max_residual: f64,
    pub sources: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpolationSummary {
    pub degree: u32,
    pub hilbert: Vec<usize>,
    pub regularity: Option<Regularity>,
    /// `dim I(S)_{<=degree}`.
    pub slice_dimension: usize,
    pub generator_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum GeneratorOutcome {
    Certified {
        alpha: u32,
        deg_sos: u32,
        residual_inf: f64,
        min_eig: f64,
        file: String,
    },
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorReport {
    pub index: usize,
    pub polynomial: String,
    pub degree: u32,
    pub outcome: GeneratorOutcome,
    pub trace: Vec<Attempt>,
}

/// Serializable result of a run. Contains no timings, so two runs with the
/// same inputs and seed give identical text.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Arguments that reproduce the run, when it came from the command line.
    pub command: Vec<String>,
    pub fingerprint: String,
    pub variables: Vec<String>,
    pub system: Vec<String>,
    pub inequalities: Vec<String>,
    pub alternate_generators: Option<Vec<String>>,
    pub seed: u64,
    pub alpha_max: u32,
    pub degree: String,
    pub selection: GeneratorSelection,
    pub levels: Vec<u32>,
    pub tolerances: ToleranceReport,
    pub candidates: CandidateSummary,
    pub interpolation: Option<InterpolationSummary>,
    pub generators: Vec<GeneratorReport>,
    pub verdict: bool,
    pub reason: Option<String>,
    /// Indices of generators without a certificate.
    pub failing: Vec<usize>,
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The `alpha` of each certified generator, `None` where none was found.
    pub fn alpha_trace(&self) -> Vec<Option<u32>> {
        self.generators
            .iter()
            .map(|g| match g.outcome {
                GeneratorOutcome::Certified { alpha, .. } => Some(alpha),
                GeneratorOutcome::NotFound => None,
            })
            .collect()
    }

    /// Short human-readable summary.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "system {} ({} polynomials)", &self.fingerprint[..16], self.system.len());
        let _ = writeln!(
            out,
            "candidates {} (max residual {:.3e})",
            self.candidates.count, self.candidates.max_residual
        );
        if let Some(i) = &self.interpolation {
            let reg = match i.regularity {
                Some(r) => format!("r={} generated_at_r={}", r.r, r.generated_at_r),
                None => "not applicable".into(),
            };
            let _ = writeln!(
                out,
                "interpolation degree {} hilbert {:?} regularity {} generators {}",
                i.degree, i.hilbert, reg, i.generator_count
            );
        }
        for g in &self.generators {
            match &g.outcome {
                GeneratorOutcome::Certified { alpha, residual_inf, min_eig, .. } => {
                    let _ = writeln!(
                        out,
                        "  [{}] certified alpha={} residual={:.2e} min_eig={:.2e}  {}",
                        g.index, alpha, residual_inf, min_eig, g.polynomial
                    );
                }
                GeneratorOutcome::NotFound => {
                    let _ = writeln!(out, "  [{}] not found  {}", g.index, g.polynomial);
                }
            }
        }
        let _ = writeln!(out, "verdict {}", if self.verdict { "true" } else { "false" });
        if let Some(r) = &self.reason {
            let _ = writeln!(out, "reason: {r}");
        }
        out
    }
}

/// Wall-clock seconds per stage; written beside the report, never inside it.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub candidates: f64,
    pub interpolation: f64,
    pub certification: f64,
    pub per_generator: Vec<f64>,
    pub total: f64,
}

/// SHA-256 of the canonical text of the system and inequalities.
pub fn fingerprint(f: &PolynomialSystem, ineq: &[Polynomial]) -> String {
    let mut text = format_system(f);
    for r in ineq {
        text.push_str("ineq ");
        text.push_str(&format_polynomial(r, f.names()));
        text.push('\n');
    }
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl Validation {
    /// Default run directory: `runs/<first 16 hex digits of the fingerprint>-<seed>`.
    pub fn default_dir(&self) -> PathBuf {
        PathBuf::from("runs").join(format!("{}-{}", &self.report.fingerprint[..16], self.report.seed))
    }

    /// Writes the report, timings, points, interpolation basis and one file
    /// per certificate into `dir`.
    pub fn write_run(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.report.to_json())?;
        let mut t = serde_json::to_string_pretty(&self.timings).expect("timings serialize");
        t.push('\n');
        fs::write(dir.join("timings.json"), t)?;
        fs::write(dir.join("points.pts"), format_points(&self.points))?;
        fs::write(dir.join("system.sys"), format_system(&self.cert_system))?;
        if let Some(b) = &self.basis {
            fs::write(
                dir.join("basis.txt"),
                format_basis_report(b, &self.generators, &self.report.variables),
            )?;
        }
        for (i, c) in self.certificates.iter().enumerate() {
            if let Some(c) = c {
                fs::write(dir.join(cert_file_name(i)), write_certificate(c, &self.cert_names))?;
            }
        }
        Ok(())
    }
}
