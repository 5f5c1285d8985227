//! End-to-end validation: candidates, interpolation, per-generator
//! certification and a reproducible report.

mod report;

pub use report::{
    fingerprint, CandidateSummary, GeneratorOutcome, GeneratorReport, InterpolationSummary, Timings,
    ToleranceReport, ValidationReport,
};

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::candidates::{
    newton_refine, random_real_search, sample_component, ComponentError, ComponentParam, NewtonOptions, PointSet,
    SearchOptions,
};
use crate::interpolate::{
    hilbert_function, regularity_check, select_generators, vanishing_space, GeneratorSelection, InterpError,
    InterpOptions, Regularity, VanishingBasis,
};
use crate::poly::{format_polynomial, PolyError, Polynomial, PolynomialSystem};
use crate::sdp::SolveOptions;
use crate::soscert::{certify, slack_augment, CertTolerances, CertifyOutcome, MembershipQuery, SosCertificate, SosError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("candidates: {0}")]
    Candidates(String),
    #[error("interpolation: {0}")]
    Interpolation(#[from] InterpError),
    #[error("certification: {0}")]
    Certification(#[from] SosError),
    #[error("input: {0}")]
    Input(String),
    #[error("point {index} has residual {residual:e} above the admission tolerance")]
    OffVariety { index: usize, residual: f64 },
    #[error("point {index} violates inequality {which}: value {value:e}")]
    OutsideSet { index: usize, which: usize, value: f64 },
    #[error("positive-dimensional candidates need an explicit interpolation degree")]
    DegreeRequired,
    #[error("worker pool: {0}")]
    Pool(String),
}

impl From<PolyError> for PipelineError {
    fn from(e: PolyError) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<ComponentError> for PipelineError {
    fn from(e: ComponentError) -> Self {
        Self::Candidates(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegreeChoice {
    /// Generation degree from the regularity check.
    #[default]
    Auto,
    Fixed(u32),
}

/// How the candidate set is produced.
#[derive(Debug, Clone, Default)]
pub struct CandidateSpec {
    pub points: Option<PointSet>,
    pub components: Vec<ComponentParam>,
    /// Draws per component.
    pub samples: usize,
    /// Random Newton starts; zero disables the search.
    pub seeds: usize,
    pub bbox: Vec<(f64, f64)>,
}

impl CandidateSpec {
    pub fn from_points(points: PointSet) -> Self {
        Self {
            points: Some(points),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub alpha_max: u32,
    pub degree: DegreeChoice,
    pub selection: GeneratorSelection,
    pub interp: InterpOptions,
    pub cert: CertTolerances,
    pub levels: Vec<u32>,
    pub solve: SolveOptions,
    pub search: SearchOptions,
    pub seed: u64,
    /// Worker threads for certification; `None` uses every core.
    pub jobs: Option<usize>,
    /// Restrict each Gram matrix to the face cut out by the sample points.
    pub use_points_in_solver: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            alpha_max: 3,
            degree: DegreeChoice::Auto,
            selection: GeneratorSelection::Minimal,
            interp: InterpOptions::default(),
            cert: CertTolerances::default(),
            levels: vec![0, 1, 2],
            solve: SolveOptions::default(),
            search: SearchOptions::default(),
            seed: DEFAULT_SEED,
            jobs: None,
            use_points_in_solver: true,
        }
    }
}

pub const DEFAULT_SEED: u64 = 42;

/// Everything a run produces; `report` is the serializable part.
#[derive(Debug, Clone)]
pub struct Validation {
    pub report: ValidationReport,
    pub points: PointSet,
    pub basis: Option<VanishingBasis>,
    pub generators: Vec<Polynomial>,
    /// Certificate per generator, in generator order.
    pub certificates: Vec<Option<SosCertificate>>,
    /// Variable names of the system the certificates refer to.
    pub cert_names: Vec<String>,
    pub cert_system: PolynomialSystem,
    pub timings: Timings,
}

/// Candidate generation: given points are checked (and polished by Newton
/// when above the admission tolerance), components are sampled and the random
/// search adds what it finds. Duplicates are dropped in that order.
pub fn gather_candidates(f: &PolynomialSystem, spec: &CandidateSpec, opts: &ValidateOptions) -> Result<PointSet, PipelineError> {
    let n = f.nvars();
    let tol = opts.search.admission_tol;
    let mut out = PointSet::new(n);
    if let Some(given) = &spec.points {
        if given.nvars != n {
            return Err(PipelineError::Input(format!(
                "points have {} coordinates, system has {n} variables",
                given.nvars
            )));
        }
        for (index, rec) in given.points.iter().enumerate() {
            let mut rec = rec.clone();
            rec.residual = f.residual(&rec.coords)?;
            if rec.residual > tol {
                let polished = newton_refine(f, &rec.coords, &NewtonOptions::default())
                    .ok()
                    .filter(|p| p.residual <= tol);
                match polished {
                    Some(p) => {
                        rec.coords = p.x;
                        rec.residual = p.residual;
                    }
                    None => {
                        return Err(PipelineError::OffVariety {
                            index,
                            residual: rec.residual,
                        })
                    }
                }
            }
            out.push_unique(rec, opts.search.dedupe_tol);
        }
    }
    for (k, c) in spec.components.iter().enumerate() {
        let s = sample_component(c, spec.samples, opts.seed.wrapping_add(k as u64 + 1), Some(f), tol)?;
        out.merge(s, opts.search.dedupe_tol);
    }
    if spec.seeds > 0 {
        if spec.bbox.len() != n {
            return Err(PipelineError::Input(format!(
                "search box has {} intervals for {n} variables",
                spec.bbox.len()
            )));
        }
        let found = random_real_search(f, spec.seeds, &spec.bbox, opts.seed, &opts.search);
        out.merge(found, opts.search.dedupe_tol);
    }
    Ok(out)
}

struct Interpolated {
    basis: VanishingBasis,
    generators: Vec<Polynomial>,
    hilbert: Vec<usize>,
    regularity: Option<Regularity>,
}

fn interpolate(points: &[Vec<f64>], finite: bool, opts: &ValidateOptions) -> Result<Interpolated, PipelineError> {
    let regularity = if finite {
        Some(regularity_check(points, opts.interp.tol)?)
    } else {
        None
    };
    let d = match (opts.degree, regularity) {
        (DegreeChoice::Fixed(d), _) => d,
        (DegreeChoice::Auto, Some(r)) => r.generation_degree(),
        (DegreeChoice::Auto, None) => return Err(PipelineError::DegreeRequired),
    };
    let mut basis = vanishing_space(points, d, &opts.interp)?;
    basis.regularity = regularity;
    let generators = select_generators(&basis, opts.selection, opts.interp.tol)?;
    let hilbert = hilbert_function(points, d + 1, opts.interp.tol)?;
    Ok(Interpolated {
        basis,
        generators,
        hilbert,
        regularity,
    })
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))
}

/// Certifies every generator against `system`, in parallel, results in
/// generator order. `zeros` are the sample points in the variables of `system`.
fn certify_all(
    generators: &[Polynomial],
    system: &PolynomialSystem,
    zeros: &[Vec<f64>],
    opts: &ValidateOptions,
) -> Result<(Vec<CertifyOutcome>, Vec<f64>), PipelineError> {
    let run = |g: &Polynomial| -> Result<(CertifyOutcome, f64), SosError> {
        let t = Instant::now();
        let mut q = MembershipQuery::new(g.clone(), system.clone());
        q.alpha_max = opts.alpha_max;
        q.levels = opts.levels.clone();
        q.tol = opts.cert;
        q.solve = opts.solve.clone();
        if opts.use_points_in_solver {
            q.known_zeros = zeros.to_vec();
        }
        let out = certify(&q)?;
        Ok((out, t.elapsed().as_secs_f64()))
    };
    let results: Vec<Result<(CertifyOutcome, f64), SosError>> =
        pool(opts.jobs)?.install(|| generators.par_iter().map(run).collect());
    let mut outcomes = Vec::with_capacity(results.len());
    let mut times = Vec::with_capacity(results.len());
    for r in results {
        let (o, t) = r?;
        outcomes.push(o);
        times.push(t);
    }
    Ok((outcomes, times))
}

fn candidate_summary(s: &PointSet) -> CandidateSummary {
    let mut sources = BTreeMap::new();
    for p in &s.points {
        let key = serde_json::to_value(p.source)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        *sources.entry(key).or_insert(0) += 1;
    }
    CandidateSummary {
        count: s.len(),
        max_residual: s.max_residual(),
        sources,
    }
}

fn tolerance_report(opts: &ValidateOptions) -> ToleranceReport {
    ToleranceReport {
        tol_null: opts.interp.tol,
        tol_coeff: opts.cert.tol_coeff,
        tol_eig: opts.cert.tol_eig,
        admission: opts.search.admission_tol,
        dedupe: opts.search.dedupe_tol,
        eps_affine: opts.solve.eps_affine,
        eps_eig: opts.solve.eps_eig,
        max_iter: opts.solve.max_iter,
    }
}

struct Setup<'a> {
    f: &'a PolynomialSystem,
    ineq: &'a [Polynomial],
    alternate: Option<&'a PolynomialSystem>,
}

fn run(setup: Setup<'_>, spec: &CandidateSpec, opts: &ValidateOptions) -> Result<Validation, PipelineError> {
    let Setup { f, ineq, alternate } = setup;
    let total = Instant::now();
    if f.is_empty() {
        return Err(PipelineError::Input("the system has no polynomials".into()));
    }
    if let Some(a) = alternate {
        if a.nvars() != f.nvars() {
            return Err(PipelineError::Input(format!(
                "alternate generators use {} variables, system {}",
                a.nvars(),
                f.nvars()
            )));
        }
    }
    let t = Instant::now();
    let points = gather_candidates(f, spec, opts)?;
    for (index, p) in points.points.iter().enumerate() {
        for (which, r) in ineq.iter().enumerate() {
            let value = r.evaluate(&p.coords)?;
            if value < -opts.search.admission_tol {
                return Err(PipelineError::OutsideSet { index, which, value });
            }
        }
    }
    let t_candidates = t.elapsed().as_secs_f64();
    let base = alternate.unwrap_or(f);
    let cert_system = if ineq.is_empty() {
        base.clone()
    } else {
        slack_augment(base, ineq)?
    };
    let mut report = ValidationReport {
        command: Vec::new(),
        fingerprint: fingerprint(f, ineq),
        system: f.polys().iter().map(|p| format_polynomial(p, f.names())).collect(),
        variables: f.names().to_vec(),
        inequalities: ineq.iter().map(|p| format_polynomial(p, f.names())).collect(),
        alternate_generators: alternate.map(|a| a.polys().iter().map(|p| format_polynomial(p, a.names())).collect()),
        seed: opts.seed,
        alpha_max: opts.alpha_max,
        degree: match opts.degree {
            DegreeChoice::Auto => "auto".into(),
            DegreeChoice::Fixed(d) => d.to_string(),
        },
        selection: opts.selection,
        levels: opts.levels.clone(),
        tolerances: tolerance_report(opts),
        candidates: candidate_summary(&points),
        interpolation: None,
        generators: Vec::new(),
        verdict: false,
        reason: None,
        failing: Vec::new(),
    };
    let mut timings = Timings {
        candidates: t_candidates,
        ..Timings::default()
    };
    if points.is_empty() {
        report.reason = Some("no candidates".into());
        timings.total = total.elapsed().as_secs_f64();
        return Ok(Validation {
            report,
            points,
            basis: None,
            generators: Vec::new(),
            certificates: Vec::new(),
            cert_names: cert_system.names().to_vec(),
            cert_system,
            timings,
        });
    }

    let t = Instant::now();
    let coords = points.coords();
    let finite = spec.components.is_empty();
    let interp = interpolate(&coords, finite, opts)?;
    timings.interpolation = t.elapsed().as_secs_f64();
    report.interpolation = Some(InterpolationSummary {
        degree: interp.basis.degree,
        hilbert: interp.hilbert.clone(),
        regularity: interp.regularity,
        slice_dimension: interp.basis.generators.len(),
        generator_count: interp.generators.len(),
    });

    let total_vars = cert_system.nvars();
    let generators: Vec<Polynomial> = interp.generators.iter().map(|g| g.extend_vars(total_vars)).collect();
    let zeros = lift_points(&coords, ineq)?;
    let t = Instant::now();
    let (outcomes, times) = certify_all(&generators, &cert_system, &zeros, opts)?;
    timings.certification = t.elapsed().as_secs_f64();
    timings.per_generator = times;

    let names = cert_system.names().to_vec();
    let mut certificates = Vec::with_capacity(outcomes.len());
    for (index, (g, o)) in interp.generators.iter().zip(outcomes).enumerate() {
        let outcome = match o.certificate() {
            Some(c) => GeneratorOutcome::Certified {
                alpha: c.alpha,
                deg_sos: c.deg_sos,
                residual_inf: c.residual_inf,
                min_eig: c.min_eig,
                file: cert_file_name(index),
            },
            None => GeneratorOutcome::NotFound,
        };
        if matches!(outcome, GeneratorOutcome::NotFound) {
            report.failing.push(index);
        }
        report.generators.push(GeneratorReport {
            index,
            polynomial: format_polynomial(g, f.names()),
            degree: g.degree(),
            outcome,
            trace: o.trace().to_vec(),
        });
        certificates.push(o.certificate().cloned());
    }
    report.verdict = report.failing.is_empty();
    if !report.verdict {
        report.reason = Some(format!(
            "no certificate with alpha <= {} for generators {:?}; add real solutions or raise alpha_max",
            opts.alpha_max, report.failing
        ));
    }
    timings.total = total.elapsed().as_secs_f64();
    Ok(Validation {
        report,
        points,
        basis: Some(interp.basis),
        generators: interp.generators,
        certificates,
        cert_names: names,
        cert_system,
        timings,
    })
}

/// Points of `V_R(f)`, with every sign choice of the slacks `y_i = sqrt(r_i(x))`.
fn lift_points(points: &[Vec<f64>], ineq: &[Polynomial]) -> Result<Vec<Vec<f64>>, PipelineError> {
    const MAX_SIGN_PATTERNS: usize = 6;
    let mut out = Vec::new();
    for x in points {
        let roots: Vec<f64> = ineq
            .iter()
            .map(|r| r.evaluate(x).map(|v| v.max(0.0).sqrt()))
            .collect::<Result<_, _>>()?;
        let free = roots.len().min(MAX_SIGN_PATTERNS);
        for mask in 0..(1usize << free) {
            let mut z = x.clone();
            for (i, &y) in roots.iter().enumerate() {
                let neg = i < free && mask & (1 << i) != 0;
                z.push(if neg { -y } else { y });
            }
            out.push(z);
        }
    }
    Ok(out)
}

pub fn cert_file_name(index: usize) -> String {
    format!("generator-{index:03}.cert")
}

/// Validates that the candidates describe the whole real variety of `f`:
/// `I(S) = sqrt_R <f>` when the verdict is true. `alternate` replaces `f` in
/// the certification step by another generating set of the same radical.
pub fn validate_real_set(
    f: &PolynomialSystem,
    spec: &CandidateSpec,
    alternate: Option<&PolynomialSystem>,
    opts: &ValidateOptions,
) -> Result<Validation, PipelineError> {
    run(Setup { f, ineq: &[], alternate }, spec, opts)
}

/// Validation relative to the set `{r_i >= 0}`: interpolation in `x` only,
/// certification against `f` augmented with `r_i - y_i^2`.
pub fn a_radical_validate(
    f: &PolynomialSystem,
    r: &[Polynomial],
    spec: &CandidateSpec,
    opts: &ValidateOptions,
) -> Result<Validation, PipelineError> {
    if r.is_empty() {
        return Err(PipelineError::Input("no inequalities given".into()));
    }
    if let Some(bad) = r.iter().find(|p| p.nvars() != f.nvars()) {
        return Err(PipelineError::Input(format!(
            "inequality has {} variables, system {}",
            bad.nvars(),
            f.nvars()
        )));
    }
    run(Setup { f, ineq: r, alternate: None }, spec, opts)
}
