//! Command-line front end. `run` parses arguments, executes one stage and
//! returns the process exit code: 0 success or verdict true, 1 verdict false
//! or no certificate, 2 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use realcert::candidates::{
    build_gdh, deflation_sequence, format_points, parse_components, parse_points, track, ComponentParam,
    DeflationOptions, PointRecord, PointSet, PointSource, TrackOptions, ADMISSION_TOL,
};
use realcert::interpolate::{format_basis_report, GeneratorSelection, InterpOptions};
use realcert::pipeline::{
    a_radical_validate, gather_candidates, validate_real_set, CandidateSpec, DegreeChoice, ValidateOptions,
    Validation, DEFAULT_SEED,
};
use realcert::poly::{parse_polynomial, parse_system, Polynomial, PolynomialSystem};
use realcert::soscert::{
    certify, read_certificate, verify_certificate, write_certificate, CertTolerances, MembershipQuery,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "realcert", version, about = "Validate that a set of real points is the whole real solution set of a polynomial system")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Locate real solutions: random Newton search, component sampling, homotopy starts.
    Find(FindArgs),
    /// Vanishing ideal of a point set up to a degree.
    Interpolate(InterpolateArgs),
    /// Real-radical membership certificates for given polynomials.
    Certify(CertifyArgs),
    /// Full validation of a candidate set.
    Validate(ValidateArgs),
    /// Validation relative to the set where the inequalities hold.
    AValidate(AValidateArgs),
    /// Independent check of a certificate file.
    CheckCert(CheckCertArgs),
}

#[derive(Args, Debug, Clone)]
struct SourceArgs {
    /// Points file, one point per line.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Parametrized components file.
    #[arg(long)]
    components: Option<PathBuf>,
    /// Draws per component.
    #[arg(long, default_value_t = 3)]
    samples: usize,
    /// Random Newton starts (0 disables the search).
    #[arg(long, default_value_t = 0)]
    seeds: usize,
    /// Search box `lo,hi`: once for every variable or once per variable.
    #[arg(long = "box", allow_hyphen_values = true, value_parser = parse_interval)]
    bbox: Vec<(f64, f64)>,
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct CertArgs {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    alpha_max: u32,
    #[arg(long, default_value_t = 1e-6)]
    tol_coeff: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_eig: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Selection {
    Minimal,
    Full,
}

impl From<Selection> for GeneratorSelection {
    fn from(s: Selection) -> Self {
        match s {
            Selection::Minimal => GeneratorSelection::Minimal,
            Selection::Full => GeneratorSelection::FullBasis,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct InterpArgs {
    /// Interpolation degree: an integer or `auto`.
    #[arg(long, default_value = "auto", value_parser = parse_degree)]
    degree: DegreeChoice,
    #[arg(long, default_value_t = 1e-8)]
    tol_null: f64,
    /// Which generators of the vanishing ideal to use.
    #[arg(long, value_enum, default_value_t = Selection::Minimal)]
    generators: Selection,
}

#[derive(Args, Debug)]
struct FindArgs {
    #[arg(long)]
    system: PathBuf,
    #[command(flatten)]
    source: SourceArgs,
    /// Homotopy start point `y1,y2,...` (repeatable).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    start: Vec<Vec<f64>>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct InterpolateArgs {
    /// System file, used for variable names and component checks.
    #[arg(long)]
    system: Option<PathBuf>,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    interp: InterpArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long)]
    system: PathBuf,
    /// Polynomial to certify (repeatable).
    #[arg(long, allow_hyphen_values = true)]
    poly: Vec<String>,
    /// File of polynomials to certify, in system format.
    #[arg(long)]
    polys: Option<PathBuf>,
    /// Known real zeros, passed to the solver.
    #[arg(long)]
    points: Option<PathBuf>,
    #[command(flatten)]
    cert: CertArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long)]
    system: PathBuf,
    #[command(flatten)]
    source: SourceArgs,
    /// Another generating set of the radical, used in place of the system when certifying.
    #[arg(long)]
    alt_generators: Option<PathBuf>,
    #[command(flatten)]
    interp: InterpArgs,
    #[command(flatten)]
    cert: CertArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct AValidateArgs {
    #[command(flatten)]
    base: ValidateArgs,
    /// Inequalities `r_i >= 0`, in system format.
    #[arg(long)]
    ineq: PathBuf,
}

#[derive(Args, Debug)]
struct CheckCertArgs {
    #[arg(long)]
    cert: PathBuf,
    #[arg(long)]
    system: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tol_coeff: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_eig: f64,
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let v = parse_vector(s)?;
    match v[..] {
        [lo, hi] if lo < hi => Ok((lo, hi)),
        _ => Err(format!("expected `lo,hi` with lo < hi, got `{s}`")),
    }
}

fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|w| {
            w.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{w}` is not a finite number"))
        })
        .collect()
}

fn parse_degree(s: &str) -> Result<DegreeChoice, String> {
    if s == "auto" {
        return Ok(DegreeChoice::Auto);
    }
    s.parse::<u32>()
        .map(DegreeChoice::Fixed)
        .map_err(|_| format!("expected an integer or `auto`, got `{s}`"))
}

/// Error that maps to exit code 2.
struct Fail(String);

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(e.to_string())
    }
}

type Res = Result<i32, Fail>;

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail(format!("{}: {e}", path.display())))
}

fn load_system(path: &Path) -> Result<PolynomialSystem, Fail> {
    parse_system(&read(path)?).map_err(|e| Fail(format!("{}: {e}", path.display())))
}

fn load_points(path: &Path) -> Result<PointSet, Fail> {
    parse_points(&read(path)?).map_err(|e| Fail(format!("{}: {e}", path.display())))
}

fn load_components(path: &Path) -> Result<Vec<ComponentParam>, Fail> {
    parse_components(&read(path)?).map_err(|e| Fail(format!("{}: {e}", path.display())))
}

/// Polynomials of a system-format file, re-read in the variables `names`.
fn load_polys_in(path: &Path, names: &[String]) -> Result<Vec<Polynomial>, Fail> {
    let sys = load_system(path)?;
    if sys.names() != names {
        return Err(Fail(format!(
            "{}: variables {:?} differ from the system's {:?}",
            path.display(),
            sys.names(),
            names
        )));
    }
    Ok(sys.polys().to_vec())
}

fn seed(c: &Common, out: &mut dyn Write) -> u64 {
    match c.seed {
        Some(s) => s,
        None => {
            let _ = writeln!(out, "seed {DEFAULT_SEED} (default)");
            DEFAULT_SEED
        }
    }
}

fn candidate_spec(src: &SourceArgs, n: usize) -> Result<CandidateSpec, Fail> {
    let bbox = match src.bbox.len() {
        0 if src.seeds > 0 => return Err(Fail("--seeds needs --box".into())),
        1 => vec![src.bbox[0]; n],
        _ => src.bbox.clone(),
    };
    Ok(CandidateSpec {
        points: src.points.as_deref().map(load_points).transpose()?,
        components: src.components.as_deref().map(load_components).transpose()?.unwrap_or_default(),
        samples: src.samples,
        seeds: src.seeds,
        bbox,
    })
}

fn validate_options(v: &ValidateArgs, seed: u64) -> ValidateOptions {
    ValidateOptions {
        alpha_max: v.cert.alpha_max,
        degree: v.interp.degree,
        selection: v.interp.generators.into(),
        interp: InterpOptions {
            tol: v.interp.tol_null,
            ..InterpOptions::default()
        },
        cert: CertTolerances {
            tol_coeff: v.cert.tol_coeff,
            tol_eig: v.cert.tol_eig,
        },
        seed,
        jobs: v.common.jobs,
        ..ValidateOptions::default()
    }
}

/// Arguments without `--out`, which does not affect results.
fn recorded_command(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            out.push(a.clone());
        }
    }
    out
}

fn finish_validation(mut v: Validation, common: &Common, args: &[String], out: &mut dyn Write) -> Res {
    v.report.command = recorded_command(args);
    let dir = common.out.clone().unwrap_or_else(|| v.default_dir());
    v.write_run(&dir).map_err(|e| Fail(format!("{}: {e}", dir.display())))?;
    let _ = write!(out, "{}", v.report.summary());
    let _ = writeln!(out, "run directory {}", dir.display());
    Ok(if v.report.verdict { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_find(a: &FindArgs, out: &mut dyn Write) -> Res {
    let f = load_system(&a.system)?;
    let seed = seed(&a.common, out);
    let opts = ValidateOptions {
        seed,
        ..ValidateOptions::default()
    };
    let mut found = gather_candidates(&f, &candidate_spec(&a.source, f.nvars())?, &opts)?;
    for (k, y) in a.start.iter().enumerate() {
        let h = build_gdh(&f, y, seed.wrapping_add(k as u64))?;
        match track(&h, &h.start(), &TrackOptions::default()) {
            Ok(r) if r.f_residual <= ADMISSION_TOL => {
                let mut rec = PointRecord::new(r.x, r.f_residual, PointSource::Homotopy);
                rec.start = Some(k);
                found.push_unique(rec, opts.search.dedupe_tol);
            }
            Ok(r) => {
                let _ = writeln!(out, "# start {k}: endpoint residual {:e} above admission", r.f_residual);
            }
            Err(e) => {
                let _ = writeln!(out, "# start {k}: {e}");
            }
        }
    }
    let _ = writeln!(out, "# {} points", found.len());
    for (i, p) in found.points.iter().enumerate() {
        let seq = deflation_sequence(&f, &p.coords, 3, &DeflationOptions::default())
            .map(|s| format!("{s:?}"))
            .unwrap_or_else(|e| e.to_string());
        let _ = writeln!(out, "# point {i}: residual {:e} deflation {seq}", p.residual);
    }
    let text = format_points(&found);
    match &a.common.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("points.pts"), &text)?;
        }
        None => {
            let _ = write!(out, "{text}");
        }
    }
    Ok(if found.is_empty() { EXIT_NEGATIVE } else { EXIT_OK })
}

fn cmd_interpolate(a: &InterpolateArgs, out: &mut dyn Write) -> Res {
    let seed = seed(&a.common, out);
    let f = a.system.as_deref().map(load_system).transpose()?;
    let mut spec = candidate_spec(&a.source, f.as_ref().map_or(0, PolynomialSystem::nvars))?;
    let points = match &f {
        Some(f) => {
            let opts = ValidateOptions {
                seed,
                ..ValidateOptions::default()
            };
            gather_candidates(f, &spec, &opts)?
        }
        None => {
            if !spec.components.is_empty() || spec.seeds > 0 {
                return Err(Fail("components and search need --system".into()));
            }
            spec.points.take().ok_or_else(|| Fail("--points is required".into()))?
        }
    };
    if points.is_empty() {
        return Err(Fail("no points".into()));
    }
    let names: Vec<String> = match &f {
        Some(f) => f.names().to_vec(),
        None => (1..=points.nvars).map(|i| format!("x{i}")).collect(),
    };
    let coords = points.coords();
    let tol = a.interp.tol_null;
    let finite = spec.components.is_empty();
    let regularity = if finite {
        Some(realcert::interpolate::regularity_check(&coords, tol)?)
    } else {
        None
    };
    let d = match (a.interp.degree, regularity) {
        (DegreeChoice::Fixed(d), _) => d,
        (DegreeChoice::Auto, Some(r)) => r.generation_degree(),
        (DegreeChoice::Auto, None) => return Err(Fail("positive-dimensional input needs --degree".into())),
    };
    let opts = InterpOptions {
        tol,
        ..InterpOptions::default()
    };
    let mut vb = realcert::interpolate::vanishing_space(&coords, d, &opts)?;
    vb.regularity = regularity;
    let gens = realcert::interpolate::select_generators(&vb, a.interp.generators.into(), tol)?;
    let text = format_basis_report(&vb, &gens, &names);
    match &a.common.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("basis.txt"), &text)?;
            fs::write(dir.join("points.pts"), format_points(&points))?;
        }
        None => {}
    }
    let _ = write!(out, "{text}");
    Ok(EXIT_OK)
}

fn cmd_certify(a: &CertifyArgs, out: &mut dyn Write) -> Res {
    let f = load_system(&a.system)?;
    let mut polys = Vec::new();
    for p in &a.poly {
        polys.push(parse_polynomial(p, f.names()).map_err(|e| Fail(format!("--poly `{p}`: {e}")))?);
    }
    if let Some(path) = &a.polys {
        polys.extend(load_polys_in(path, f.names())?);
    }
    if polys.is_empty() {
        return Err(Fail("nothing to certify: give --poly or --polys".into()));
    }
    let zeros = match &a.points {
        Some(p) => load_points(p)?.coords(),
        None => Vec::new(),
    };
    if let Some(dir) = &a.common.out {
        fs::create_dir_all(dir)?;
    }
    let mut all = true;
    for (i, p) in polys.iter().enumerate() {
        let mut q = MembershipQuery::new(p.clone(), f.clone());
        q.alpha_max = a.cert.alpha_max;
        q.tol = CertTolerances {
            tol_coeff: a.cert.tol_coeff,
            tol_eig: a.cert.tol_eig,
        };
        q.known_zeros = zeros.clone();
        let outcome = certify(&q)?;
        for t in outcome.trace() {
            let _ = writeln!(out, "# [{i}] {}", serde_json::to_string(t)?);
        }
        match outcome.certificate() {
            Some(c) => {
                let _ = writeln!(
                    out,
                    "[{i}] certified alpha={} residual={:e} min_eig={:e}",
                    c.alpha, c.residual_inf, c.min_eig
                );
                let text = write_certificate(c, f.names());
                match &a.common.out {
                    Some(dir) => fs::write(dir.join(format!("certificate-{i:03}.cert")), text)?,
                    None => {
                        let _ = write!(out, "{text}");
                    }
                }
            }
            None => {
                all = false;
                let _ = writeln!(out, "[{i}] not found with alpha <= {}", a.cert.alpha_max);
            }
        }
    }
    Ok(if all { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_validate(a: &ValidateArgs, args: &[String], out: &mut dyn Write) -> Res {
    let f = load_system(&a.system)?;
    let seed = seed(&a.common, out);
    let spec = candidate_spec(&a.source, f.nvars())?;
    let alt = match &a.alt_generators {
        Some(p) => Some(PolynomialSystem::new(f.names().to_vec(), load_polys_in(p, f.names())?)?),
        None => None,
    };
    let v = validate_real_set(&f, &spec, alt.as_ref(), &validate_options(a, seed))?;
    finish_validation(v, &a.common, args, out)
}

fn cmd_a_validate(a: &AValidateArgs, args: &[String], out: &mut dyn Write) -> Res {
    let b = &a.base;
    if b.alt_generators.is_some() {
        return Err(Fail("--alt-generators is not supported with inequalities".into()));
    }
    let f = load_system(&b.system)?;
    let r = load_polys_in(&a.ineq, f.names())?;
    let seed = seed(&b.common, out);
    let spec = candidate_spec(&b.source, f.nvars())?;
    let v = a_radical_validate(&f, &r, &spec, &validate_options(b, seed))?;
    finish_validation(v, &b.common, args, out)
}

fn cmd_check_cert(a: &CheckCertArgs, out: &mut dyn Write) -> Res {
    let f = load_system(&a.system)?;
    let (cert, names) = read_certificate(&read(&a.cert)?).map_err(|e| Fail(format!("{}: {e}", a.cert.display())))?;
    if names != f.names() {
        return Err(Fail(format!(
            "certificate variables {names:?} differ from the system's {:?}",
            f.names()
        )));
    }
    let v = verify_certificate(
        &cert,
        &f,
        CertTolerances {
            tol_coeff: a.tol_coeff,
            tol_eig: a.tol_eig,
        },
    )?;
    let _ = writeln!(
        out,
        "residual_inf {:e} scale {:e} min_eig {:e} alpha {}",
        v.residual_inf, v.scale, v.min_eig, cert.alpha
    );
    let _ = writeln!(out, "{}", if v.passed { "valid" } else { "invalid" });
    Ok(if v.passed { EXIT_OK } else { EXIT_NEGATIVE })
}

/// Runs one command with output to the given writers; `args` excludes the program name.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let text: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(std::iter::once(OsString::from("realcert")).chain(args)) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    let result = match &cli.cmd {
        Command::Find(a) => cmd_find(a, out),
        Command::Interpolate(a) => cmd_interpolate(a, out),
        Command::Certify(a) => cmd_certify(a, out),
        Command::Validate(a) => cmd_validate(a, &text, out),
        Command::AValidate(a) => cmd_a_validate(a, &text, out),
        Command::CheckCert(a) => cmd_check_cert(a, out),
    };
    match result {
        Ok(code) => code,
        Err(Fail(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

/// Runs one command against the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}
