//! Command-line front end.
//!
//! [`run`] parses arguments, executes one command and returns the process
//! exit code: 0 pass, 1 check failed, 2 bad input, 3 margin violation.
//! CSV output starts with a `#` header line naming the schema version and,
//! for seeded commands, the seed.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex;
use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::json;

use crate::algebra::{numeric_bracket_limit, symbolic_bracket_element, AlgebraElement, LimitOptions};
use crate::classical::{poisson_bracket_coefficient, ClassicalFunction};
use crate::error::{Error, Result};
use crate::groupoid::{Orbit, DEFAULT_ORBIT_CAP};
use crate::intlat::solve_rational;
use crate::matrixrep::spectra_rows;
use crate::polytope::{fmt_point, fmt_rational, parse_rational, DelzantPolytope, Strictness};
use crate::scalar::rational_point;
use crate::verify::{self, bracket_modes, default_hbars, Mutation, SuiteConfig};
use crate::Rational;

pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "torikit", version, about = "Deformation groupoids and convolution algebras of toric manifolds")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Accept polytopes that fail the Delzant check (violations become warnings).
    #[arg(long, global = true)]
    pub permissive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Delzant check and face listing.
    #[command(subcommand)]
    Polytope(PolytopeCmd),
    /// Groupoid orbits.
    #[command(subcommand)]
    Groupoid(GroupoidCmd),
    /// Bracket limits and orbit spectra.
    #[command(subcommand)]
    Quantize(QuantizeCmd),
    /// Seeded property batteries.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Emit a polytope file for a standard example.
    #[command(subcommand)]
    Build(BuildCmd),
}

#[derive(Debug, Subcommand)]
pub enum PolytopeCmd {
    /// Exit 0 iff the polytope is Delzant; reports vertices, faces and isotropy.
    Check { file: PathBuf },
    /// One row per open face with its isotropy lattice.
    Strata { file: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum GroupoidCmd {
    /// Points of the orbit of `--point` in the fiber at `--hbar`.
    Orbit {
        file: PathBuf,
        #[arg(long, value_parser = parse_rational_arg, allow_hyphen_values = true)]
        hbar: Rational,
        #[arg(long, value_parser = parse_point_arg)]
        point: Point,
        #[arg(long, default_value_t = DEFAULT_ORBIT_CAP)]
        cap: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum QuantizeCmd {
    /// Renormalized commutator sweep against the symbolic and classical brackets.
    BracketLimit(BracketLimitArgs),
    /// Eigenvalues of an observable on orbit representations.
    Spectra(SpectraArgs),
}

#[derive(Debug, Args)]
pub struct BracketLimitArgs {
    pub file: PathBuf,
    /// Two observable files, `f` then `g`.
    #[arg(long = "obs", num_args = 1, required = true)]
    pub obs: Vec<PathBuf>,
    #[arg(long, value_parser = parse_point_arg)]
    pub point: Point,
    /// Mode `k` (repeatable); defaults to every mode of the symbolic bracket.
    #[arg(long = "mode", value_parser = parse_mode_arg, allow_hyphen_values = true)]
    pub modes: Vec<Mode>,
    /// Positive decreasing `h` values (repeatable); defaults to 2^-4 .. 2^-10.
    #[arg(long = "hbar", value_parser = parse_rational_arg, allow_hyphen_values = true)]
    pub hbars: Vec<Rational>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Richardson columns; omitted means the full tableau.
    #[arg(long)]
    pub levels: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SpectraArgs {
    pub file: PathBuf,
    #[arg(long = "obs", required = true)]
    pub obs: PathBuf,
    #[arg(long = "hbar", value_parser = parse_rational_arg, allow_hyphen_values = true, required = true)]
    pub hbars: Vec<Rational>,
    /// Orbit base point; defaults to the first vertex moved inward so every
    /// active slack equals |h|/2.
    #[arg(long, value_parser = parse_point_arg)]
    pub point: Option<Point>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    Suite {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cases per law.
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, hide = true)]
        inject: Option<Injection>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Injection {
    SignFlip,
}

#[derive(Debug, Subcommand)]
pub enum BuildCmd {
    /// The interval [0, 1].
    Sphere,
    /// The standard simplex of dimension N.
    Cpn { n: usize },
    /// Product of two polytope files.
    Product { a: PathBuf, b: PathBuf },
    /// The noncompact orthant of dimension N.
    Orthant { n: usize },
}

fn parse_rational_arg(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// Exact point given as `p/q,p/q,...`, optionally parenthesized.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<Rational>);

/// Character `k` given as `a,b,...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode(pub Vec<i64>);

fn parse_point_arg(s: &str) -> std::result::Result<Point, String> {
    let t = s.trim().trim_start_matches('(').trim_end_matches(')');
    t.split(',').map(parse_rational_arg).collect::<std::result::Result<_, _>>().map(Point)
}

fn parse_mode_arg(s: &str) -> std::result::Result<Mode, String> {
    let t = s.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
    t.split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|e| format!("bad mode entry {x:?}: {e}")))
        .collect::<std::result::Result<_, _>>()
        .map(Mode)
}

/// Outcome of a command before it is written out.
struct Report {
    body: Vec<u8>,
    code: i32,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Margin(_) => 3,
        Error::Numeric(_) | Error::CapExceeded { .. } => 1,
        _ => 2,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, stderr) {
        Ok(report) => {
            let written = match &cli.global.out {
                Some(path) => std::fs::write(path, &report.body),
                None => stdout.write_all(&report.body),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: cannot write output: {e}");
                return 2;
            }
            report.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli, log: &mut dyn Write) -> Result<Report> {
    let g = &cli.global;
    let strict = if g.permissive { Strictness::Permissive } else { Strictness::Strict };
    match &cli.command {
        Command::Polytope(PolytopeCmd::Check { file }) => polytope_check(&read_polytope(file)?, g.format.unwrap_or(Format::Json)),
        Command::Polytope(PolytopeCmd::Strata { file }) => {
            let p = load_polytope(file, strict, log)?;
            strata(&p, g.format.unwrap_or(Format::Csv))
        }
        Command::Groupoid(GroupoidCmd::Orbit { file, hbar, point, cap }) => {
            let p = load_polytope(file, strict, log)?;
            orbit(&p, hbar, &point.0, *cap, g.format.unwrap_or(Format::Csv))
        }
        Command::Quantize(QuantizeCmd::BracketLimit(a)) => {
            let p = load_polytope(&a.file, strict, log)?;
            bracket_limit(&p, a, g.format.unwrap_or(Format::Csv), log)
        }
        Command::Quantize(QuantizeCmd::Spectra(a)) => {
            let p = load_polytope(&a.file, strict, log)?;
            spectra(&p, a, g.format.unwrap_or(Format::Csv))
        }
        Command::Verify(VerifyCmd::Suite { file, seed, cases, tol, inject }) => {
            let p = load_polytope(file, strict, log)?;
            let cfg = SuiteConfig {
                seed: *seed,
                cases: *cases,
                tolerance: *tol,
                mutation: match inject {
                    Some(Injection::SignFlip) => Mutation::SignFlip,
                    None => Mutation::None,
                },
            };
            if !(cfg.tolerance > 0.0) {
                return Err(Error::Domain("--tol must be positive".into()));
            }
            suite(&p, &cfg, g.format.unwrap_or(Format::Json), log)
        }
        Command::Build(b) => {
            let p = match b {
                BuildCmd::Sphere => DelzantPolytope::interval(),
                BuildCmd::Cpn { n } => DelzantPolytope::simplex(*n)?,
                BuildCmd::Product { a, b } => {
                    DelzantPolytope::product(&load_polytope(a, strict, log)?, &load_polytope(b, strict, log)?)
                }
                BuildCmd::Orthant { n } => DelzantPolytope::orthant(*n)?,
            };
            Ok(Report { body: format!("{}\n", p.to_json_string()).into_bytes(), code: 0 })
        }
    }
}

fn read_polytope(path: &Path) -> Result<DelzantPolytope> {
    let text = std::fs::read_to_string(path)?;
    DelzantPolytope::from_json_str(&text)
}

fn load_polytope(path: &Path, strict: Strictness, log: &mut dyn Write) -> Result<DelzantPolytope> {
    let p = read_polytope(path)?;
    let report = p.require_delzant(strict)?;
    for v in &report.violations {
        let _ = writeln!(log, "warning: {v}");
    }
    Ok(p)
}

fn load_observable(path: &Path, n: usize) -> Result<AlgebraElement> {
    AlgebraElement::from_json_str(&std::fs::read_to_string(path)?, n)
}

fn check_point(p: &DelzantPolytope, y: &[Rational]) -> Result<()> {
    if y.len() != p.dim() {
        return Err(Error::Dimension { expected: p.dim(), found: y.len() });
    }
    Ok(())
}

fn fmt_mode(k: &[i64]) -> String {
    format!("({})", k.iter().map(i64::to_string).collect::<Vec<_>>().join(","))
}

fn csv_writer(command: &str, seed: Option<u64>) -> csv::Writer<Vec<u8>> {
    let mut head = format!("# torikit {command} csv v{CSV_SCHEMA_VERSION}");
    if let Some(s) = seed {
        head.push_str(&format!(" seed={s}"));
    }
    head.push('\n');
    csv::Writer::from_writer(head.into_bytes())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn to_json_bytes(v: &impl Serialize) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

#[derive(Serialize)]
struct FaceRow {
    dim: usize,
    active: Vec<usize>,
    sample: String,
    isotropy: Vec<Vec<i64>>,
}

fn face_rows(p: &DelzantPolytope) -> Result<Vec<FaceRow>> {
    p.enumerate_faces()?
        .into_iter()
        .map(|f| {
            Ok(FaceRow {
                dim: p.dim() - f.active.len(),
                isotropy: p.isotropy_lattice(&f.sample)?,
                sample: fmt_point(&f.sample),
                active: f.active,
            })
        })
        .collect()
}

fn polytope_check(p: &DelzantPolytope, format: Format) -> Result<Report> {
    let report = p.check_delzant();
    let passed = report.passed();
    let faces = if passed { face_rows(p)? } else { Vec::new() };
    let violations: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
    let body = match format {
        Format::Json => to_json_bytes(&json!({
            "delzant": passed,
            "dim": p.dim(),
            "compact": p.is_compact(),
            "violations": violations,
            "vertices": report.vertices.iter().map(|v| json!({"point": fmt_point(&v.point), "active": v.active})).collect::<Vec<_>>(),
            "rays": report.rays.iter().map(|r| fmt_point(r)).collect::<Vec<_>>(),
            "faces": faces,
        }))?,
        Format::Csv => {
            let mut w = csv_writer("polytope-check", None);
            w.write_record(["kind", "index", "point", "active", "detail"]).map_err(csv_err)?;
            for (i, v) in report.vertices.iter().enumerate() {
                w.write_record(["vertex", &i.to_string(), &fmt_point(&v.point), &format!("{:?}", v.active), ""])
                    .map_err(csv_err)?;
            }
            for (i, f) in faces.iter().enumerate() {
                w.write_record(["face", &i.to_string(), &f.sample, &format!("{:?}", f.active), &format!("isotropy={:?}", f.isotropy)])
                    .map_err(csv_err)?;
            }
            for (i, v) in violations.iter().enumerate() {
                w.write_record(["violation", &i.to_string(), "", "", v]).map_err(csv_err)?;
            }
            finish(w)?
        }
    };
    Ok(Report { body, code: if passed { 0 } else { 1 } })
}

fn strata(p: &DelzantPolytope, format: Format) -> Result<Report> {
    let faces = face_rows(p)?;
    let body = match format {
        Format::Json => to_json_bytes(&json!({ "faces": faces }))?,
        Format::Csv => {
            let mut w = csv_writer("polytope-strata", None);
            w.write_record(["face", "dim", "active", "sample", "isotropy"]).map_err(csv_err)?;
            for (i, f) in faces.iter().enumerate() {
                w.write_record([&i.to_string(), &f.dim.to_string(), &format!("{:?}", f.active), &f.sample, &format!("{:?}", f.isotropy)])
                    .map_err(csv_err)?;
            }
            finish(w)?
        }
    };
    Ok(Report { body, code: 0 })
}

fn orbit(p: &DelzantPolytope, hbar: &Rational, y: &[Rational], cap: usize, format: Format) -> Result<Report> {
    check_point(p, y)?;
    let o = Orbit::new(p, hbar, y, cap)?;
    let rows: Vec<(String, String)> = (0..o.len())
        .map(|i| (fmt_point(&o.points()[i]), fmt_mode(&o.arrow_between(o.index_of(y).expect("base in orbit"), i))))
        .collect();
    let body = match format {
        Format::Json => to_json_bytes(&json!({
            "hbar": fmt_rational(hbar),
            "base": fmt_point(y),
            "size": o.len(),
            "points": rows.iter().map(|(pt, k)| json!({"point": pt, "k": k})).collect::<Vec<_>>(),
        }))?,
        Format::Csv => {
            let mut w = csv_writer("groupoid-orbit", None);
            w.write_record(["index", "point", "k"]).map_err(csv_err)?;
            for (i, (pt, k)) in rows.iter().enumerate() {
                w.write_record([&i.to_string(), pt, k]).map_err(csv_err)?;
            }
            finish(w)?
        }
    };
    Ok(Report { body, code: 0 })
}

#[derive(Serialize)]
struct LimitRow {
    hbar: String,
    mode: String,
    re: f64,
    im: f64,
    extrapolated_re: f64,
    extrapolated_im: f64,
    symbolic_re: f64,
    symbolic_im: f64,
    classical_re: f64,
    classical_im: f64,
    err_sym: f64,
    err_cls: f64,
    est_order: String,
}

#[derive(Serialize)]
struct LimitSummary {
    mode: String,
    extrapolation_error: f64,
    symbolic_classical_gap: f64,
    est_order: String,
    passed: bool,
}

fn bracket_limit(p: &DelzantPolytope, a: &BracketLimitArgs, format: Format, log: &mut dyn Write) -> Result<Report> {
    if a.obs.len() != 2 {
        return Err(Error::Domain(format!("bracket-limit needs exactly two --obs files, got {}", a.obs.len())));
    }
    if !(a.tol > 0.0) {
        return Err(Error::Domain("--tol must be positive".into()));
    }
    let point = &a.point.0;
    check_point(p, point)?;
    if !p.contains(point) {
        return Err(Error::Domain(format!("point {} is outside the polytope", fmt_point(point))));
    }
    let f = load_observable(&a.obs[0], p.dim())?;
    let g = load_observable(&a.obs[1], p.dim())?;
    let hbars = if a.hbars.is_empty() { default_hbars() } else { a.hbars.clone() };
    let modes = if a.modes.is_empty() { bracket_modes(&f, &g) } else { a.modes.iter().map(|m| m.0.clone()).collect() };
    let opts = LimitOptions { levels: a.levels.unwrap_or(usize::MAX) };
    let y: Vec<f64> = rational_point(point);
    let bracket = symbolic_bracket_element(&f, &g);
    let (cf, cg) = (ClassicalFunction::from_element(&f), ClassicalFunction::from_element(&g));

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for k in &modes {
        if k.len() != p.dim() {
            return Err(Error::Dimension { expected: p.dim(), found: k.len() });
        }
        let lim = numeric_bracket_limit::<f64>(p, &f, &g, point, k, &hbars, opts)?;
        let sym = bracket.eval_mode(0.0, &y, k)?;
        let cls: Complex<f64> = poisson_bracket_coefficient(&cf, &cg, &y, k)?;
        let order = lim.order.to_string();
        for (h, v) in lim.hbars.iter().zip(&lim.values) {
            rows.push(LimitRow {
                hbar: fmt_rational(h),
                mode: fmt_mode(k),
                re: v.re,
                im: v.im,
                extrapolated_re: lim.estimate.re,
                extrapolated_im: lim.estimate.im,
                symbolic_re: sym.re,
                symbolic_im: sym.im,
                classical_re: cls.re,
                classical_im: cls.im,
                err_sym: (v - sym).norm(),
                err_cls: (v - cls).norm(),
                est_order: order.clone(),
            });
        }
        let extrapolation_error = (lim.estimate - sym).norm().max((lim.estimate - cls).norm());
        let symbolic_classical_gap = (sym - cls).norm();
        let passed = extrapolation_error <= a.tol && symbolic_classical_gap <= a.tol;
        let _ = writeln!(
            log,
            "mode {}: extrapolated {:.3e}, gap to brackets {:.3e}, order {} -> {}",
            fmt_mode(k),
            lim.estimate,
            extrapolation_error,
            order,
            if passed { "PASS" } else { "FAIL" }
        );
        summaries.push(LimitSummary { mode: fmt_mode(k), extrapolation_error, symbolic_classical_gap, est_order: order, passed });
    }
    let passed = summaries.iter().all(|s| s.passed);
    let body = match format {
        Format::Json => to_json_bytes(&json!({
            "version": CSV_SCHEMA_VERSION,
            "point": fmt_point(point),
            "tolerance": a.tol,
            "passed": passed,
            "modes": summaries,
            "rows": rows,
        }))?,
        Format::Csv => {
            let mut w = csv_writer("bracket-limit", None);
            for r in &rows {
                w.serialize(r).map_err(csv_err)?;
            }
            finish(w)?
        }
    };
    Ok(Report { body, code: if passed { 0 } else { 1 } })
}

/// First vertex moved inward so each active slack equals `|h| / 2`.
pub fn default_base_point(p: &DelzantPolytope, hbar: &Rational) -> Result<Vec<Rational>> {
    let report = p.check_delzant();
    let v = report.vertices.first().ok_or_else(|| Error::Domain("polytope has no vertex".into()))?;
    let half = hbar.abs() / Rational::from_integer(2.into());
    let rows: Vec<Vec<Rational>> = v
        .active
        .iter()
        .map(|&j| p.facets()[j].normal.iter().map(|&x| Rational::from_integer(x.into())).collect())
        .collect();
    let rhs = vec![half; rows.len()];
    let d = solve_rational(&rows, &rhs).ok_or_else(|| Error::Domain("vertex normals are singular".into()))?;
    Ok(v.point.iter().zip(&d).map(|(a, b)| a + b).collect())
}

fn spectra(p: &DelzantPolytope, a: &SpectraArgs, format: Format) -> Result<Report> {
    if !p.is_compact() {
        return Err(Error::Domain("spectra need a compact polytope (finite orbits)".into()));
    }
    if a.hbars.iter().any(Zero::is_zero) {
        return Err(Error::Domain("hbar must be nonzero".into()));
    }
    if let Some(Point(y)) = &a.point {
        check_point(p, y)?;
    }
    let f = load_observable(&a.obs, p.dim())?;
    let mut bases = Vec::new();
    for h in &a.hbars {
        bases.push(match &a.point {
            Some(Point(y)) => y.clone(),
            None => default_base_point(p, h)?,
        });
    }
    let lookup = |h: &Rational| bases[a.hbars.iter().position(|x| x == h).expect("listed hbar")].clone();
    let rows = spectra_rows(p, &f, &a.hbars, &lookup)?;
    let body = match format {
        Format::Json => to_json_bytes(&json!({
            "rows": rows.iter().map(|r| json!({
                "hbar": fmt_rational(&r.hbar), "orbit_size": r.orbit_size, "index": r.index, "re": r.re, "im": r.im
            })).collect::<Vec<_>>()
        }))?,
        Format::Csv => {
            let mut w = csv_writer("spectra", None);
            w.write_record(["hbar", "orbit_size", "index", "re", "im"]).map_err(csv_err)?;
            for r in &rows {
                w.write_record([fmt_rational(&r.hbar), r.orbit_size.to_string(), r.index.to_string(), r.re.to_string(), r.im.to_string()])
                    .map_err(csv_err)?;
            }
            finish(w)?
        }
    };
    Ok(Report { body, code: 0 })
}

fn suite(p: &DelzantPolytope, cfg: &SuiteConfig, format: Format, log: &mut dyn Write) -> Result<Report> {
    let report = verify::run_suite(p, cfg);
    for b in &report.batteries {
        let _ = writeln!(
            log,
            "{:<22} {:>6} cases {:>4} failures worst {:.3e} {}",
            b.name,
            b.cases,
            b.failures,
            b.worst,
            if b.passed() { "PASS" } else { "FAIL" }
        );
    }
    if let Some(b) = report.first_failure() {
        if let Some(c) = &b.first_counterexample {
            let _ = writeln!(log, "first counterexample ({}, case {}): {}", b.name, c.case, c.detail);
        }
    }
    let passed = report.passed();
    let body = match format {
        Format::Json => to_json_bytes(&json!({
            "seed": cfg.seed,
            "cases": cfg.cases,
            "tolerance": cfg.tolerance,
            "passed": passed,
            "batteries": report.batteries,
            "first_failure": report.first_failure(),
        }))?,
        Format::Csv => {
            let mut w = csv_writer("verify-suite", Some(cfg.seed));
            w.write_record(["battery", "cases", "failures", "worst", "tolerance", "first_counterexample"]).map_err(csv_err)?;
            for b in &report.batteries {
                w.write_record([
                    b.name.clone(),
                    b.cases.to_string(),
                    b.failures.to_string(),
                    b.worst.to_string(),
                    b.tolerance.to_string(),
                    b.first_counterexample.as_ref().map(|c| c.detail.clone()).unwrap_or_default(),
                ])
                .map_err(csv_err)?;
            }
            finish(w)?
        }
    };
    Ok(Report { body, code: if passed { 0 } else { 1 } })
}
