//! Seeded property batteries and convergence studies.
//!
//! Each battery draws its cases from a ChaCha stream seeded by the caller and
//! records the first counterexample it meets, so a failing run can be
//! replayed exactly.

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::algebra::{
    self, involution, numeric_bracket_limit, symbolic_bracket_element, Adjoint, AlgebraElement, Convolution,
    GroupoidFunction, LimitOptions, Order,
};
use crate::classical::{poisson_bracket_aa, ClassicalFunction};
use crate::delzant::{build_system, SectionFormula};
use crate::error::Result;
use crate::matrixrep::{matrix_commutator_limit, represent, OrbitRep, RepMatrix};
use crate::polytope::{fmt_point, DelzantPolytope};
use crate::sample::{self, ElementShape, SampleRng};
use crate::scalar::{rational_point, relative_gap, Real};
use crate::{rat, Rational};

/// Deliberate defects for checking that the batteries can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Negates the symbolic bracket wherever it is compared.
    SignFlip,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub case: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatteryResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub first_counterexample: Option<Counterexample>,
}

impl BatteryResult {
    fn new(name: &str, tolerance: f64) -> Self {
        BatteryResult { name: name.into(), cases: 0, failures: 0, worst: 0.0, tolerance, first_counterexample: None }
    }

    /// Records one measured deviation.
    fn record(&mut self, gap: f64, detail: impl FnOnce() -> String) {
        let case = self.cases;
        self.cases += 1;
        if gap.is_nan() || gap > self.worst {
            self.worst = if gap.is_nan() { f64::INFINITY } else { gap };
        }
        if !(gap <= self.tolerance) {
            self.failures += 1;
            if self.first_counterexample.is_none() {
                self.first_counterexample = Some(Counterexample { case, detail: detail() });
            }
        }
    }

    fn record_error(&mut self, e: impl std::fmt::Display) {
        let case = self.cases;
        self.cases += 1;
        self.failures += 1;
        self.worst = f64::INFINITY;
        if self.first_counterexample.is_none() {
            self.first_counterexample = Some(Counterexample { case, detail: format!("error: {e}") });
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Cases per algebraic law.
    pub cases: usize,
    pub tolerance: f64,
    pub mutation: Mutation,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0, cases: 200, tolerance: 1e-10, mutation: Mutation::None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub batteries: Vec<BatteryResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.batteries.iter().all(BatteryResult::passed)
    }

    pub fn first_failure(&self) -> Option<&BatteryResult> {
        self.batteries.iter().find(|b| !b.passed())
    }
}

fn describe_elements(es: &[&AlgebraElement]) -> String {
    es.iter()
        .map(|e| serde_json::to_string(&e.to_json()).expect("serializes"))
        .collect::<Vec<_>>()
        .join(" ; ")
}

fn sub_rng(seed: u64, stream: u64) -> SampleRng {
    sample::rng(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// `(f * g) * h = f * (g * h)` at random arrows, boundary included.
pub fn associativity(p: &DelzantPolytope, cfg: &SuiteConfig) -> BatteryResult {
    let mut out = BatteryResult::new("associativity", cfg.tolerance);
    let mut r = sub_rng(cfg.seed, 1);
    for _ in 0..cfg.cases {
        let e: Vec<AlgebraElement> = (0..3).map(|_| sample::element(&mut r, p.dim(), ElementShape::default())).collect();
        let g = sample::arrow(&mut r, p, 4);
        let left: Result<Complex<f64>> = Convolution { a: Convolution { a: &e[0], b: &e[1] }, b: &e[2] }.eval_at(p, &g);
        let right: Result<Complex<f64>> = Convolution { a: &e[0], b: Convolution { a: &e[1], b: &e[2] } }.eval_at(p, &g);
        match (left, right) {
            (Ok(a), Ok(b)) => out.record(relative_gap(a, b), || {
                format!("{} at {}: {a} vs {b}", describe_elements(&[&e[0], &e[1], &e[2]]), g.describe())
            }),
            (Err(x), _) | (_, Err(x)) => out.record_error(x),
        }
    }
    out
}

/// `(f * g)^* = g^* * f^*` and `f^** = f`.
pub fn involution_laws(p: &DelzantPolytope, cfg: &SuiteConfig) -> BatteryResult {
    let mut out = BatteryResult::new("involution", cfg.tolerance);
    let mut r = sub_rng(cfg.seed, 2);
    for _ in 0..cfg.cases {
        let f = sample::element(&mut r, p.dim(), ElementShape::default());
        let g = sample::element(&mut r, p.dim(), ElementShape::default());
        let at = sample::arrow(&mut r, p, 4);
        let run = || -> Result<(f64, f64)> {
            let lhs: Complex<f64> = Adjoint { a: Convolution { a: &f, b: &g } }.eval_at(p, &at)?;
            let rhs: Complex<f64> = Convolution { a: Adjoint { a: &g }, b: Adjoint { a: &f } }.eval_at(p, &at)?;
            let twice: Complex<f64> = involution(&involution(&f)).eval_at(p, &at)?;
            let once: Complex<f64> = f.eval_at(p, &at)?;
            Ok((relative_gap(lhs, rhs), relative_gap(twice, once)))
        };
        match run() {
            Ok((a, b)) => out.record(a.max(b), || format!("{} at {}", describe_elements(&[&f, &g]), at.describe())),
            Err(e) => out.record_error(e),
        }
    }
    out
}

fn max_gap(a: &RepMatrix<f64>, b: &RepMatrix<f64>) -> f64 {
    let scale = a.iter().chain(b.iter()).fold(1.0f64, |m, z| m.max(z.norm()));
    (a - b).iter().fold(0.0f64, |m, z| m.max(z.norm())) / scale
}

/// `pi(f * g) = pi(f) pi(g)` and `pi(f^*) = pi(f)^dagger` on random orbits.
/// Noncompact polytopes use windows for the adjoint law only.
pub fn representation(p: &DelzantPolytope, cfg: &SuiteConfig) -> BatteryResult {
    let mut out = BatteryResult::new("representation", cfg.tolerance);
    let mut r = sub_rng(cfg.seed, 3);
    for _ in 0..cfg.cases {
        let f = sample::element(&mut r, p.dim(), ElementShape::default());
        let g = sample::element(&mut r, p.dim(), ElementShape::default());
        let h = sample::hbar(&mut r, 2, 8, true);
        let y = if r.gen_bool(0.7) { sample::interior_point(&mut r, p) } else { sample::point_in(&mut r, p) };
        let run = || -> Result<f64> {
            let complete = p.is_compact();
            let rep = if complete {
                OrbitRep::new(p, &h, &y)?
            } else {
                OrbitRep::from_orbit(crate::groupoid::Orbit::window(p, &h, &y, 3)?)
            };
            let pf: RepMatrix<f64> = represent(p, &rep, &f)?;
            let pstar: RepMatrix<f64> = represent(p, &rep, &Adjoint { a: &f })?;
            let mut gap = max_gap(&pstar, &pf.adjoint());
            if complete {
                let pg: RepMatrix<f64> = represent(p, &rep, &g)?;
                let pfg: RepMatrix<f64> = represent(p, &rep, &Convolution { a: &f, b: &g })?;
                gap = gap.max(max_gap(&pfg, &(&pf * &pg)));
            }
            Ok(gap)
        };
        match run() {
            Ok(gap) => out.record(gap, || {
                format!("{} on orbit of {} at hbar={}", describe_elements(&[&f, &g]), fmt_point(&y), h)
            }),
            Err(e) => out.record_error(e),
        }
    }
    out
}

fn bracket(a: &AlgebraElement, b: &AlgebraElement, m: Mutation) -> AlgebraElement {
    let s = symbolic_bracket_element(a, b);
    match m {
        Mutation::None => s,
        Mutation::SignFlip => s.scale(&-Rational::one(), &Rational::zero()),
    }
}

/// Largest relative deviation between two elements over the union of their
/// modes, at `h = 0`.
fn element_gap(a: &AlgebraElement, b: &AlgebraElement, y: &[f64], scale: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in a.modes().keys().chain(b.modes().keys()) {
        let va = a.eval_mode(0.0, y, k)?;
        let vb = b.eval_mode(0.0, y, k)?;
        worst = worst.max((va - vb).norm() / scale.max(va.norm()).max(vb.norm()).max(1.0));
    }
    Ok(worst)
}

fn element_scale(es: &[&AlgebraElement], y: &[f64]) -> Result<f64> {
    let mut s = 1.0f64;
    for e in es {
        for k in e.modes().keys() {
            s = s.max(e.eval_mode(0.0, y, k)?.norm());
        }
    }
    Ok(s)
}

/// Antisymmetry, Leibniz rule and Jacobi identity of the symbolic bracket.
pub fn bracket_laws(p: &DelzantPolytope, cfg: &SuiteConfig) -> BatteryResult {
    let mut out = BatteryResult::new("bracket_laws", cfg.tolerance);
    let mut r = sub_rng(cfg.seed, 4);
    for _ in 0..cfg.cases {
        let e: Vec<AlgebraElement> = (0..3).map(|_| sample::element(&mut r, p.dim(), ElementShape::default())).collect();
        let y: Vec<f64> = rational_point(&sample::interior_point(&mut r, p));
        let m = cfg.mutation;
        let run = || -> Result<f64> {
            let fg = bracket(&e[0], &e[1], m);
            let gf = bracket(&e[1], &e[0], m).scale(&-Rational::one(), &Rational::zero());
            let anti = element_gap(&fg, &gf, &y, 1.0)?;

            let gh = e[1].mul_unmasked(&e[2]).at_hbar_zero();
            let lhs = bracket(&e[0], &gh, m);
            let t1 = fg.mul_unmasked(&e[2].at_hbar_zero());
            let t2 = e[1].at_hbar_zero().mul_unmasked(&bracket(&e[0], &e[2], m));
            let rhs = t1.add(&t2).at_hbar_zero();
            let scale = element_scale(&[&lhs, &t1, &t2], &y)?;
            let leibniz = element_gap(&lhs, &rhs, &y, scale)?;

            let c1 = bracket(&e[0], &bracket(&e[1], &e[2], m), m);
            let c2 = bracket(&e[1], &bracket(&e[2], &e[0], m), m);
            let c3 = bracket(&e[2], &bracket(&e[0], &e[1], m), m);
            let scale = element_scale(&[&c1, &c2, &c3], &y)?;
            let jacobi = element_gap(&c1.add(&c2).add(&c3), &AlgebraElement::new(p.dim()), &y, scale)?;
            Ok(anti.max(leibniz).max(jacobi))
        };
        match run() {
            Ok(gap) => out.record(gap, || format!("{} at y={:?}", describe_elements(&[&e[0], &e[1], &e[2]]), y)),
            Err(err) => out.record_error(err),
        }
    }
    out
}

/// Symbolic bracket against the action-angle bracket of the synthesized
/// functions at random `(y, theta)`.
pub fn classical_agreement(p: &DelzantPolytope, cfg: &SuiteConfig) -> BatteryResult {
    let mut out = BatteryResult::new("classical_agreement", cfg.tolerance);
    let mut r = sub_rng(cfg.seed, 5);
    for _ in 0..cfg.cases {
        let f = sample::element(&mut r, p.dim(), ElementShape::default());
        let g = sample::element(&mut r, p.dim(), ElementShape::default());
        let y: Vec<f64> = rational_point(&sample::interior_point(&mut r, p));
        let theta = sample::angle(&mut r, p.dim());
        let run = || -> Result<(Complex<f64>, Complex<f64>)> {
            let lhs = ClassicalFunction::from_element(&bracket(&f, &g, cfg.mutation)).eval(&y, &theta)?;
            let rhs = poisson_bracket_aa(&ClassicalFunction::from_element(&f), &ClassicalFunction::from_element(&g), &y, &theta)?;
            Ok((lhs, rhs))
        };
        match run() {
            Ok((a, b)) => out.record(relative_gap(a, b), || {
                format!("{} at y={:?} theta={:?}: {a} vs {b}", describe_elements(&[&f, &g]), y, theta)
            }),
            Err(e) => out.record_error(e),
        }
    }
    out
}

/// Default `h` sweep `2^-4 .. 2^-10`.
pub fn default_hbars() -> Vec<Rational> {
    (4..=10).map(|e| rat(1, 1 << e)).collect()
}

/// Richardson limit of the renormalized commutator against the symbolic
/// bracket, at interior points with enough margin for the sweep.
pub fn limit_consistency(p: &DelzantPolytope, cfg: &SuiteConfig, tolerance: f64) -> BatteryResult {
    let mut out = BatteryResult::new("limit_consistency", tolerance);
    let mut r = sub_rng(cfg.seed, 6);
    let hbars = default_hbars();
    let shape = ElementShape { max_modes: 2, max_k: 1, ..ElementShape::default() };
    for _ in 0..cfg.cases {
        let f = sample::element(&mut r, p.dim(), shape);
        let g = sample::element(&mut r, p.dim(), shape);
        let k = pick_mode(&mut r, &f, &g);
        let y = sample::interior_point_with_margin(&mut r, p, &sweep_margin(p, &f, &g, &k, &hbars[0]));
        let run = || -> Result<(Complex<f64>, Complex<f64>)> {
            let lim = numeric_bracket_limit::<f64>(p, &f, &g, &y, &k, &hbars, LimitOptions::default())?;
            let sym = bracket(&f, &g, cfg.mutation).eval_mode(0.0, &rational_point::<f64>(&y), &k)?;
            Ok((lim.estimate, sym))
        };
        match run() {
            Ok((a, b)) => out.record(relative_gap(a, b), || {
                format!("{} at y={} k={:?}: {a} vs {b}", describe_elements(&[&f, &g]), fmt_point(&y), k)
            }),
            Err(e) => out.record_error(e),
        }
    }
    out
}

/// Slack needed at `y` so every translate used by a bracket sweep starting
/// at `hmax` stays interior, plus a little room.
pub fn sweep_margin(p: &DelzantPolytope, f: &AlgebraElement, g: &AlgebraElement, k: &[i64], hmax: &Rational) -> Rational {
    let reach = algebra::commutator_displacements(f, g, k)
        .iter()
        .flat_map(|d| p.facets().iter().map(move |fa| fa.pairing(d).abs()))
        .max()
        .unwrap_or(0);
    hmax * Rational::from_integer(reach.into()) + rat(1, 100)
}

/// A mode where the bracket of `f` and `g` can be nonzero.
fn pick_mode(r: &mut SampleRng, f: &AlgebraElement, g: &AlgebraElement) -> Vec<i64> {
    let sums: Vec<Vec<i64>> = f
        .modes()
        .keys()
        .flat_map(|l| g.modes().keys().map(move |m| l.iter().zip(m).map(|(a, b)| a + b).collect()))
        .collect();
    sums[r.gen_range(0..sums.len())].clone()
}

/// Facet and isotropy characterizations of arrow membership agree.
pub fn membership(p: &DelzantPolytope, seed: u64, cases: usize) -> BatteryResult {
    let mut out = BatteryResult::new("membership", 0.0);
    let mut r = sub_rng(seed, 7);
    for _ in 0..cases {
        let g = sample::grid_arrow(&mut r, p, 5);
        let (a, b) = (g.is_member(p), g.is_member_isotropy(p));
        out.record(if a == b { 0.0 } else { 1.0 }, || format!("{}: facet={a} isotropy={b}", g.describe()));
    }
    out
}

/// `A B = 0`, `Jd(sigma(y)) = 0` exactly, and `T^d`-invariance of `k_sigma`.
pub fn delzant_identities(p: &DelzantPolytope, seed: u64, cases: usize) -> BatteryResult {
    let mut out = BatteryResult::new("delzant_identities", 1e-12);
    let sys = match build_system(p) {
        Ok(s) => s,
        Err(e) => {
            out.record_error(e);
            return out;
        }
    };
    let ab_zero = sys.a().mul(sys.b()).map(|m| m.is_zero()).unwrap_or(false);
    out.record(if ab_zero { 0.0 } else { 1.0 }, || "A B != 0".into());
    let mut r = sub_rng(seed, 8);
    for _ in 0..cases {
        let y = sample::point_in(&mut r, p);
        match sys.sigma_squares(&y, SectionFormula::Repaired).and_then(|sq| sys.jd_from_squares(&sq)) {
            Ok(jd) => out.record(if jd.iter().all(Zero::is_zero) { 0.0 } else { 1.0 }, || {
                format!("Jd(sigma({})) = {}", fmt_point(&y), fmt_point(&jd))
            }),
            Err(e) => out.record_error(e),
        }
        let z: Vec<Complex<f64>> = (0..sys.n0()).map(|_| Complex::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0))).collect();
        let k = sample::mode(&mut r, sys.n(), 5);
        let t = sample::angle(&mut r, sys.d());
        let run = || -> Result<f64> {
            let a = sys.k_sigma_ambient(&z, &k)?;
            let b = sys.k_sigma_ambient(&sys.act_td(&z, &t), &k)?;
            Ok((a - b).norm())
        };
        match run() {
            Ok(gap) => out.record(gap, || format!("k_sigma not T^d invariant at z={z:?} k={k:?} t={t:?}")),
            Err(e) => out.record_error(e),
        }
    }
    out
}

/// Symbolic bracket, action-angle bracket and matrix-commutator limit agree
/// pairwise at random interior points.
pub fn three_oracle_agreement(p: &DelzantPolytope, seed: u64, cases: usize, tolerance: f64) -> BatteryResult {
    let mut out = BatteryResult::new("three_oracles", tolerance);
    let mut r = sub_rng(seed, 9);
    let hbars = default_hbars();
    let shape = ElementShape { max_modes: 2, max_k: 1, with_hbar: false, ..ElementShape::default() };
    for _ in 0..cases {
        let f = sample::element(&mut r, p.dim(), shape);
        let g = sample::element(&mut r, p.dim(), shape);
        let k = pick_mode(&mut r, &f, &g);
        let y = sample::interior_point_with_margin(&mut r, p, &sweep_margin(p, &f, &g, &k, &hbars[0]));
        match three_oracles(p, &f, &g, &y, &k, &hbars) {
            Ok([s, c, m]) => {
                let gap = relative_gap(s, c).max(relative_gap(s, m)).max(relative_gap(c, m));
                out.record(gap, || {
                    format!("{} at y={} k={:?}: {s} / {c} / {m}", describe_elements(&[&f, &g]), fmt_point(&y), k)
                })
            }
            Err(e) => out.record_error(e),
        }
    }
    out
}

/// Every battery above on one polytope.
pub fn run_suite(p: &DelzantPolytope, cfg: &SuiteConfig) -> SuiteReport {
    let light = (cfg.cases / 10).max(1);
    let mut batteries = vec![
        associativity(p, cfg),
        involution_laws(p, cfg),
        representation(p, cfg),
        bracket_laws(p, cfg),
        classical_agreement(p, cfg),
        membership(p, cfg.seed, cfg.cases * 10),
        delzant_identities(p, cfg.seed, cfg.cases),
    ];
    if p.is_compact() {
        batteries.push(limit_consistency(p, &SuiteConfig { cases: light, ..*cfg }, 1e-6));
    }
    SuiteReport { seed: cfg.seed, batteries }
}

/// Named smooth observable pairs for the example polytopes.
pub fn standard_pairs(n: usize) -> Vec<(&'static str, AlgebraElement, AlgebraElement)> {
    let mono = |k: &[i64], s: &str| AlgebraElement::parse_monomial(k, s).expect("catalog expression");
    match n {
        1 => vec![
            ("canonical", mono(&[1], "y1"), mono(&[-1], "y1")),
            ("sine-shift", mono(&[1], "sin(y1)"), mono(&[-1], "1")),
            ("poly-cos", mono(&[1], "y1^2"), mono(&[-1], "cos(y1)")),
            ("exp-double", mono(&[2], "exp(y1)"), mono(&[-1], "y1 + h")),
            ("mixed", mono(&[0], "cos(y1)").add(&mono(&[1], "y1")), mono(&[-2], "sin(y1)").add(&mono(&[1], "y1^2"))),
            ("sphere", mono(&[1], "sqrt(y1*(1 - y1))"), mono(&[0], "y1 - 1/2")),
        ],
        2 => vec![
            ("canonical", mono(&[1, 0], "y1"), mono(&[-1, 0], "y1")),
            ("cross", mono(&[1, 0], "sin(y2)"), mono(&[0, -1], "y1*y2")),
            ("diagonal", mono(&[1, 1], "y1 + y2^2"), mono(&[-1, 0], "cos(y1)")),
            ("antidiagonal", mono(&[1, -1], "exp(y1*y2)"), mono(&[0, 1], "y2 + h*y1")),
            ("mixed", mono(&[0, 0], "y1*y2").add(&mono(&[0, 1], "sin(y1)")), mono(&[1, 0], "y2^2").add(&mono(&[-1, -1], "cos(y2)"))),
        ],
        _ => Vec::new(),
    }
}

/// Error of the renormalized commutator against the symbolic bracket along
/// an `h` sweep, for one pair at one mode.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub mode: Vec<i64>,
    pub hbars: Vec<Rational>,
    pub errors: Vec<f64>,
    pub symbolic: Complex<f64>,
    pub extrapolated: Complex<f64>,
    pub order: Order,
    /// Least-squares slope of `log(error)` against `log(h)`; `None` if the
    /// sequence is exact.
    pub fitted_order: Option<f64>,
}

impl ConvergenceStudy {
    pub fn richardson_error(&self) -> f64 {
        (self.extrapolated - self.symbolic).norm()
    }

    /// Exact, or strictly decreasing errors with fitted order at least `min_order`.
    pub fn converges(&self, min_order: f64) -> bool {
        if self.errors.iter().all(|e| *e <= 1e-12) {
            return true;
        }
        let decreasing = self.errors.windows(2).all(|w| w[1] < w[0]);
        decreasing && self.fitted_order.is_some_and(|o| o >= min_order)
    }
}

pub fn fitted_slope(hbars: &[f64], errors: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = hbars.iter().zip(errors).filter(|(_, e)| **e > 0.0).map(|(h, e)| (h.ln(), e.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    (den > 0.0).then(|| num / den)
}

pub fn convergence_study(
    p: &DelzantPolytope,
    f: &AlgebraElement,
    g: &AlgebraElement,
    y: &[Rational],
    k: &[i64],
    hbars: &[Rational],
) -> Result<ConvergenceStudy> {
    let lim = numeric_bracket_limit::<f64>(p, f, g, y, k, hbars, LimitOptions::default())?;
    let sym = symbolic_bracket_element(f, g).eval_mode(0.0, &rational_point::<f64>(y), k)?;
    let errors: Vec<f64> = lim.values.iter().map(|v| (v - sym).norm()).collect();
    let hf: Vec<f64> = hbars.iter().map(<f64 as Real>::from_rational).collect();
    let exact = errors.iter().all(|e| *e <= 1e-12);
    Ok(ConvergenceStudy {
        mode: k.to_vec(),
        hbars: hbars.to_vec(),
        fitted_order: if exact { None } else { fitted_slope(&hf, &errors) },
        errors,
        symbolic: sym,
        extrapolated: lim.estimate,
        order: lim.order,
    })
}

/// Modes where the symbolic bracket of `f` and `g` has a coefficient.
pub fn bracket_modes(f: &AlgebraElement, g: &AlgebraElement) -> Vec<Vec<i64>> {
    let modes: Vec<Vec<i64>> = symbolic_bracket_element(f, g).modes().keys().cloned().collect();
    if modes.is_empty() {
        vec![vec![0; f.dim()]]
    } else {
        modes
    }
}

/// Symbolic bracket, action-angle bracket and matrix-commutator limit at one
/// interior point; returns the three values.
pub fn three_oracles(
    p: &DelzantPolytope,
    f: &AlgebraElement,
    g: &AlgebraElement,
    y: &[Rational],
    k: &[i64],
    hbars: &[Rational],
) -> Result<[Complex<f64>; 3]> {
    let yf: Vec<f64> = rational_point(y);
    let sym = symbolic_bracket_element(f, g).eval_mode(0.0, &yf, k)?;
    let cls = crate::classical::poisson_bracket_coefficient(
        &ClassicalFunction::from_element(f),
        &ClassicalFunction::from_element(g),
        &yf,
        k,
    )?;
    let mat = matrix_commutator_limit::<f64>(p, f, g, y, k, hbars, LimitOptions::default())?.estimate;
    Ok([sym, cls, mat])
}
