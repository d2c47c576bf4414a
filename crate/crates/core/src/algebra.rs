//! The convolution *-algebra of the groupoid.
//!
//! An [`AlgebraElement`] is a finite sum of modes `k -> c_k(h, y)` whose
//! coefficients are smooth expressions on all of `R x R^n`. On the groupoid
//! every evaluation is masked by arrow membership:
//!
//! ```text
//! (f * g)(h, y, k) = sum_{l + m = k} f(h, y, l) g(h, y + h l, m)
//! f^*(h, y, k)     = conj f(h, y + h k, -k)
//! ```
//!
//! Products and adjoints are available lazily ([`Convolution`], [`Adjoint`])
//! so that nested expressions keep the mask at every factor, and
//! symbolically on the ambient space ([`AlgebraElement::mul_unmasked`],
//! [`involution`]) where the mask is invisible, e.g. near interior points.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, EvalError, MarginViolation, Result};
use crate::expr::{self, Expr};
use crate::groupoid::GroupoidPoint;
use crate::polytope::{fmt_point, DelzantPolytope};
use crate::scalar::{rational_point, Real};
use crate::Rational;

/// A complex coefficient `re + i im` of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub re: Expr,
    pub im: Expr,
}

impl Coefficient {
    pub fn new(re: Expr, im: Expr) -> Self {
        Coefficient { re, im }
    }

    pub fn real(re: Expr) -> Self {
        Coefficient { re, im: Expr::zero() }
    }

    pub fn zero() -> Self {
        Self::real(Expr::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Coefficient { re: self.re.clone(), im: Expr::neg(&self.im) }
    }

    pub fn add(&self, o: &Self) -> Self {
        Coefficient { re: Expr::add(&self.re, &o.re), im: Expr::add(&self.im, &o.im) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Coefficient { re: Expr::sub(&self.re, &o.re), im: Expr::sub(&self.im, &o.im) }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let re = Expr::sub(&Expr::mul(&self.re, &o.re), &Expr::mul(&self.im, &o.im));
        let im = Expr::add(&Expr::mul(&self.re, &o.im), &Expr::mul(&self.im, &o.re));
        Coefficient { re, im }
    }

    /// Multiplication by the exact complex number `a + i b`.
    pub fn scale(&self, a: &Rational, b: &Rational) -> Self {
        self.mul(&Coefficient::new(Expr::constant(a.clone()), Expr::constant(b.clone())))
    }

    /// Multiplication by `1/i = -i`.
    pub fn div_i(&self) -> Self {
        Coefficient { re: self.im.clone(), im: Expr::neg(&self.re) }
    }

    pub fn shift(&self, k: &[i64]) -> Self {
        Coefficient { re: self.re.shift(k), im: self.im.shift(k) }
    }

    pub fn at_hbar_zero(&self) -> Self {
        Coefficient { re: self.re.at_hbar_zero(), im: self.im.at_hbar_zero() }
    }

    pub fn d_dy(&self, i: usize) -> Self {
        Coefficient { re: self.re.d_dy(i), im: self.im.d_dy(i) }
    }

    pub fn eval<F: Real>(&self, hbar: F, y: &[F]) -> Result<Complex<F>, EvalError> {
        let re = self.re.eval(hbar, y)?;
        let im = if self.im.is_zero() { F::zero() } else { self.im.eval(hbar, y)? };
        Ok(Complex::new(re, im))
    }
}

/// A finite mode sum `sum_k c_k(h, y) e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    n: usize,
    modes: BTreeMap<Vec<i64>, Coefficient>,
}

impl AlgebraElement {
    pub fn new(n: usize) -> Self {
        AlgebraElement { n, modes: BTreeMap::new() }
    }

    /// `c e_k`
    pub fn monomial(k: Vec<i64>, c: Coefficient) -> Self {
        let mut e = Self::new(k.len());
        e.add_mode(k, c);
        e
    }

    /// Real coefficient in mode `k`, parsed from `re`.
    pub fn parse_monomial(k: &[i64], re: &str) -> Result<Self> {
        Ok(Self::monomial(k.to_vec(), Coefficient::real(expr::parse(re, k.len())?)))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> &BTreeMap<Vec<i64>, Coefficient> {
        &self.modes
    }

    pub fn coefficient(&self, k: &[i64]) -> Option<&Coefficient> {
        self.modes.get(k)
    }

    /// Adds `c` to the coefficient of mode `k`; identically zero modes are dropped.
    pub fn add_mode(&mut self, k: Vec<i64>, c: Coefficient) {
        assert_eq!(k.len(), self.n, "mode dimension");
        let merged = match self.modes.remove(&k) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !merged.is_zero() {
            self.modes.insert(k, merged);
        }
    }

    pub fn with_mode(mut self, k: Vec<i64>, c: Coefficient) -> Self {
        self.add_mode(k, c);
        self
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.modes {
            out.add_mode(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Rational::one(), &Rational::zero()))
    }

    /// Multiplication by the exact complex number `a + i b`.
    pub fn scale(&self, a: &Rational, b: &Rational) -> Self {
        let mut out = Self::new(self.n);
        for (k, c) in &self.modes {
            out.add_mode(k.clone(), c.scale(a, b));
        }
        out
    }

    /// Largest `|k_i|` over all modes.
    pub fn max_mode(&self) -> i64 {
        self.modes.keys().flat_map(|k| k.iter().map(|x| x.abs())).max().unwrap_or(0)
    }

    /// Convolution on the ambient groupoid `R x R^n x Z^n` (no mask).
    pub fn mul_unmasked(&self, o: &Self) -> Self {
        let mut out = Self::new(self.n);
        for (l, a) in &self.modes {
            for (m, b) in &o.modes {
                let k = l.iter().zip(m).map(|(x, y)| x + y).collect();
                out.add_mode(k, a.mul(&b.shift(l)));
            }
        }
        out
    }

    /// All coefficients with `h` set to zero.
    pub fn at_hbar_zero(&self) -> Self {
        let mut out = Self::new(self.n);
        for (k, c) in &self.modes {
            out.add_mode(k.clone(), c.at_hbar_zero());
        }
        out
    }

    /// Unmasked coefficient of mode `k` at a floating point `(h, y)`.
    pub fn eval_mode<F: Real>(&self, hbar: F, y: &[F], k: &[i64]) -> Result<Complex<F>> {
        match self.modes.get(k) {
            None => Ok(Complex::zero()),
            Some(c) => c.eval(hbar, y).map_err(|source| Error::ModeEval { mode: k.to_vec(), source }),
        }
    }

    pub fn to_json(&self) -> ObservableJson {
        ObservableJson {
            modes: self
                .modes
                .iter()
                .map(|(k, c)| ModeJson {
                    k: k.clone(),
                    re: c.re.to_string(),
                    im: (!c.im.is_zero()).then(|| c.im.to_string()),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &ObservableJson, n: usize) -> Result<Self> {
        let mut out = Self::new(n);
        let mut seen = BTreeSet::new();
        for m in &j.modes {
            if m.k.len() != n {
                return Err(Error::Dimension { expected: n, found: m.k.len() });
            }
            if !seen.insert(m.k.clone()) {
                return Err(Error::Schema(format!("mode {:?} listed twice", m.k)));
            }
            let re = expr::parse(&m.re, n)?;
            let im = match &m.im {
                Some(s) => expr::parse(s, n)?,
                None => Expr::zero(),
            };
            out.add_mode(m.k.clone(), Coefficient::new(re, im));
        }
        Ok(out)
    }

    pub fn from_json_str(s: &str, n: usize) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?, n)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("observable serializes")
    }
}

/// Observable file format: `{"modes":[{"k":[..],"re":"expr","im":"expr"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableJson {
    pub modes: Vec<ModeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeJson {
    pub k: Vec<i64>,
    pub re: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<String>,
}

/// Symbolic adjoint: `f^*` has mode `-k` coefficient `conj c_k(h, y - h k)`.
pub fn involution(f: &AlgebraElement) -> AlgebraElement {
    let mut out = AlgebraElement::new(f.n);
    for (k, c) in &f.modes {
        let neg: Vec<i64> = k.iter().map(|x| -x).collect();
        out.add_mode(neg.clone(), c.shift(&neg).conj());
    }
    out
}

/// A function on the groupoid evaluated with the membership mask.
pub trait GroupoidFunction {
    fn dim(&self) -> usize;

    /// Modes outside this set evaluate to zero.
    fn support(&self) -> BTreeSet<Vec<i64>>;

    /// Value at an exact arrow; zero off the groupoid.
    fn eval_at<F: Real>(&self, p: &DelzantPolytope, g: &GroupoidPoint) -> Result<Complex<F>>;
}

impl GroupoidFunction for AlgebraElement {
    fn dim(&self) -> usize {
        self.n
    }

    fn support(&self) -> BTreeSet<Vec<i64>> {
        self.modes.keys().cloned().collect()
    }

    fn eval_at<F: Real>(&self, p: &DelzantPolytope, g: &GroupoidPoint) -> Result<Complex<F>> {
        let Some(c) = self.modes.get(&g.k) else { return Ok(Complex::zero()) };
        if !g.is_member(p) {
            return Ok(Complex::zero());
        }
        let y: Vec<F> = rational_point(&g.y);
        c.eval(F::from_rational(&g.hbar), &y).map_err(|source| Error::ModeEval { mode: g.k.clone(), source })
    }
}

impl<T: GroupoidFunction> GroupoidFunction for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn support(&self) -> BTreeSet<Vec<i64>> {
        (**self).support()
    }

    fn eval_at<F: Real>(&self, p: &DelzantPolytope, g: &GroupoidPoint) -> Result<Complex<F>> {
        (**self).eval_at(p, g)
    }
}

/// Lazy product `a * b`.
#[derive(Debug, Clone, Copy)]
pub struct Convolution<A, B> {
    pub a: A,
    pub b: B,
}

impl<A: GroupoidFunction, B: GroupoidFunction> GroupoidFunction for Convolution<A, B> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn support(&self) -> BTreeSet<Vec<i64>> {
        let sb = self.b.support();
        let mut out = BTreeSet::new();
        for l in self.a.support() {
            for m in &sb {
                out.insert(l.iter().zip(m).map(|(x, y)| x + y).collect());
            }
        }
        out
    }

    fn eval_at<F: Real>(&self, p: &DelzantPolytope, g: &GroupoidPoint) -> Result<Complex<F>> {
        if !g.is_member(p) {
            return Ok(Complex::zero());
        }
        let sb = self.b.support();
        let mut acc = Complex::zero();
        for l in self.a.support() {
            let m: Vec<i64> = g.k.iter().zip(&l).map(|(k, l)| k - l).collect();
            if !sb.contains(&m) {
                continue;
            }
            let first = GroupoidPoint::new(g.hbar.clone(), g.y.clone(), l.clone());
            if !first.is_member(p) {
                continue;
            }
            let second = GroupoidPoint::new(g.hbar.clone(), first.target(), m);
            if !second.is_member(p) {
                continue;
            }
            let va: Complex<F> = self.a.eval_at(p, &first)?;
            if va.is_zero() {
                continue;
            }
            acc = acc + va * self.b.eval_at(p, &second)?;
        }
        Ok(acc)
    }
}

/// Lazy adjoint `a^*`.
#[derive(Debug, Clone, Copy)]
pub struct Adjoint<A> {
    pub a: A,
}

impl<A: GroupoidFunction> GroupoidFunction for Adjoint<A> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn support(&self) -> BTreeSet<Vec<i64>> {
        self.a.support().into_iter().map(|k| k.iter().map(|x| -x).collect()).collect()
    }

    fn eval_at<F: Real>(&self, p: &DelzantPolytope, g: &GroupoidPoint) -> Result<Complex<F>> {
        if !g.is_member(p) {
            return Ok(Complex::zero());
        }
        let inv = GroupoidPoint::new(g.hbar.clone(), g.target(), g.k.iter().map(|x| -x).collect());
        Ok(self.a.eval_at::<F>(p, &inv)?.conj())
    }
}

/// `(a * b)(h, y, k)` with the membership mask on every factor.
pub fn convolve<F: Real>(
    p: &DelzantPolytope,
    a: &impl GroupoidFunction,
    b: &impl GroupoidFunction,
    g: &GroupoidPoint,
) -> Result<Complex<F>> {
    Convolution { a, b }.eval_at(p, g)
}

/// `(a * b - b * a)(h, y, k) / (i h)`; requires `h != 0`.
pub fn renormalized_commutator<F: Real>(
    p: &DelzantPolytope,
    a: &impl GroupoidFunction,
    b: &impl GroupoidFunction,
    g: &GroupoidPoint,
) -> Result<Complex<F>> {
    if g.hbar.is_zero() {
        return Err(Error::Domain("renormalized commutator needs hbar != 0; use the symbolic bracket".into()));
    }
    let ab: Complex<F> = convolve(p, a, b, g)?;
    let ba: Complex<F> = convolve(p, b, a, g)?;
    Ok((ab - ba) / Complex::new(F::zero(), F::from_rational(&g.hbar)))
}

/// Checks that every translate `y + h d` keeps the uniform interior margin
/// `|h| max_j |<d, X_j>| < min_j slack_j(y)`.
pub fn check_margin(
    p: &DelzantPolytope,
    y: &[Rational],
    hbar: &Rational,
    displacements: &BTreeSet<Vec<i64>>,
) -> Result<()> {
    let min_slack = p.slacks(y).into_iter().min().unwrap_or_else(Rational::zero);
    for d in displacements {
        let reach = p
            .facets()
            .iter()
            .map(|f| Rational::from_integer(f.pairing(d).abs().into()) * num_traits::Signed::abs(hbar))
            .max()
            .unwrap_or_else(Rational::zero);
        if reach >= min_slack {
            return Err(Error::Margin(MarginViolation {
                point: fmt_point(y),
                hbar: f64::from_rational(hbar),
                slack: f64::from_rational(&min_slack),
                required: f64::from_rational(&reach),
            }));
        }
    }
    Ok(())
}

/// Every displacement used while evaluating `[a, b]` at mode `k`.
pub fn commutator_displacements(
    a: &impl GroupoidFunction,
    b: &impl GroupoidFunction,
    k: &[i64],
) -> BTreeSet<Vec<i64>> {
    let mut out: BTreeSet<Vec<i64>> = a.support();
    out.extend(b.support());
    out.insert(k.to_vec());
    out
}

/// Convergence order reported by [`numeric_bracket_limit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    /// Successive values agree to 1e-12: the sequence is already at its limit.
    Exact,
    Estimated(f64),
    /// Fewer than three samples.
    Unknown,
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::Exact => write!(f, "exact"),
            Order::Estimated(x) => write!(f, "{x:.4}"),
            Order::Unknown => write!(f, "unknown"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LimitOptions {
    /// Number of Richardson columns; 1 returns the smallest-h value, 2 is a
    /// single first-order elimination, `usize::MAX` uses the full tableau.
    pub levels: usize,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions { levels: usize::MAX }
    }
}

#[derive(Debug, Clone)]
pub struct BracketLimit<F> {
    pub estimate: Complex<F>,
    pub order: Order,
    pub hbars: Vec<Rational>,
    pub values: Vec<Complex<F>>,
    /// `tableau[i][j]`: extrapolation of order `j` ending at sample `i`.
    pub tableau: Vec<Vec<Complex<F>>>,
    /// Per-step order estimates from successive differences.
    pub step_orders: Vec<Option<f64>>,
}

/// Polynomial (Neville) extrapolation to `h = 0`.
pub fn richardson<F: Real>(hbars: &[F], values: &[Complex<F>], levels: usize) -> Vec<Vec<Complex<F>>> {
    let mut t: Vec<Vec<Complex<F>>> = Vec::with_capacity(values.len());
    for i in 0..values.len() {
        let mut row = vec![values[i]];
        for j in 1..=i.min(levels.saturating_sub(1)) {
            let w = hbars[i] / (hbars[i - j] - hbars[i]);
            let prev = row[j - 1];
            row.push(prev + (prev - t[i - 1][j - 1]) * w);
        }
        t.push(row);
    }
    t
}

/// `log(d_{i-1} / d_i) / log(h_{i-1} / h_i)` for successive differences `d`.
pub fn step_orders<F: Real>(hbars: &[F], values: &[Complex<F>]) -> Vec<Option<f64>> {
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).norm().to_f64_lossy()).collect();
    (1..diffs.len())
        .map(|i| {
            let (a, b) = (diffs[i - 1], diffs[i]);
            let ratio = (hbars[i].to_f64_lossy() / hbars[i + 1].to_f64_lossy()).abs();
            (a > 0.0 && b > 0.0).then(|| (a / b).ln() / ratio.ln())
        })
        .collect()
}

/// Richardson-extrapolated `h -> 0` limit of the renormalized commutator at
/// `(y, k)` over a positive strictly decreasing list of `h`.
pub fn numeric_bracket_limit<F: Real>(
    p: &DelzantPolytope,
    a: &impl GroupoidFunction,
    b: &impl GroupoidFunction,
    y: &[Rational],
    k: &[i64],
    hbars: &[Rational],
    opts: LimitOptions,
) -> Result<BracketLimit<F>> {
    validate_hbar_list(hbars)?;
    let disp = commutator_displacements(a, b, k);
    let mut values = Vec::with_capacity(hbars.len());
    for h in hbars {
        check_margin(p, y, h, &disp)?;
        let g = GroupoidPoint::new(h.clone(), y.to_vec(), k.to_vec());
        values.push(renormalized_commutator::<F>(p, a, b, &g)?);
    }
    Ok(limit_from_samples(hbars, values, opts))
}

/// Nonempty, positive and strictly decreasing.
pub fn validate_hbar_list(hbars: &[Rational]) -> Result<()> {
    if hbars.is_empty() {
        return Err(Error::Domain("empty hbar list".into()));
    }
    if hbars.iter().any(|h| *h <= Rational::zero()) {
        return Err(Error::Domain("hbar values must be positive".into()));
    }
    if hbars.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("hbar values must be strictly decreasing".into()));
    }
    Ok(())
}

/// Extrapolates samples `values[i]` taken at `hbars[i]` to `h = 0`.
pub fn limit_from_samples<F: Real>(hbars: &[Rational], values: Vec<Complex<F>>, opts: LimitOptions) -> BracketLimit<F> {
    let hf: Vec<F> = hbars.iter().map(F::from_rational).collect();
    let tableau = richardson(&hf, &values, opts.levels.max(1));
    let estimate = *tableau.last().and_then(|r| r.last()).expect("nonempty");
    let scale = values.iter().map(|v| v.norm().to_f64_lossy()).fold(1.0, f64::max);
    let exact = values.windows(2).all(|w| (w[1] - w[0]).norm().to_f64_lossy() <= 1e-12 * scale);
    let steps = step_orders(&hf, &values);
    let order = if values.len() >= 2 && exact {
        Order::Exact
    } else {
        steps.last().copied().flatten().map_or(Order::Unknown, Order::Estimated)
    };
    BracketLimit { estimate, order, hbars: hbars.to_vec(), values, tableau, step_orders: steps }
}

/// The classical bracket as an element with `h`-free coefficients:
/// `{a, b}_k = (1/i) sum_{l+m=k} sum_i (l_i a_l d_i b_m - m_i b_m d_i a_l)`
/// with everything taken at `h = 0`.
pub fn symbolic_bracket_element(a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
    let n = a.n;
    let a0 = a.at_hbar_zero();
    let b0 = b.at_hbar_zero();
    let mut out = AlgebraElement::new(n);
    for (l, fa) in &a0.modes {
        for (m, fb) in &b0.modes {
            let mut term = Coefficient::zero();
            for i in 0..n {
                if l[i] != 0 {
                    let c = fa.mul(&fb.d_dy(i)).scale(&Rational::from_integer(l[i].into()), &Rational::zero());
                    term = term.add(&c);
                }
                if m[i] != 0 {
                    let c = fb.mul(&fa.d_dy(i)).scale(&Rational::from_integer(m[i].into()), &Rational::zero());
                    term = term.sub(&c);
                }
            }
            let k = l.iter().zip(m).map(|(x, y)| x + y).collect();
            out.add_mode(k, term.div_i());
        }
    }
    out
}

/// Value of the classical bracket at `(0, y, k)`.
pub fn symbolic_bracket<F: Real>(a: &AlgebraElement, b: &AlgebraElement, y: &[F], k: &[i64]) -> Result<Complex<F>> {
    symbolic_bracket_element(a, b).eval_mode(F::zero(), y, k)
}

/// Human-readable location for error messages.
pub fn describe_point(hbar: &Rational, y: &[Rational], k: &[i64]) -> String {
    format!("(hbar={}, y={}, k={:?})", crate::polytope::fmt_rational(hbar), fmt_point(y), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn interval() -> DelzantPolytope {
        DelzantPolytope::interval()
    }

    fn pt(h: Rational, y: Vec<Rational>, k: Vec<i64>) -> GroupoidPoint {
        GroupoidPoint::new(h, y, k)
    }

    fn canonical_pair() -> (AlgebraElement, AlgebraElement) {
        (
            AlgebraElement::parse_monomial(&[1], "y1").unwrap(),
            AlgebraElement::parse_monomial(&[-1], "y1").unwrap(),
        )
    }

    #[test]
    fn convolution_examples() {
        let p = interval();
        let (f, g) = canonical_pair();
        let (h, y) = (rat(1, 8), rat(3, 10));
        let v: Complex<f64> = convolve(&p, &f, &g, &pt(h.clone(), vec![y.clone()], vec![0])).unwrap();
        assert!((v.re - 0.3 * (0.3 + 0.125)).abs() < 1e-15 && v.im == 0.0);

        let one = AlgebraElement::parse_monomial(&[0], "1").unwrap();
        let s = AlgebraElement::parse_monomial(&[1], "sin(y1) + h").unwrap();
        let g1 = pt(h.clone(), vec![y.clone()], vec![1]);
        let lhs: Complex<f64> = convolve(&p, &one, &s, &g1).unwrap();
        let rhs: Complex<f64> = s.eval_at(&p, &g1).unwrap();
        assert_eq!(lhs, rhs);

        let e1 = AlgebraElement::parse_monomial(&[1], "1").unwrap();
        let sq = Convolution { a: &e1, b: &e1 };
        assert_eq!(sq.support(), BTreeSet::from([vec![2]]));
        assert_eq!(e1.mul_unmasked(&e1).modes().keys().collect::<Vec<_>>(), vec![&vec![2]]);
    }

    #[test]
    fn mask_drops_factorizations_leaving_the_polytope() {
        let p = interval();
        let (f, g) = canonical_pair();
        // y + h = 1 lands on the facet, where mode -1 is not admissible.
        let at = pt(rat(1, 4), vec![rat(3, 4)], vec![0]);
        let v: Complex<f64> = convolve(&p, &f, &g, &at).unwrap();
        assert_eq!(v, Complex::zero());
        let w: Complex<f64> = convolve(&p, &g, &f, &at).unwrap();
        assert!((w.re - 0.75 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn involution_examples() {
        let a = AlgebraElement::monomial(vec![0], Coefficient::new(expr::parse("y1^2", 1).unwrap(), expr::parse("y1", 1).unwrap()));
        let astar = involution(&a);
        assert_eq!(astar.coefficient(&[0]).unwrap(), &a.coefficient(&[0]).unwrap().conj());

        let f = AlgebraElement::parse_monomial(&[1], "y1").unwrap();
        let fs = involution(&f);
        let c = fs.coefficient(&[-1]).unwrap();
        for (h, y) in [(0.25f64, 0.5f64), (0.1, 0.9)] {
            assert!((c.eval(h, &[y]).unwrap().re - (y - h)).abs() < 1e-15);
        }
        let fss = involution(&fs);
        for (h, y) in [(0.25f64, 0.5f64), (-0.3, 1.7)] {
            let a = fss.eval_mode(h, &[y], &[1]).unwrap();
            let b = f.eval_mode(h, &[y], &[1]).unwrap();
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn lazy_adjoint_matches_symbolic_adjoint_on_the_groupoid() {
        let p = interval();
        let f = AlgebraElement::new(1)
            .with_mode(vec![1], Coefficient::new(expr::parse("y1*h + 1", 1).unwrap(), expr::parse("y1^2", 1).unwrap()))
            .with_mode(vec![-2], Coefficient::real(expr::parse("cos(y1)", 1).unwrap()));
        let sym = involution(&f);
        for k in -3..=3 {
            for (h, y) in [(rat(1, 8), rat(3, 8)), (rat(1, 4), rat(1, 2)), (rat(1, 4), rat(0, 1))] {
                let g = pt(h, vec![y], vec![k]);
                let lazy: Complex<f64> = Adjoint { a: &f }.eval_at(&p, &g).unwrap();
                let direct: Complex<f64> = sym.eval_at(&p, &g).unwrap();
                assert!((lazy - direct).norm() < 1e-14, "{k} {g:?}");
            }
        }
    }

    #[test]
    fn canonical_commutator_is_exact() {
        let p = interval();
        let (f, g) = canonical_pair();
        let y = rat(2, 5);
        for e in 2..=10 {
            let h = rat(1, 1 << e);
            let v: Complex<f64> = renormalized_commutator(&p, &f, &g, &pt(h, vec![y.clone()], vec![0])).unwrap();
            assert!((v - Complex::new(0.0, -0.8)).norm() < 1e-12, "{v}");
        }
        let s: Complex<f64> = symbolic_bracket(&f, &g, &[0.4], &[0]).unwrap();
        assert!((s - Complex::new(0.0, -0.8)).norm() < 1e-15);
        let lim = numeric_bracket_limit::<f64>(&p, &f, &g, &[y], &[0], &hbar_list(4, 10), LimitOptions::default()).unwrap();
        assert_eq!(lim.order, Order::Exact);
        assert!((lim.estimate - s).norm() < 1e-12);
    }

    #[test]
    fn commutator_rejects_zero_hbar_and_vanishes_on_mode_zero() {
        let p = interval();
        let (f, g) = canonical_pair();
        assert!(renormalized_commutator::<f64>(&p, &f, &g, &pt(rat(0, 1), vec![rat(1, 2)], vec![0])).is_err());
        let a = AlgebraElement::parse_monomial(&[0], "y1^2").unwrap();
        let b = AlgebraElement::parse_monomial(&[0], "sin(y1) + h").unwrap();
        let v: Complex<f64> = renormalized_commutator(&p, &a, &b, &pt(rat(1, 16), vec![rat(1, 3)], vec![0])).unwrap();
        assert_eq!(v, Complex::zero());
        let w: Complex<f64> = renormalized_commutator(&p, &f, &f, &pt(rat(1, 16), vec![rat(1, 3)], vec![1])).unwrap();
        assert_eq!(w, Complex::zero());
        let s: Complex<f64> = symbolic_bracket(&a, &b, &[0.3], &[0]).unwrap();
        assert_eq!(s, Complex::zero());
    }

    fn hbar_list(from: u32, to: u32) -> Vec<Rational> {
        (from..=to).map(|e| rat(1, 1 << e)).collect()
    }

    #[test]
    fn sine_pair_limit_matches_symbolic() {
        let p = interval();
        let f = AlgebraElement::parse_monomial(&[1], "sin(y1)").unwrap();
        let g = AlgebraElement::parse_monomial(&[-1], "1").unwrap();
        let y = rat(2, 5);
        let lim = numeric_bracket_limit::<f64>(&p, &f, &g, &[y], &[0], &hbar_list(4, 10), LimitOptions::default()).unwrap();
        let s: Complex<f64> = symbolic_bracket(&f, &g, &[0.4], &[0]).unwrap();
        assert!((lim.estimate - s).norm() < 1e-8, "{} vs {}", lim.estimate, s);
        match lim.order {
            Order::Estimated(o) => assert!((o - 1.0).abs() < 0.1, "{o}"),
            other => panic!("{other:?}"),
        }
        let two = numeric_bracket_limit::<f64>(&p, &f, &g, &[rat(2, 5)], &[0], &hbar_list(4, 10), LimitOptions { levels: 2 }).unwrap();
        assert!((two.estimate - s).norm() < 1e-5);
    }

    #[test]
    fn margin_guard_names_the_point() {
        let p = interval();
        let (f, g) = canonical_pair();
        let err = numeric_bracket_limit::<f64>(&p, &f, &g, &[rat(1, 100)], &[0], &hbar_list(4, 6), LimitOptions::default())
            .unwrap_err();
        match err {
            Error::Margin(m) => assert_eq!(m.point, "(1/100)"),
            other => panic!("{other}"),
        }
        assert!(numeric_bracket_limit::<f64>(&p, &f, &g, &[rat(1, 2)], &[0], &[rat(1, 8), rat(1, 4)], LimitOptions::default()).is_err());
    }

    #[test]
    fn bracket_is_bilinear() {
        let f = AlgebraElement::parse_monomial(&[1], "y1^2").unwrap();
        let g = AlgebraElement::parse_monomial(&[-2], "cos(y1)").unwrap();
        let q = AlgebraElement::parse_monomial(&[1], "exp(y1)").unwrap();
        let alpha = (rat(3, 2), rat(-1, 3));
        let combo = f.scale(&alpha.0, &alpha.1).add(&g);
        let y = [0.37];
        for k in -3..=3 {
            let lhs: Complex<f64> = symbolic_bracket(&combo, &q, &y, &[k]).unwrap();
            let a: Complex<f64> = symbolic_bracket(&f, &q, &y, &[k]).unwrap();
            let b: Complex<f64> = symbolic_bracket(&g, &q, &y, &[k]).unwrap();
            let rhs = a * Complex::new(1.5, -1.0 / 3.0) + b;
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn observable_json_roundtrip() {
        let text = r#"{"modes":[{"k":[1,0],"re":"y1*y2","im":"h"},{"k":[0,-1],"re":"sqrt(y2)"}]}"#;
        let e = AlgebraElement::from_json_str(text, 2).unwrap();
        assert_eq!(e.modes().len(), 2);
        let back = AlgebraElement::from_json_str(&e.to_json_string(), 2).unwrap();
        assert_eq!(back, e);
        assert!(AlgebraElement::from_json_str(r#"{"modes":[{"k":[1],"re":"y1"}]}"#, 2).is_err());
        assert!(AlgebraElement::from_json_str(r#"{"modes":[{"k":[1],"re":"y1"},{"k":[1],"re":"1"}]}"#, 1).is_err());
        assert!(AlgebraElement::from_json_str(r#"{"modes":[{"k":[1],"re":"y1 +"}]}"#, 1).is_err());
    }

    #[test]
    fn richardson_recovers_polynomial_limits() {
        let hs: Vec<f64> = (1..=5).map(|e| 0.5f64.powi(e)).collect();
        let vals: Vec<Complex<f64>> = hs.iter().map(|&h| Complex::new(2.0 + 3.0 * h - h * h + 0.5 * h * h * h, h)).collect();
        let t = richardson(&hs, &vals, usize::MAX);
        assert!((t[4][4] - Complex::new(2.0, 0.0)).norm() < 1e-12);
        let orders = step_orders(&hs, &vals);
        assert!(orders.iter().all(|o| o.unwrap() > 0.7));
    }

    mod laws {
        use super::*;
        use crate::sample::{self, ElementShape};
        use crate::scalar::relative_gap;
        use proptest::prelude::*;

        fn polytope(i: u8) -> DelzantPolytope {
            match i % 3 {
                0 => DelzantPolytope::interval(),
                1 => DelzantPolytope::square(),
                _ => DelzantPolytope::simplex(2).unwrap(),
            }
        }

        fn elements(seed: u64, n: usize, count: usize) -> (sample::SampleRng, Vec<AlgebraElement>) {
            let mut r = sample::rng(seed);
            let v = (0..count).map(|_| sample::element(&mut r, n, ElementShape::default())).collect();
            (r, v)
        }

        fn interior_f64(r: &mut sample::SampleRng, p: &DelzantPolytope) -> Vec<f64> {
            rational_point(&sample::interior_point(r, p))
        }

        fn assert_all_modes(lhs: &AlgebraElement, rhs: &AlgebraElement, y: &[f64], tol: f64) -> std::result::Result<(), TestCaseError> {
            let keys: BTreeSet<_> = lhs.modes().keys().chain(rhs.modes().keys()).cloned().collect();
            for k in keys {
                let a = lhs.eval_mode(0.0, y, &k).unwrap();
                let b = rhs.eval_mode(0.0, y, &k).unwrap();
                prop_assert!(relative_gap(a, b) <= tol, "mode {:?}: {} vs {}", k, a, b);
            }
            Ok(())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(96))]

            #[test]
            fn associativity(seed in any::<u64>(), which in any::<u8>()) {
                let p = polytope(which);
                let (mut r, e) = elements(seed, p.dim(), 3);
                let g = sample::arrow(&mut r, &p, 4);
                let left: Complex<f64> = Convolution { a: Convolution { a: &e[0], b: &e[1] }, b: &e[2] }.eval_at(&p, &g).unwrap();
                let right: Complex<f64> = Convolution { a: &e[0], b: Convolution { a: &e[1], b: &e[2] } }.eval_at(&p, &g).unwrap();
                prop_assert!(relative_gap(left, right) <= 1e-12, "{} vs {} at {:?}", left, right, g);
            }

            #[test]
            fn involution_is_an_antihomomorphism(seed in any::<u64>(), which in any::<u8>()) {
                let p = polytope(which);
                let (mut r, e) = elements(seed, p.dim(), 2);
                let g = sample::arrow(&mut r, &p, 4);
                let left: Complex<f64> = Adjoint { a: Convolution { a: &e[0], b: &e[1] } }.eval_at(&p, &g).unwrap();
                let right: Complex<f64> = Convolution { a: Adjoint { a: &e[1] }, b: Adjoint { a: &e[0] } }.eval_at(&p, &g).unwrap();
                prop_assert!(relative_gap(left, right) <= 1e-12);
                let twice: Complex<f64> = Adjoint { a: Adjoint { a: &e[0] } }.eval_at(&p, &g).unwrap();
                let once: Complex<f64> = e[0].eval_at(&p, &g).unwrap();
                prop_assert!(relative_gap(twice, once) <= 1e-12);
            }

            #[test]
            fn unmasked_product_agrees_away_from_the_boundary(seed in any::<u64>(), which in any::<u8>()) {
                let p = polytope(which);
                let (mut r, e) = elements(seed, p.dim(), 2);
                let y = sample::interior_point_with_margin(&mut r, &p, &rat(1, 5));
                let h = rat(1, 64);
                let prod = e[0].mul_unmasked(&e[1]);
                for k in prod.modes().keys() {
                    let g = GroupoidPoint::new(h.clone(), y.clone(), k.clone());
                    let lazy: Complex<f64> = convolve(&p, &e[0], &e[1], &g).unwrap();
                    let sym: Complex<f64> = prod.eval_at(&p, &g).unwrap();
                    prop_assert!(relative_gap(lazy, sym) <= 1e-12);
                }
            }

            #[test]
            fn bracket_antisymmetry_and_leibniz(seed in any::<u64>(), which in any::<u8>()) {
                let p = polytope(which);
                let (mut r, e) = elements(seed, p.dim(), 3);
                let y = interior_f64(&mut r, &p);
                let fg = symbolic_bracket_element(&e[0], &e[1]);
                let gf = symbolic_bracket_element(&e[1], &e[0]).scale(&-Rational::one(), &Rational::zero());
                assert_all_modes(&fg, &gf, &y, 1e-10)?;

                let gh = e[1].mul_unmasked(&e[2]).at_hbar_zero();
                let lhs = symbolic_bracket_element(&e[0], &gh);
                let h0 = e[2].at_hbar_zero();
                let g0 = e[1].at_hbar_zero();
                let rhs = fg.mul_unmasked(&h0).add(&g0.mul_unmasked(&symbolic_bracket_element(&e[0], &e[2]))).at_hbar_zero();
                assert_all_modes(&lhs, &rhs, &y, 1e-10)?;
            }

            #[test]
            fn jacobi(seed in any::<u64>(), which in any::<u8>()) {
                let p = polytope(which);
                let (mut r, e) = elements(seed, p.dim(), 3);
                let y = interior_f64(&mut r, &p);
                let cyc = |a: &AlgebraElement, b: &AlgebraElement, c: &AlgebraElement| {
                    symbolic_bracket_element(a, &symbolic_bracket_element(b, c))
                };
                let sum = cyc(&e[0], &e[1], &e[2]).add(&cyc(&e[1], &e[2], &e[0])).add(&cyc(&e[2], &e[0], &e[1]));
                let scale = cyc(&e[0], &e[1], &e[2]);
                for k in sum.modes().keys() {
                    let v = sum.eval_mode(0.0, &y, k).unwrap();
                    let s = scale.eval_mode(0.0, &y, k).unwrap().norm().max(1.0);
                    prop_assert!(v.norm() <= 1e-8 * s, "mode {:?}: {}", k, v);
                }
            }
        }
    }
}
