//! Orbit representations of the `h != 0` fibers.
//!
//! On `l^2` of an orbit, `(pi(f) xi)(u) = sum_k f(h, u, k) xi(u + h k)`, so
//! `pi(f)[u, u + h k] = f(h, u, k)` for every arrow between orbit points.

use nalgebra::{DMatrix, RealField, Schur, SymmetricEigen};
use num_complex::Complex;
use num_traits::{Float, Zero};

use crate::algebra::{
    check_margin, commutator_displacements, involution, limit_from_samples, validate_hbar_list, AlgebraElement,
    BracketLimit, Coefficient, Convolution, GroupoidFunction, LimitOptions,
};
use crate::error::{Error, MarginViolation, Result};
use crate::expr;
use crate::groupoid::{translate, GroupoidPoint, Orbit, DEFAULT_ORBIT_CAP};
use crate::polytope::{fmt_point, fmt_rational, DelzantPolytope};
use crate::scalar::Real;
use crate::Rational;

/// Scalar types usable for dense representation matrices.
pub trait MatrixReal: Real + RealField {}
impl<T: Real + RealField> MatrixReal for T {}

pub type RepMatrix<F> = DMatrix<Complex<F>>;

#[derive(Debug, Clone)]
pub struct OrbitRep {
    orbit: Orbit,
}

impl OrbitRep {
    /// Representation on the full orbit of `y0`.
    pub fn new(p: &DelzantPolytope, hbar: &Rational, y0: &[Rational]) -> Result<Self> {
        Ok(OrbitRep { orbit: Orbit::new(p, hbar, y0, DEFAULT_ORBIT_CAP)? })
    }

    /// Compression to a finite window of an orbit.
    pub fn from_orbit(orbit: Orbit) -> Self {
        OrbitRep { orbit }
    }

    pub fn orbit(&self) -> &Orbit {
        &self.orbit
    }

    pub fn hbar(&self) -> &Rational {
        self.orbit.hbar()
    }

    pub fn dim(&self) -> usize {
        self.orbit.len()
    }
}

fn with_point_context(e: Error, u: &[Rational]) -> Error {
    match e {
        Error::ModeEval { source, .. } | Error::Eval(source) => {
            Error::OrbitEval { point: u.iter().map(fmt_rational).collect(), source }
        }
        other => other,
    }
}

/// Nonzero entries `(row, col, value)` of `pi(f)`.
pub fn represent_sparse<F: Real>(
    p: &DelzantPolytope,
    rep: &OrbitRep,
    f: &impl GroupoidFunction,
) -> Result<Vec<(usize, usize, Complex<F>)>> {
    let support = f.support();
    let h = rep.hbar();
    let mut out = Vec::new();
    for (row, u) in rep.orbit.points().iter().enumerate() {
        for k in &support {
            let target = translate(u, h, k);
            let Some(col) = rep.orbit.index_of(&target) else { continue };
            let g = GroupoidPoint::new(h.clone(), u.clone(), k.clone());
            let v: Complex<F> = f.eval_at(p, &g).map_err(|e| with_point_context(e, u))?;
            if !v.is_zero() {
                out.push((row, col, v));
            }
        }
    }
    Ok(out)
}

/// Dense `pi(f)`.
pub fn represent<F: MatrixReal>(p: &DelzantPolytope, rep: &OrbitRep, f: &impl GroupoidFunction) -> Result<RepMatrix<F>> {
    let d = rep.dim();
    let mut m = DMatrix::from_element(d, d, Complex::zero());
    for (r, c, v) in represent_sparse::<F>(p, rep, f)? {
        m[(r, c)] += v;
    }
    Ok(m)
}

/// Eigenvalues, sorted; real for Hermitian input.
#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum<F> {
    Real(Vec<F>),
    Complex(Vec<Complex<F>>),
}

impl<F: MatrixReal> Spectrum<F> {
    pub fn len(&self) -> usize {
        match self {
            Spectrum::Real(v) => v.len(),
            Spectrum::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<Complex<F>> {
        match self {
            Spectrum::Real(v) => v.iter().map(|&x| Complex::new(x, F::zero())).collect(),
            Spectrum::Complex(v) => v.clone(),
        }
    }
}

pub fn is_hermitian<F: MatrixReal>(m: &RepMatrix<F>, rel_tol: F) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.iter().fold(F::one(), |acc, z| Float::max(acc, z.norm()));
    let d = m.nrows();
    (0..d).all(|i| (0..d).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= rel_tol * scale))
}

/// Dense eigensolver: symmetric path for Hermitian matrices, Schur otherwise.
pub fn spectrum<F: MatrixReal>(m: &RepMatrix<F>) -> Result<Spectrum<F>> {
    if !m.is_square() {
        return Err(Error::Dimension { expected: m.nrows(), found: m.ncols() });
    }
    if m.nrows() == 0 {
        return Ok(Spectrum::Real(Vec::new()));
    }
    if is_hermitian(m, F::eps() * F::from_f64_lossy(64.0)) {
        let eig = SymmetricEigen::try_new(m.clone(), F::eps(), 10_000)
            .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
        let mut v: Vec<F> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        return Ok(Spectrum::Real(v));
    }
    let schur = Schur::try_new(m.clone(), F::eps(), 10_000)
        .ok_or_else(|| Error::Numeric("Schur decomposition did not converge".into()))?;
    let t = schur.unpack().1;
    let mut v: Vec<Complex<F>> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    v.sort_by(|a, b| {
        (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(Spectrum::Complex(v))
}

/// Largest singular value.
pub fn operator_norm<F: MatrixReal>(m: &RepMatrix<F>) -> F {
    if m.is_empty() {
        return F::zero();
    }
    m.singular_values().iter().copied().fold(F::zero(), |a, b| Float::max(a, b))
}

/// `(1/(i h)) [pi(a), pi(b)]` at the entry `(y, y + h k)`, computed on a
/// window of the orbit large enough to contain every intermediate point.
pub fn matrix_commutator_entry<F: MatrixReal>(
    p: &DelzantPolytope,
    a: &AlgebraElement,
    b: &AlgebraElement,
    hbar: &Rational,
    y: &[Rational],
    k: &[i64],
) -> Result<Complex<F>> {
    let radius = k.iter().map(|x| x.abs()).chain([a.max_mode(), b.max_mode()]).max().unwrap_or(0);
    let window = Orbit::window(p, hbar, y, radius)?;
    let rep = OrbitRep::from_orbit(window);
    let target = translate(y, hbar, k);
    let (Some(row), Some(col)) = (rep.orbit.index_of(y), rep.orbit.index_of(&target)) else {
        return Ok(Complex::zero());
    };
    let ma: RepMatrix<F> = represent(p, &rep, a)?;
    let mb: RepMatrix<F> = represent(p, &rep, b)?;
    let entry = (ma.row(row) * mb.column(col))[(0, 0)] - (mb.row(row) * ma.column(col))[(0, 0)];
    Ok(entry / Complex::new(F::zero(), F::from_rational(hbar)))
}

/// `h -> 0` limit of [`matrix_commutator_entry`], extrapolated like the
/// convolution-based limit.
pub fn matrix_commutator_limit<F: MatrixReal>(
    p: &DelzantPolytope,
    a: &AlgebraElement,
    b: &AlgebraElement,
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
        values.push(matrix_commutator_entry::<F>(p, a, b, h, y, k)?);
    }
    Ok(limit_from_samples(hbars, values, opts))
}

/// Height function `x3 = y - 1/2` on the interval.
pub fn sphere_x3() -> AlgebraElement {
    AlgebraElement::monomial(vec![0], Coefficient::real(expr::parse("y1 - 1/2", 1).expect("valid")))
}

/// `x+ = sqrt(y (1 - y)) e_1`
pub fn sphere_x_plus() -> AlgebraElement {
    AlgebraElement::monomial(vec![1], Coefficient::real(expr::parse("sqrt(y1*(1 - y1))", 1).expect("valid")))
}

/// `||pi(x3 x3 + (x+ x- + x- x+)/2) - I/4||` on the orbit of `y0` (default
/// `h/2`) in the interval.
pub fn casimir_defect<F: MatrixReal>(hbar: &Rational, y0: Option<&Rational>) -> Result<F> {
    let p = DelzantPolytope::interval();
    let y0 = y0.cloned().unwrap_or_else(|| hbar / Rational::from_integer(2.into()));
    let rep = OrbitRep::new(&p, hbar, std::slice::from_ref(&y0))?;
    if let Some(u) = rep.orbit.points().iter().find(|u| !p.is_interior(u)) {
        return Err(Error::Margin(MarginViolation {
            point: fmt_point(u),
            hbar: f64::from_rational(hbar),
            slack: 0.0,
            required: 0.0,
        }));
    }
    let x3 = sphere_x3();
    let xp = sphere_x_plus();
    let xm = involution(&xp);
    let c33: RepMatrix<F> = represent(&p, &rep, &Convolution { a: &x3, b: &x3 })?;
    let cpm: RepMatrix<F> = represent(&p, &rep, &Convolution { a: &xp, b: &xm })?;
    let cmp: RepMatrix<F> = represent(&p, &rep, &Convolution { a: &xm, b: &xp })?;
    let half = Complex::new(F::from_f64_lossy(0.5), F::zero());
    let quarter = Complex::new(F::from_f64_lossy(0.25), F::zero());
    let d = rep.dim();
    let defect = c33 + (cpm + cmp) * half - DMatrix::from_diagonal_element(d, d, quarter);
    Ok(operator_norm(&defect))
}

/// One CSV row of a spectrum sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub hbar: Rational,
    pub orbit_size: usize,
    pub index: usize,
    pub re: f64,
    pub im: f64,
}

/// Spectrum of `pi(f)` on the orbit of `y0` for each `h`.
pub fn spectra_rows(
    p: &DelzantPolytope,
    f: &AlgebraElement,
    hbars: &[Rational],
    y0: &dyn Fn(&Rational) -> Vec<Rational>,
) -> Result<Vec<SpectrumRow>> {
    let mut rows = Vec::new();
    for h in hbars {
        let rep = OrbitRep::new(p, h, &y0(h))?;
        let m: RepMatrix<f64> = represent(p, &rep, f)?;
        for (index, v) in spectrum(&m)?.values().into_iter().enumerate() {
            rows.push(SpectrumRow { hbar: h.clone(), orbit_size: rep.dim(), index, re: v.re, im: v.im });
        }
    }
    Ok(rows)
}
