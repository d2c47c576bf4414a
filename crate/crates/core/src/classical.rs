//! Classical side: functions on `Delta° x T^n` as trigonometric polynomials in
//! the angles, the action-angle Poisson bracket, and the pullback of the
//! ambient symplectic form through the action-angle chart.
//!
//! Orientation: the ambient form is `omega0 = sum_j dy_j ^ dx_j` for
//! `z_j = x_j + i y_j`, the one for which `omega0(xi_X, .) = d<J0, X>` holds
//! with `J0 = lambda + |z|^2 / 2` and `xi` the infinitesimal rotation. In
//! action-angle coordinates it pulls back to `sum_i dtheta_i ^ dy_i`.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Zero;
use rustfft::{FftNum, FftPlanner};

use crate::algebra::AlgebraElement;
use crate::delzant::DelzantSystem;
use crate::error::{Error, MarginViolation, Result};
use crate::polytope::{fmt_point, DelzantPolytope};
use crate::scalar::{rational_point, Real};
use crate::Rational;

/// `F(y, theta) = sum_k c_k(y) e^{i <k, theta>}` with `h`-free coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalFunction {
    modes: AlgebraElement,
}

impl ClassicalFunction {
    /// Restriction of an algebra element to `h = 0`.
    pub fn from_element(f: &AlgebraElement) -> Self {
        ClassicalFunction { modes: f.at_hbar_zero() }
    }

    pub fn modes(&self) -> &AlgebraElement {
        &self.modes
    }

    pub fn dim(&self) -> usize {
        self.modes.dim()
    }

    /// Evaluation without stratum checks, for interior points.
    pub fn eval<F: Real>(&self, y: &[F], theta: &[F]) -> Result<Complex<F>> {
        let mut acc = Complex::zero();
        for k in self.modes.modes().keys() {
            let c = self.modes.eval_mode(F::zero(), y, k)?;
            acc = acc + c * character(k, theta);
        }
        Ok(acc)
    }
}

/// `e^{i <k, theta>}`
pub fn character<F: Real>(k: &[i64], theta: &[F]) -> Complex<F> {
    let phase = k.iter().zip(theta).fold(F::zero(), |acc, (&ki, &t)| acc + F::from_i64_exact(ki) * t);
    Complex::from_polar(F::one(), phase)
}

/// Mode sum at an exact point of `Delta`. Modes not admissible on the
/// stratum of `y` must have vanishing coefficient there.
pub fn synthesize<F: Real>(p: &DelzantPolytope, f: &ClassicalFunction, y: &[Rational], theta: &[F]) -> Result<Complex<F>> {
    if y.len() != p.dim() || theta.len() != p.dim() {
        return Err(Error::Dimension { expected: p.dim(), found: y.len().min(theta.len()) });
    }
    if !p.contains(y) {
        return Err(Error::Domain(format!("point {} is outside the polytope", fmt_point(y))));
    }
    let yf: Vec<F> = rational_point(y);
    let mut acc = Complex::zero();
    for k in f.modes.modes().keys() {
        let c: Complex<F> = f.modes.eval_mode(F::zero(), &yf, k)?;
        if c.is_zero() {
            continue;
        }
        if !p.in_delta_k(y, k) {
            let active = p.active_facets(y).into_iter().filter(|&j| p.facets()[j].pairing(k) != 0).collect();
            return Err(Error::Stratum { mode: k.clone(), active });
        }
        acc = acc + c * character(k, theta);
    }
    Ok(acc)
}

/// Recovers the mode coefficients of `theta -> F(y, theta)` from its values
/// on a uniform grid with `grid` points per angle.
pub fn fourier_roundtrip<F: Real + FftNum>(
    p: &DelzantPolytope,
    f: &ClassicalFunction,
    y: &[Rational],
    grid: usize,
) -> Result<BTreeMap<Vec<i64>, Complex<F>>> {
    if !p.is_interior(y) {
        return Err(Error::Domain(format!("point {} is not interior", fmt_point(y))));
    }
    let max_mode = f.modes.max_mode();
    if (grid as i64) <= 2 * max_mode {
        return Err(Error::Aliasing { grid, max_mode });
    }
    let n = p.dim();
    let total = grid.pow(n as u32);
    let yf: Vec<F> = rational_point(y);
    let step = F::TAU() / F::from_i64_exact(grid as i64);

    let mut data = Vec::with_capacity(total);
    for flat in 0..total {
        let theta: Vec<F> = multi_index(flat, grid, n).iter().map(|&j| step * F::from_i64_exact(j as i64)).collect();
        data.push(f.eval(&yf, &theta)?);
    }

    let fft = FftPlanner::<F>::new().plan_fft_forward(grid);
    // stride of axis a is grid^(n-1-a) in row-major order
    for axis in 0..n {
        let stride = grid.pow((n - 1 - axis) as u32);
        let mut line = vec![Complex::zero(); grid];
        for start in 0..total {
            if !(start / stride).is_multiple_of(grid) {
                continue;
            }
            for (j, v) in line.iter_mut().enumerate() {
                *v = data[start + j * stride];
            }
            fft.process(&mut line);
            for (j, v) in line.iter().enumerate() {
                data[start + j * stride] = *v;
            }
        }
    }

    let norm = F::from_i64_exact(total as i64);
    let mut out = BTreeMap::new();
    for (flat, v) in data.into_iter().enumerate() {
        let k: Vec<i64> = multi_index(flat, grid, n).iter().map(|&j| signed_frequency(j, grid)).collect();
        out.insert(k, v / norm);
    }
    Ok(out)
}

fn multi_index(mut flat: usize, grid: usize, n: usize) -> Vec<usize> {
    let mut idx = vec![0; n];
    for a in (0..n).rev() {
        idx[a] = flat % grid;
        flat /= grid;
    }
    idx
}

fn signed_frequency(j: usize, grid: usize) -> i64 {
    if 2 * j > grid {
        j as i64 - grid as i64
    } else {
        j as i64
    }
}

/// `sum_i (dF/dy_i dG/dtheta_i - dF/dtheta_i dG/dy_i)` at `(y, theta)`;
/// angle derivatives are exact mode multiplications.
pub fn poisson_bracket_aa<F: Real>(f: &ClassicalFunction, g: &ClassicalFunction, y: &[F], theta: &[F]) -> Result<Complex<F>> {
    let n = f.dim();
    let mut acc = Complex::zero();
    for i in 0..n {
        let dy_f = partial_y(f, i, y, theta)?;
        let dy_g = partial_y(g, i, y, theta)?;
        let dt_f = partial_theta(f, i, y, theta)?;
        let dt_g = partial_theta(g, i, y, theta)?;
        acc = acc + dy_f * dt_g - dt_f * dy_g;
    }
    Ok(acc)
}

/// Mode-`k` Fourier coefficient of `theta -> {F, G}_aa(y, theta)`, sampled on
/// a grid fine enough to resolve every mode of the bracket exactly.
pub fn poisson_bracket_coefficient<F: Real>(f: &ClassicalFunction, g: &ClassicalFunction, y: &[F], k: &[i64]) -> Result<Complex<F>> {
    let n = f.dim();
    let reach = f.modes.max_mode() + g.modes.max_mode() + k.iter().map(|x| x.abs()).max().unwrap_or(0);
    let grid = (2 * reach + 1).max(1) as usize;
    let step = F::TAU() / F::from_i64_exact(grid as i64);
    let total = grid.pow(n as u32);
    let mut acc = Complex::zero();
    for flat in 0..total {
        let theta: Vec<F> = multi_index(flat, grid, n).iter().map(|&j| step * F::from_i64_exact(j as i64)).collect();
        let v = poisson_bracket_aa(f, g, y, &theta)?;
        acc = acc + v * character(k, &theta).conj();
    }
    Ok(acc / F::from_i64_exact(total as i64))
}

fn partial_y<F: Real>(f: &ClassicalFunction, i: usize, y: &[F], theta: &[F]) -> Result<Complex<F>> {
    let mut acc = Complex::zero();
    for (k, c) in f.modes.modes() {
        let v = c.d_dy(i).eval(F::zero(), y).map_err(|source| Error::ModeEval { mode: k.clone(), source })?;
        acc = acc + v * character(k, theta);
    }
    Ok(acc)
}

fn partial_theta<F: Real>(f: &ClassicalFunction, i: usize, y: &[F], theta: &[F]) -> Result<Complex<F>> {
    let mut acc = Complex::zero();
    for k in f.modes.modes().keys() {
        if k[i] == 0 {
            continue;
        }
        let c = f.modes.eval_mode(F::zero(), y, k)?;
        acc = acc + c * Complex::new(F::zero(), F::from_i64_exact(k[i])) * character(k, theta);
    }
    Ok(acc)
}

/// `omega0(u, v) = sum_j Im(u_j conj(v_j))`, i.e. `sum_j dy_j ^ dx_j`.
pub fn ambient_omega<F: Real>(u: &[Complex<F>], v: &[Complex<F>]) -> F {
    u.iter().zip(v).fold(F::zero(), |acc, (a, b)| acc + (a * b.conj()).im)
}

/// Tangent vector `(Y, X)` at a point of `Delta° x T^n`: `Y` moves the
/// action coordinates, `X` the angles.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
}

pub const OMEGA_FD_STEP: f64 = 1e-5;
pub const OMEGA_MARGIN: f64 = 1e-2;

/// Largest deviation of `rho^* omega0((Y,X),(Y',X'))` from
/// `<X, Y'> - <Y, X'>` over the given pairs, with `rho(y, s) = s . sigma(y)`
/// differentiated by central differences.
pub fn pullback_omega_check(sys: &DelzantSystem, y: &[Rational], s: &[f64], pairs: &[(Tangent, Tangent)]) -> Result<f64> {
    let n = sys.n();
    if y.len() != n || s.len() != n {
        return Err(Error::Dimension { expected: n, found: y.len().min(s.len()) });
    }
    let slack = sys.polytope().slacks(y).into_iter().min().map(|q| f64::from_rational(&q)).unwrap_or(f64::INFINITY);
    if slack < OMEGA_MARGIN {
        return Err(Error::Margin(MarginViolation {
            point: fmt_point(y),
            hbar: 0.0,
            slack,
            required: OMEGA_MARGIN,
        }));
    }
    let yf: Vec<f64> = rational_point(y);
    let push = |t: &Tangent| -> Result<Vec<Complex<f64>>> {
        let h = OMEGA_FD_STEP;
        let shift = |sign: f64| -> (Vec<f64>, Vec<f64>) {
            (
                yf.iter().zip(&t.y).map(|(a, b)| a + sign * h * b).collect(),
                s.iter().zip(&t.x).map(|(a, b)| a + sign * h * b).collect(),
            )
        };
        let (yp, sp) = shift(1.0);
        let (ym, sm) = shift(-1.0);
        let plus = sys.rho(&yp, &sp)?;
        let minus = sys.rho(&ym, &sm)?;
        Ok(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut worst = 0.0f64;
    for (u, v) in pairs {
        if u.y.len() != n || u.x.len() != n || v.y.len() != n || v.x.len() != n {
            return Err(Error::Dimension { expected: n, found: u.y.len() });
        }
        let measured = ambient_omega(&push(u)?, &push(v)?);
        let expected = dot(&u.x, &v.y) - dot(&u.y, &v.x);
        worst = worst.max((measured - expected).abs());
    }
    Ok(worst)
}
