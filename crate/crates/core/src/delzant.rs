//! Explicit Delzant construction on representatives in `C^{n0}`.
//!
//! `A` (n x n0) has the facet normals as columns, `B` (n0 x d) is a basis of
//! its integer kernel, so `0 -> Z^d -B-> Z^{n0} -A-> Z^n -> 0` is exact.
//! The ambient moment map is `J0(z) = lambda + |z|^2 / 2`, the reduced one is
//! `Jd = B^T J0`, and `sigma(y)` is the real nonnegative point of `Jd^{-1}(0)`
//! lying over `y`.

use num_complex::Complex;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::intlat::{self, IntMatrix};
use crate::polytope::{fmt_point, DelzantPolytope};
use crate::scalar::Real;
use crate::Rational;

/// Which closed form to use for the section `sigma0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SectionFormula {
    /// `z_j = sqrt(2 (w_j - lambda_j))`, the form with `J0(sigma0(w)) = w`.
    #[default]
    Repaired,
    /// `z_j = sqrt(2 w_j - lambda_j)`, kept for comparison.
    Literal,
}

#[derive(Debug, Clone)]
pub struct DelzantSystem {
    polytope: DelzantPolytope,
    a: IntMatrix,
    b: IntMatrix,
    lambda: Vec<Rational>,
    /// `R` (n0 x n) with `A R = I`.
    splitting: IntMatrix,
}

/// Assembles `A`, `B`, `lambda` and a splitting of `A` from a Delzant polytope.
pub fn build_system(p: &DelzantPolytope) -> Result<DelzantSystem> {
    let report = p.check_delzant();
    if !report.passed() {
        let first = report.violations.first().map(|v| v.to_string()).unwrap_or_default();
        return Err(Error::Construction(format!("polytope is not Delzant: {first}")));
    }
    let a = p.normal_matrix();
    let (n, n0) = (a.rows(), a.cols());
    let snf = intlat::smith_normal_form(&a);
    let factors = snf.invariant_factors();
    if factors.len() != n || factors.iter().any(|x| !x.abs().is_one()) {
        return Err(Error::Construction(format!(
            "normal matrix is not surjective over Z (invariant factors {:?})",
            factors.iter().map(|x| x.to_string()).collect::<Vec<_>>()
        )));
    }
    let kernel = intlat::integer_kernel_basis(&a);
    let b = if kernel.cols() == 0 {
        kernel
    } else {
        intlat::row_hermite_form(&kernel.transpose()).transpose()
    };
    // U A V = [I | 0]  =>  R = V[:, ..n] U
    let mut v_head = IntMatrix::zeros(n0, n);
    for i in 0..n0 {
        for j in 0..n {
            v_head.set(i, j, snf.v.get(i, j).clone());
        }
    }
    let splitting = v_head.mul(&snf.u)?;
    debug_assert_eq!(a.mul(&splitting)?, IntMatrix::identity(n));
    Ok(DelzantSystem { polytope: p.clone(), a, b, lambda: p.offsets(), splitting })
}

fn small(x: &num_bigint::BigInt) -> i64 {
    x.to_i64().expect("matrix entry fits in i64")
}

impl DelzantSystem {
    pub fn polytope(&self) -> &DelzantPolytope {
        &self.polytope
    }

    pub fn a(&self) -> &IntMatrix {
        &self.a
    }

    pub fn b(&self) -> &IntMatrix {
        &self.b
    }

    pub fn lambda(&self) -> &[Rational] {
        &self.lambda
    }

    pub fn splitting(&self) -> &IntMatrix {
        &self.splitting
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn n0(&self) -> usize {
        self.a.cols()
    }

    pub fn d(&self) -> usize {
        self.b.cols()
    }

    /// `A^T y = (<y, X_j>)_j`
    pub fn pairings(&self, y: &[Rational]) -> Result<Vec<Rational>> {
        self.a.transpose().mul_rational_vec(y)
    }

    /// `l = A^T k`
    pub fn weights(&self, k: &[i64]) -> Vec<i64> {
        (0..self.n0()).map(|j| (0..self.n()).map(|i| small(self.a.get(i, j)) * k[i]).sum()).collect()
    }

    /// Exact `J0` from squared moduli `|z_j|^2`.
    pub fn j0_from_squares(&self, sq: &[Rational]) -> Vec<Rational> {
        self.lambda.iter().zip(sq).map(|(l, s)| l + s / Rational::from_integer(2.into())).collect()
    }

    /// Exact `Jd = B^T J0` from squared moduli.
    pub fn jd_from_squares(&self, sq: &[Rational]) -> Result<Vec<Rational>> {
        self.b.transpose().mul_rational_vec(&self.j0_from_squares(sq))
    }

    pub fn j0<F: Real>(&self, z: &[Complex<F>]) -> Vec<F> {
        let half = F::from_f64_lossy(0.5);
        self.lambda.iter().zip(z).map(|(l, zj)| F::from_rational(l) + half * zj.norm_sqr()).collect()
    }

    pub fn jd<F: Real>(&self, z: &[Complex<F>]) -> Vec<F> {
        let j0 = self.j0(z);
        (0..self.d())
            .map(|c| (0..self.n0()).fold(F::zero(), |acc, j| acc + F::from_i64_exact(small(self.b.get(j, c))) * j0[j]))
            .collect()
    }

    /// Squared moduli of `sigma(y)`, exactly.
    pub fn sigma_squares(&self, y: &[Rational], formula: SectionFormula) -> Result<Vec<Rational>> {
        if y.len() != self.n() {
            return Err(Error::Dimension { expected: self.n(), found: y.len() });
        }
        if !self.polytope.contains(y) {
            return Err(Error::Domain(format!("point {} is outside the polytope", fmt_point(y))));
        }
        let two = Rational::from_integer(2.into());
        let w = self.pairings(y)?;
        let sq: Vec<Rational> = match formula {
            SectionFormula::Repaired => w.iter().zip(&self.lambda).map(|(w, l)| (w - l) * &two).collect(),
            SectionFormula::Literal => w.iter().zip(&self.lambda).map(|(w, l)| w * &two - l).collect(),
        };
        if let Some(j) = sq.iter().position(|s| s.is_negative()) {
            return Err(Error::Domain(format!(
                "section formula gives a negative square in coordinate {j} at {}",
                fmt_point(y)
            )));
        }
        Ok(sq)
    }

    /// `sigma(y)`: real nonnegative representative over `y`.
    pub fn sigma<F: Real>(&self, y: &[Rational], formula: SectionFormula) -> Result<Vec<Complex<F>>> {
        Ok(self
            .sigma_squares(y, formula)?
            .iter()
            .map(|s| Complex::new(F::from_rational(s).sqrt(), F::zero()))
            .collect())
    }

    /// Same chart on floating point `y`, for finite differences.
    pub fn sigma_f<F: Real>(&self, y: &[F]) -> Result<Vec<Complex<F>>> {
        let two = F::from_f64_lossy(2.0);
        (0..self.n0())
            .map(|j| {
                let w = (0..self.n()).fold(F::zero(), |acc, i| acc + F::from_i64_exact(small(self.a.get(i, j))) * y[i]);
                let s = two * (w - F::from_rational(&self.lambda[j]));
                if s < F::zero() {
                    return Err(Error::Domain(format!("negative slack in facet {j}")));
                }
                Ok(Complex::new(s.sqrt(), F::zero()))
            })
            .collect()
    }

    /// `prod_j (z_j / |z_j|)^{l_j}` with `l = A^T k`.
    pub fn k_sigma_ambient<F: Real>(&self, z: &[Complex<F>], k: &[i64]) -> Result<Complex<F>> {
        if k.len() != self.n() {
            return Err(Error::Dimension { expected: self.n(), found: k.len() });
        }
        let l = self.weights(k);
        let bad: Vec<usize> = (0..self.n0()).filter(|&j| l[j] != 0 && z[j].is_zero()).collect();
        if !bad.is_empty() {
            return Err(Error::Stratum { mode: k.to_vec(), active: bad });
        }
        let mut acc = Complex::new(F::one(), F::zero());
        for (j, &lj) in l.iter().enumerate() {
            if lj != 0 {
                let unit = z[j] / z[j].norm();
                acc = acc * unit.powi(lj as i32);
            }
        }
        Ok(acc)
    }

    fn rotate<F: Real>(z: &[Complex<F>], phases: &[F]) -> Vec<Complex<F>> {
        z.iter().zip(phases).map(|(zj, &p)| *zj * Complex::from_polar(F::one(), p)).collect()
    }

    /// `T^d` acting through `B`: `z_j -> e^{i (B t)_j} z_j`.
    pub fn act_td<F: Real>(&self, z: &[Complex<F>], t: &[F]) -> Vec<Complex<F>> {
        let phases: Vec<F> = (0..self.n0())
            .map(|j| (0..self.d()).fold(F::zero(), |acc, c| acc + F::from_i64_exact(small(self.b.get(j, c))) * t[c]))
            .collect();
        Self::rotate(z, &phases)
    }

    /// `T^n` acting through the splitting: `z_j -> e^{i (R s)_j} z_j`.
    pub fn act_tn<F: Real>(&self, z: &[Complex<F>], s: &[F]) -> Vec<Complex<F>> {
        let phases: Vec<F> = (0..self.n0())
            .map(|j| (0..self.n()).fold(F::zero(), |acc, i| acc + F::from_i64_exact(small(self.splitting.get(j, i))) * s[i]))
            .collect();
        Self::rotate(z, &phases)
    }

    /// Action-angle chart `rho(y, s) = s . sigma(y)`.
    pub fn rho<F: Real>(&self, y: &[F], s: &[F]) -> Result<Vec<Complex<F>>> {
        Ok(self.act_tn(&self.sigma_f(y)?, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;
    use crate::sample;
    use rand::Rng;

    fn ints(m: &IntMatrix) -> Vec<Vec<i64>> {
        m.to_rows().iter().map(|r| r.iter().map(small).collect()).collect()
    }

    #[test]
    fn interval_system() {
        let sys = build_system(&DelzantPolytope::interval()).unwrap();
        assert_eq!(ints(sys.a()), vec![vec![1, -1]]);
        assert_eq!(ints(sys.b()), vec![vec![1], vec![1]]);
        assert_eq!(sys.d(), 1);
        assert!(sys.a().mul(sys.b()).unwrap().is_zero());
    }

    #[test]
    fn simplex_and_square_kernels() {
        let cp2 = build_system(&DelzantPolytope::simplex(2).unwrap()).unwrap();
        assert_eq!(ints(cp2.a()), vec![vec![1, 0, -1], vec![0, 1, -1]]);
        assert_eq!(ints(cp2.b()), vec![vec![1], vec![1], vec![1]]);
        let sq = build_system(&DelzantPolytope::square()).unwrap();
        assert_eq!(sq.d(), 2);
        assert_eq!(ints(&sq.b().transpose()), vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1]]);
        for sys in [&cp2, &sq] {
            assert!(sys.a().mul(sys.b()).unwrap().is_zero());
            assert_eq!(sys.a().mul(sys.splitting()).unwrap(), IntMatrix::identity(sys.n()));
        }
    }

    #[test]
    fn orthant_has_trivial_kernel() {
        let sys = build_system(&DelzantPolytope::orthant(2).unwrap()).unwrap();
        assert_eq!(sys.d(), 0);
        assert!(sys.jd::<f64>(&[Complex::new(1.0, 0.0); 2]).is_empty());
    }

    #[test]
    fn non_delzant_input_is_rejected() {
        let tri = DelzantPolytope::new(
            2,
            vec![
                crate::polytope::Facet::new(vec![1, 0], rat(0, 1)),
                crate::polytope::Facet::new(vec![0, 1], rat(0, 1)),
                crate::polytope::Facet::new(vec![-1, -2], rat(-2, 1)),
            ],
            true,
        )
        .unwrap();
        assert!(matches!(build_system(&tri), Err(Error::Construction(_))));
    }

    #[test]
    fn moment_map_examples() {
        let sys = build_system(&DelzantPolytope::interval()).unwrap();
        let zero = [Complex::new(0.0f64, 0.0); 2];
        assert_eq!(sys.j0(&zero), vec![0.0, -1.0]);
        let z = [Complex::new(2f64.sqrt(), 0.0), Complex::new(0.0, 0.0)];
        let j0 = sys.j0(&z);
        assert!((j0[0] - 1.0).abs() < 1e-15 && j0[1] == -1.0);
        assert!(sys.jd(&z)[0].abs() < 1e-15);
    }

    #[test]
    fn section_examples() {
        let sys = build_system(&DelzantPolytope::interval()).unwrap();
        let z: Vec<Complex<f64>> = sys.sigma(&[rat(1, 2)], SectionFormula::Repaired).unwrap();
        assert!((z[0].re - 1.0).abs() < 1e-15 && (z[1].re - 1.0).abs() < 1e-15);
        let v: Vec<Complex<f64>> = sys.sigma(&[rat(0, 1)], SectionFormula::Repaired).unwrap();
        assert_eq!(v[0], Complex::new(0.0, 0.0));
        assert!(sys.sigma::<f64>(&[rat(3, 2)], SectionFormula::Repaired).is_err());
        // the literal form misses the level set
        let sq = sys.sigma_squares(&[rat(1, 2)], SectionFormula::Literal).unwrap();
        assert!(!sys.jd_from_squares(&sq).unwrap()[0].is_zero());
    }

    #[test]
    fn section_lands_on_the_reduced_level_exactly() {
        let mut r = sample::rng(3);
        for p in [DelzantPolytope::interval(), DelzantPolytope::square(), DelzantPolytope::simplex(2).unwrap(), DelzantPolytope::simplex(3).unwrap()] {
            let sys = build_system(&p).unwrap();
            for _ in 0..50 {
                let y = sample::point_in(&mut r, &p);
                let sq = sys.sigma_squares(&y, SectionFormula::Repaired).unwrap();
                assert_eq!(sys.j0_from_squares(&sq), sys.pairings(&y).unwrap());
                assert!(sys.jd_from_squares(&sq).unwrap().iter().all(Zero::is_zero));
            }
        }
    }

    #[test]
    fn k_sigma_phases() {
        let sys = build_system(&DelzantPolytope::interval()).unwrap();
        let z: Vec<Complex<f64>> = sys.sigma(&[rat(1, 3)], SectionFormula::Repaired).unwrap();
        for k in -3..=3 {
            assert!((sys.k_sigma_ambient(&z, &[k]).unwrap() - 1.0).norm() < 1e-15);
            let theta = 0.7;
            let rotated = sys.act_tn(&z, &[theta]);
            let expected = Complex::from_polar(1.0, theta * k as f64);
            assert!((sys.k_sigma_ambient(&rotated, &[k]).unwrap() - expected).norm() < 1e-12);
        }
        let v: Vec<Complex<f64>> = sys.sigma(&[rat(0, 1)], SectionFormula::Repaired).unwrap();
        assert!(matches!(sys.k_sigma_ambient(&v, &[1]), Err(Error::Stratum { .. })));
        assert!(sys.k_sigma_ambient(&v, &[0]).is_ok());
    }

    #[test]
    fn k_sigma_is_td_invariant_and_tn_covariant() {
        let mut r = sample::rng(17);
        for p in [DelzantPolytope::interval(), DelzantPolytope::square(), DelzantPolytope::simplex(2).unwrap()] {
            let sys = build_system(&p).unwrap();
            for _ in 0..100 {
                let z: Vec<Complex<f64>> = (0..sys.n0())
                    .map(|_| Complex::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)))
                    .collect();
                let k = sample::mode(&mut r, sys.n(), 4);
                let t: Vec<f64> = sample::angle(&mut r, sys.d());
                let s: Vec<f64> = sample::angle(&mut r, sys.n());
                let base = sys.k_sigma_ambient(&z, &k).unwrap();
                assert!((base.norm() - 1.0).abs() < 1e-12);
                assert!((sys.k_sigma_ambient(&sys.act_td(&z, &t), &k).unwrap() - base).norm() < 1e-12);
                let phase: f64 = k.iter().zip(&s).map(|(a, b)| *a as f64 * b).sum();
                let moved = sys.k_sigma_ambient(&sys.act_tn(&z, &s), &k).unwrap();
                assert!((moved - base * Complex::from_polar(1.0, phase)).norm() < 1e-12);
            }
        }
    }
}
