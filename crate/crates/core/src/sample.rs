//! Seeded generators for exact points, groupoid arrows and algebra elements.
//!
//! Shared by the property tests, the `verify suite` command and the
//! acceptance batteries so that every randomized check is reproducible from
//! a single `u64` seed.

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{AlgebraElement, Coefficient};
use crate::expr::{Expr, Func};
use crate::groupoid::GroupoidPoint;
use crate::polytope::DelzantPolytope;
use crate::{rat, Rational};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Convex combination of a random nonempty subset of the vertices plus a
/// random nonnegative combination of recession rays. Subsets make faces of
/// every dimension reachable.
pub fn point_in(rng: &mut SampleRng, p: &DelzantPolytope) -> Vec<Rational> {
    combine(rng, p, false)
}

/// Like [`point_in`] but with every vertex and ray weighted, hence in the
/// interior.
pub fn interior_point(rng: &mut SampleRng, p: &DelzantPolytope) -> Vec<Rational> {
    combine(rng, p, true)
}

/// Interior point whose facet slacks all exceed `margin`; falls back to the
/// best of a fixed number of draws.
pub fn interior_point_with_margin(rng: &mut SampleRng, p: &DelzantPolytope, margin: &Rational) -> Vec<Rational> {
    let mut best: Option<(Rational, Vec<Rational>)> = None;
    for _ in 0..200 {
        let y = interior_point(rng, p);
        let s = p.slacks(&y).into_iter().min().unwrap_or_else(Rational::zero);
        if s > *margin {
            return y;
        }
        if best.as_ref().is_none_or(|(b, _)| s > *b) {
            best = Some((s, y));
        }
    }
    best.expect("at least one draw").1
}

fn combine(rng: &mut SampleRng, p: &DelzantPolytope, all: bool) -> Vec<Rational> {
    let n = p.dim();
    let verts: Vec<Vec<Rational>> = p.vertices().into_iter().map(|v| v.point).collect();
    let rays = p.recession_rays();
    let mut chosen: Vec<&Vec<Rational>> = verts.iter().collect();
    if !all {
        chosen.shuffle(rng);
        let keep = rng.gen_range(1..=chosen.len());
        chosen.truncate(keep);
    }
    let weights: Vec<i64> = chosen.iter().map(|_| rng.gen_range(1..=12)).collect();
    let total: i64 = weights.iter().sum();
    let mut y = vec![Rational::zero(); n];
    for (v, w) in chosen.iter().zip(&weights) {
        for (yi, vi) in y.iter_mut().zip(v.iter()) {
            *yi += vi * rat(*w, total);
        }
    }
    for r in &rays {
        if all || rng.gen_bool(0.5) {
            let w = rat(rng.gen_range(1..=24), rng.gen_range(1..=8));
            for (yi, ri) in y.iter_mut().zip(r) {
                *yi += ri * &w;
            }
        }
    }
    y
}

/// `1/N` with random sign, `N` in `lo..=hi`.
pub fn hbar(rng: &mut SampleRng, lo: i64, hi: i64, signed: bool) -> Rational {
    let h = rat(1, rng.gen_range(lo..=hi));
    if signed && rng.gen_bool(0.5) {
        -h
    } else {
        h
    }
}

pub fn mode(rng: &mut SampleRng, n: usize, max: i64) -> Vec<i64> {
    (0..n).map(|_| rng.gen_range(-max..=max)).collect()
}

/// A point of `Delta` with a mode admissible there and a translate that
/// stays on the groupoid, so the arrow is a member.
pub fn arrow(rng: &mut SampleRng, p: &DelzantPolytope, max_k: i64) -> GroupoidPoint {
    for _ in 0..1000 {
        let h = hbar(rng, 2, 16, true);
        let y = point_in(rng, p);
        let k = mode(rng, p.dim(), max_k);
        let g = GroupoidPoint::new(h, y, k);
        if g.is_member(p) {
            return g;
        }
    }
    let y = interior_point(rng, p);
    GroupoidPoint::unit(rat(1, 16), y)
}

/// Arrow of `G_h` landing on a grid of small denominators, including
/// points outside the polytope. Used by the membership equivalence battery.
pub fn grid_arrow(rng: &mut SampleRng, p: &DelzantPolytope, max_k: i64) -> GroupoidPoint {
    let n = p.dim();
    let denom = [2i64, 3, 4, 6, 8][rng.gen_range(0..5)];
    let base = if rng.gen_bool(0.7) { point_in(rng, p) } else { vec![Rational::zero(); n] };
    let y: Vec<Rational> = base
        .iter()
        .map(|b| {
            let snapped = (b * Rational::from_integer(denom.into())).round() / Rational::from_integer(denom.into());
            snapped + rat(rng.gen_range(-1..=1), denom) * Rational::from_integer((rng.gen_bool(0.3) as i64).into())
        })
        .collect();
    let h = rat(if rng.gen_bool(0.5) { 1 } else { -1 }, denom * rng.gen_range(1..=2));
    GroupoidPoint::new(h, y, mode(rng, n, max_k))
}

/// Small rational with denominator at most 4.
fn small_rational(rng: &mut SampleRng) -> Rational {
    let d = rng.gen_range(1..=4);
    let mut q = rat(rng.gen_range(-6..=6), d);
    if q.is_zero() {
        q = Rational::one();
    }
    q
}

/// Random smooth, everywhere-defined expression in `(h, y)`.
pub fn smooth_expr(rng: &mut SampleRng, n: usize, with_hbar: bool) -> Expr {
    let terms = rng.gen_range(1..=3);
    let mut acc = Expr::zero();
    for _ in 0..terms {
        let mut t = Expr::constant(small_rational(rng));
        for i in 0..n {
            let deg = rng.gen_range(0..=2);
            t = Expr::mul(&t, &Expr::pow(&Expr::var(i), deg));
        }
        if with_hbar && rng.gen_bool(0.4) {
            t = Expr::mul(&t, &Expr::hbar());
        }
        if rng.gen_bool(0.4) {
            let mut lin = Expr::constant(small_rational(rng));
            for i in 0..n {
                lin = Expr::add(&lin, &Expr::mul(&Expr::constant(small_rational(rng)), &Expr::var(i)));
            }
            let f = [Func::Sin, Func::Cos, Func::Exp][rng.gen_range(0..3)];
            if f == Func::Exp {
                lin = Expr::apply(Func::Sin, &lin);
            }
            t = Expr::mul(&t, &Expr::apply(f, &lin));
        }
        acc = Expr::add(&acc, &t);
    }
    acc
}

#[derive(Debug, Clone, Copy)]
pub struct ElementShape {
    pub max_modes: usize,
    pub max_k: i64,
    pub with_hbar: bool,
    pub complex: bool,
}

impl Default for ElementShape {
    fn default() -> Self {
        ElementShape { max_modes: 3, max_k: 2, with_hbar: true, complex: true }
    }
}

pub fn element(rng: &mut SampleRng, n: usize, shape: ElementShape) -> AlgebraElement {
    let count = rng.gen_range(1..=shape.max_modes.max(1));
    let mut e = AlgebraElement::new(n);
    for _ in 0..count {
        let k = mode(rng, n, shape.max_k);
        let re = smooth_expr(rng, n, shape.with_hbar);
        let im = if shape.complex && rng.gen_bool(0.5) { smooth_expr(rng, n, shape.with_hbar) } else { Expr::zero() };
        e.add_mode(k, Coefficient::new(re, im));
    }
    if e.modes().is_empty() {
        e.add_mode(vec![0; n], Coefficient::real(Expr::one()));
    }
    e
}

/// Real observable: `f + f^*` evaluated at `h = 0` is real-valued.
pub fn real_classical(rng: &mut SampleRng, n: usize, shape: ElementShape) -> AlgebraElement {
    let f = element(rng, n, ElementShape { with_hbar: false, ..shape });
    f.add(&crate::algebra::involution(&f)).at_hbar_zero()
}

pub fn angle(rng: &mut SampleRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect()
}

/// Rational with `|x| <= bound` on a fine grid.
pub fn rational_in(rng: &mut SampleRng, bound: i64, denom: i64) -> Rational {
    let q = rat(rng.gen_range(-bound * denom..=bound * denom), denom);
    if q.is_negative() && bound == 0 {
        Rational::zero()
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic_and_valid() {
        let s = DelzantPolytope::simplex(2).unwrap();
        let mut a = rng(5);
        let mut b = rng(5);
        for _ in 0..50 {
            let y = point_in(&mut a, &s);
            assert_eq!(y, point_in(&mut b, &s));
            assert!(s.contains(&y));
            assert!(s.is_interior(&interior_point(&mut a, &s)));
            let _ = interior_point(&mut b, &s);
            let g = arrow(&mut a, &s, 3);
            assert!(g.is_member(&s));
            let _ = arrow(&mut b, &s, 3);
        }
        let o = DelzantPolytope::orthant(2).unwrap();
        assert!(o.is_interior(&interior_point(&mut a, &o)));
    }

    #[test]
    fn margin_points_respect_the_margin() {
        let sq = DelzantPolytope::square();
        let mut r = rng(9);
        for _ in 0..20 {
            let y = interior_point_with_margin(&mut r, &sq, &rat(1, 10));
            assert!(sq.slacks(&y).iter().all(|s| *s > rat(1, 10)));
        }
    }

    #[test]
    fn random_elements_evaluate_everywhere() {
        let mut r = rng(11);
        for _ in 0..50 {
            let e = element(&mut r, 2, ElementShape::default());
            for c in e.modes().values() {
                assert!(c.eval(0.3f64, &[-2.0, 5.0]).is_ok());
            }
        }
    }
}
