//! The bundle groupoid `G = {(hbar, y, k)}` over the polytope.
//!
//! Arrows are triples with source `(hbar, y)` and range `(hbar, y + hbar k)`;
//! composition adds modes: `(hbar, y + hbar m, l) . (hbar, y, m) = (hbar, y, l + m)`.
//! Membership has two characterizations (facet slack and isotropy lattices)
//! which agree on Delzant polytopes.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::intlat;
use crate::polytope::{fmt_point, DelzantPolytope};
use crate::Rational;

pub const DEFAULT_ORBIT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupoidPoint {
    pub hbar: Rational,
    pub y: Vec<Rational>,
    pub k: Vec<i64>,
}

/// A unit `(hbar, y)` of the groupoid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitPoint {
    pub hbar: Rational,
    pub y: Vec<Rational>,
}

/// `y + hbar k`
pub fn translate(y: &[Rational], hbar: &Rational, k: &[i64]) -> Vec<Rational> {
    y.iter().zip(k).map(|(yi, &ki)| yi + hbar * Rational::from_integer(ki.into())).collect()
}

impl GroupoidPoint {
    pub fn new(hbar: Rational, y: Vec<Rational>, k: Vec<i64>) -> Self {
        GroupoidPoint { hbar, y, k }
    }

    pub fn unit(hbar: Rational, y: Vec<Rational>) -> Self {
        let n = y.len();
        GroupoidPoint { hbar, y, k: vec![0; n] }
    }

    /// `y + hbar k`, whether or not the arrow is valid.
    pub fn target(&self) -> Vec<Rational> {
        translate(&self.y, &self.hbar, &self.k)
    }

    /// Facet characterization: `y in Delta(k)` and `y + hbar k in U(k)`.
    pub fn is_member(&self, p: &DelzantPolytope) -> bool {
        self.y.len() == p.dim()
            && self.k.len() == p.dim()
            && p.in_delta_k(&self.y, &self.k)
            && p.in_u_k(&self.target(), &self.k)
    }

    /// Isotropy characterization: both ends in `Delta(k)` with equal isotropy
    /// Lie algebras.
    pub fn is_member_isotropy(&self, p: &DelzantPolytope) -> bool {
        if self.y.len() != p.dim() || self.k.len() != p.dim() {
            return false;
        }
        let target = self.target();
        if !p.in_delta_k(&self.y, &self.k) || !p.in_delta_k(&target, &self.k) {
            return false;
        }
        let (Ok(a), Ok(b)) = (p.isotropy_lattice(&self.y), p.isotropy_lattice(&target)) else {
            return false;
        };
        same_span(&a, &b)
    }

    fn require_member(&self, p: &DelzantPolytope) -> Result<()> {
        if self.is_member(p) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{} is not an arrow of the groupoid", self.describe())))
        }
    }

    pub fn source(&self, p: &DelzantPolytope) -> Result<UnitPoint> {
        self.require_member(p)?;
        Ok(UnitPoint { hbar: self.hbar.clone(), y: self.y.clone() })
    }

    pub fn range(&self, p: &DelzantPolytope) -> Result<UnitPoint> {
        self.require_member(p)?;
        Ok(UnitPoint { hbar: self.hbar.clone(), y: self.target() })
    }

    /// `self . other`, defined when `range(other) == source(self)`.
    pub fn compose(&self, other: &GroupoidPoint, p: &DelzantPolytope) -> Result<GroupoidPoint> {
        self.require_member(p)?;
        other.require_member(p)?;
        if self.hbar != other.hbar || other.target() != self.y {
            return Err(Error::NotComposable(format!(
                "range of {} differs from source of {}",
                other.describe(),
                self.describe()
            )));
        }
        let k = self.k.iter().zip(&other.k).map(|(a, b)| a + b).collect();
        let g = GroupoidPoint::new(self.hbar.clone(), other.y.clone(), k);
        debug_assert!(g.is_member(p));
        Ok(g)
    }

    pub fn invert(&self, p: &DelzantPolytope) -> Result<GroupoidPoint> {
        self.require_member(p)?;
        Ok(GroupoidPoint::new(self.hbar.clone(), self.target(), self.k.iter().map(|x| -x).collect()))
    }

    pub fn describe(&self) -> String {
        format!("(hbar={}, y={}, k={:?})", crate::polytope::fmt_rational(&self.hbar), fmt_point(&self.y), self.k)
    }
}

fn same_span(a: &[Vec<i64>], b: &[Vec<i64>]) -> bool {
    let to_q = |v: &Vec<i64>| v.iter().map(|&x| Rational::from_integer(x.into())).collect::<Vec<_>>();
    let qa: Vec<Vec<Rational>> = a.iter().map(to_q).collect();
    let qb: Vec<Vec<Rational>> = b.iter().map(to_q).collect();
    let ra = intlat::rational_rank(&qa);
    let rb = intlat::rational_rank(&qb);
    let mut both = qa;
    both.extend(qb);
    ra == rb && intlat::rational_rank(&both) == ra
}

/// A finite set of units of `G_hbar` closed under the arrows between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    hbar: Rational,
    base: Vec<Rational>,
    /// Sorted lexicographically.
    points: Vec<Vec<Rational>>,
    /// Mode displacement of each point from the base point.
    offsets: Vec<Vec<i64>>,
    index: BTreeMap<Vec<Rational>, usize>,
    complete: bool,
}

impl Orbit {
    /// The full orbit of `y0` in `G_hbar`.
    ///
    /// Any two points joined by arrows are joined by a single arrow, so the
    /// orbit is the set of ranges of arrows with source `y0`. Candidates are
    /// the coset `y0 + hbar Z^n` inside the bounding box of the open face of
    /// `y0`; an unbounded face has an infinite orbit.
    pub fn new(p: &DelzantPolytope, hbar: &Rational, y0: &[Rational], cap: usize) -> Result<Orbit> {
        if hbar.is_zero() {
            return Err(Error::Domain("orbits need hbar != 0".into()));
        }
        if y0.len() != p.dim() {
            return Err(Error::Dimension { expected: p.dim(), found: y0.len() });
        }
        if !p.contains(y0) {
            return Err(Error::Domain(format!("base point {} is outside the polytope", fmt_point(y0))));
        }
        let report = p.check_delzant();
        let active = p.active_facets(y0);
        let face_unbounded = report.rays.iter().any(|r| {
            active.iter().all(|&j| crate::polytope::dot_int(&p.facets()[j].normal, r).is_zero())
        });
        if face_unbounded || report.vertices.is_empty() {
            return Err(Error::CapExceeded { cap });
        }
        let face_vertices: Vec<&Vec<Rational>> = report
            .vertices
            .iter()
            .filter(|v| active.iter().all(|j| v.active.contains(j)))
            .map(|v| &v.point)
            .collect();

        let n = p.dim();
        let mut ranges = Vec::with_capacity(n);
        let mut total: u128 = 1;
        for i in 0..n {
            let lo = face_vertices.iter().map(|v| &v[i]).min().expect("face has vertices");
            let hi = face_vertices.iter().map(|v| &v[i]).max().expect("face has vertices");
            let a = (lo - &y0[i]) / hbar;
            let b = (hi - &y0[i]) / hbar;
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            let kmin = to_i64(&a.ceil())?;
            let kmax = to_i64(&b.floor())?;
            total = total.saturating_mul((kmax - kmin + 1).max(0) as u128);
            if total > cap as u128 {
                return Err(Error::CapExceeded { cap });
            }
            ranges.push(kmin..=kmax);
        }

        let mut found: Vec<(Vec<Rational>, Vec<i64>)> = Vec::new();
        let mut k = ranges.iter().map(|r| *r.start()).collect::<Vec<_>>();
        if ranges.iter().all(|r| !r.is_empty()) {
            loop {
                let g = GroupoidPoint::new(hbar.clone(), y0.to_vec(), k.clone());
                if g.is_member(p) {
                    found.push((g.target(), k.clone()));
                }
                // odometer increment
                let mut axis = 0;
                loop {
                    if axis == n {
                        break;
                    }
                    if k[axis] < *ranges[axis].end() {
                        k[axis] += 1;
                        break;
                    }
                    k[axis] = *ranges[axis].start();
                    axis += 1;
                }
                if axis == n {
                    break;
                }
            }
        }
        Ok(Self::from_found(hbar.clone(), y0.to_vec(), found, true))
    }

    /// Points of the orbit of `center` reachable with `|k|_inf <= radius`.
    ///
    /// A window is not closed under arrows; it is used for local matrix
    /// computations whose entries only involve nearby points.
    pub fn window(p: &DelzantPolytope, hbar: &Rational, center: &[Rational], radius: i64) -> Result<Orbit> {
        if hbar.is_zero() {
            return Err(Error::Domain("orbits need hbar != 0".into()));
        }
        if !p.contains(center) {
            return Err(Error::Domain(format!("center {} is outside the polytope", fmt_point(center))));
        }
        let n = p.dim();
        let side = (2 * radius + 1) as usize;
        let mut found = Vec::new();
        for idx in 0..side.pow(n as u32) {
            let mut rem = idx;
            let k: Vec<i64> = (0..n)
                .map(|_| {
                    let d = (rem % side) as i64 - radius;
                    rem /= side;
                    d
                })
                .collect();
            let g = GroupoidPoint::new(hbar.clone(), center.to_vec(), k.clone());
            if g.is_member(p) {
                found.push((g.target(), k));
            }
        }
        Ok(Self::from_found(hbar.clone(), center.to_vec(), found, false))
    }

    fn from_found(hbar: Rational, base: Vec<Rational>, mut found: Vec<(Vec<Rational>, Vec<i64>)>, complete: bool) -> Orbit {
        found.sort();
        let index = found.iter().enumerate().map(|(i, (pt, _))| (pt.clone(), i)).collect();
        let (points, offsets) = found.into_iter().unzip();
        Orbit { hbar, base, points, offsets, index, complete }
    }

    pub fn hbar(&self) -> &Rational {
        &self.hbar
    }

    pub fn base(&self) -> &[Rational] {
        &self.base
    }

    pub fn points(&self) -> &[Vec<Rational>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// False for windows.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn index_of(&self, y: &[Rational]) -> Option<usize> {
        self.index.get(y).copied()
    }

    /// Mode of the arrow from point `i` to point `j`.
    pub fn arrow_between(&self, i: usize, j: usize) -> Vec<i64> {
        self.offsets[j].iter().zip(&self.offsets[i]).map(|(a, b)| a - b).collect()
    }
}

fn to_i64(q: &Rational) -> Result<i64> {
    i64::try_from(q.to_integer()).map_err(|_| Error::Numeric("orbit bound does not fit in i64".into()))
}

/// Convenience wrapper using the default cap.
pub fn orbit(p: &DelzantPolytope, hbar: &Rational, y0: &[Rational]) -> Result<Orbit> {
    Orbit::new(p, hbar, y0, DEFAULT_ORBIT_CAP)
}
