//! Delzant polytopes as exact rational objects.
//!
//! A polytope is the set `{ y : <y, X_j> >= lambda_j }` for primitive integer
//! normals `X_j` and rational offsets `lambda_j`. Facet activity decides the
//! isotropy lattice of a point, hence which Fourier modes `k` live over it:
//! `y` is in `Delta(k)` iff `<k, X_j> = 0` for every facet active at `y`.

use std::collections::BTreeSet;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlat::{self, IntMatrix};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: Rational,
}

impl Facet {
    pub fn new(normal: Vec<i64>, offset: Rational) -> Self {
        Facet { normal, offset }
    }

    /// `<y, X> - lambda`; zero exactly on the facet hyperplane.
    pub fn slack(&self, y: &[Rational]) -> Rational {
        dot_int(&self.normal, y) - &self.offset
    }

    /// `<k, X>`
    pub fn pairing(&self, k: &[i64]) -> i64 {
        self.normal.iter().zip(k).map(|(a, b)| a * b).sum()
    }
}

/// `sum_i a_i y_i` with integer `a`.
pub fn dot_int(a: &[i64], y: &[Rational]) -> Rational {
    a.iter()
        .zip(y)
        .fold(Rational::zero(), |acc, (&ai, yi)| acc + yi * BigInt::from(ai))
}

/// Strictness for inputs that fail the Delzant check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// Reject non-Delzant polytopes.
    #[default]
    Strict,
    /// Accept them and report the violations as warnings.
    Permissive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelzantPolytope {
    dim: usize,
    facets: Vec<Facet>,
    compact: bool,
}

impl DelzantPolytope {
    /// Validates dimensions only; use [`check_delzant`](Self::check_delzant)
    /// for the geometric conditions.
    pub fn new(dim: usize, facets: Vec<Facet>, compact: bool) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Schema("polytope dimension must be positive".into()));
        }
        if facets.is_empty() {
            return Err(Error::Schema("polytope needs at least one facet".into()));
        }
        for f in &facets {
            if f.normal.len() != dim {
                return Err(Error::Dimension { expected: dim, found: f.normal.len() });
            }
        }
        Ok(DelzantPolytope { dim, facets, compact })
    }

    /// The interval `[0, 1]`, moment polytope of the 2-sphere.
    pub fn interval() -> Self {
        Self::new(
            1,
            vec![
                Facet::new(vec![1], Rational::zero()),
                Facet::new(vec![-1], -Rational::one()),
            ],
            true,
        )
        .expect("valid interval")
    }

    /// The standard simplex `{ y_i >= 0, sum y_i <= 1 }` of `CP^n`.
    pub fn simplex(n: usize) -> Result<Self> {
        let mut facets: Vec<Facet> = (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = 1;
                Facet::new(e, Rational::zero())
            })
            .collect();
        facets.push(Facet::new(vec![-1; n], -Rational::one()));
        Self::new(n, facets, true)
    }

    /// Cartesian product; facets of `a` first.
    pub fn product(a: &Self, b: &Self) -> Self {
        let dim = a.dim + b.dim;
        let mut facets = Vec::with_capacity(a.facets.len() + b.facets.len());
        for f in &a.facets {
            let mut normal = f.normal.clone();
            normal.extend(std::iter::repeat_n(0, b.dim));
            facets.push(Facet::new(normal, f.offset.clone()));
        }
        for f in &b.facets {
            let mut normal = vec![0; a.dim];
            normal.extend_from_slice(&f.normal);
            facets.push(Facet::new(normal, f.offset.clone()));
        }
        DelzantPolytope { dim, facets, compact: a.compact && b.compact }
    }

    /// The unit square `[0,1]^2`.
    pub fn square() -> Self {
        Self::product(&Self::interval(), &Self::interval())
    }

    /// The noncompact orthant `{ y_i >= 0 }` (moment image of `C^n`).
    pub fn orthant(n: usize) -> Result<Self> {
        let facets = (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = 1;
                Facet::new(e, Rational::zero())
            })
            .collect();
        Self::new(n, facets, false)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn is_compact(&self) -> bool {
        self.compact
    }

    /// Facet normal matrix with the normals as columns (`n x n0`).
    pub fn normal_matrix(&self) -> IntMatrix {
        let cols: Vec<Vec<i64>> = self.facets.iter().map(|f| f.normal.clone()).collect();
        IntMatrix::from_columns(self.dim, &cols).expect("normals have length dim")
    }

    pub fn offsets(&self) -> Vec<Rational> {
        self.facets.iter().map(|f| f.offset.clone()).collect()
    }

    fn check_point_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::Dimension { expected: self.dim, found: len });
        }
        Ok(())
    }

    pub fn slacks(&self, y: &[Rational]) -> Vec<Rational> {
        self.facets.iter().map(|f| f.slack(y)).collect()
    }

    pub fn contains(&self, y: &[Rational]) -> bool {
        y.len() == self.dim && self.facets.iter().all(|f| !f.slack(y).is_negative())
    }

    pub fn is_interior(&self, y: &[Rational]) -> bool {
        y.len() == self.dim && self.facets.iter().all(|f| f.slack(y).is_positive())
    }

    /// Indices of facets whose hyperplane contains `y`.
    pub fn active_facets(&self, y: &[Rational]) -> Vec<usize> {
        self.facets
            .iter()
            .enumerate()
            .filter(|(_, f)| f.slack(y).is_zero())
            .map(|(j, _)| j)
            .collect()
    }

    /// Normals of the facets active at `y`, generating the Lie algebra of the
    /// isotropy torus. Empty for interior points.
    pub fn isotropy_lattice(&self, y: &[Rational]) -> Result<Vec<Vec<i64>>> {
        self.check_point_dim(y.len())?;
        if !self.contains(y) {
            return Err(Error::Domain(format!("point {} is outside the polytope", fmt_point(y))));
        }
        Ok(self.active_facets(y).into_iter().map(|j| self.facets[j].normal.clone()).collect())
    }

    /// `y in Delta(k)`: inside, and `k` kills every active normal.
    pub fn in_delta_k(&self, y: &[Rational], k: &[i64]) -> bool {
        if y.len() != self.dim || k.len() != self.dim {
            return false;
        }
        let mut inside = true;
        for f in &self.facets {
            let s = f.slack(y);
            if s.is_negative() {
                inside = false;
                break;
            }
            if s.is_zero() && f.pairing(k) != 0 {
                return false;
            }
        }
        inside
    }

    /// `y in U(k)`: every facet pairing nontrivially with `k` is strictly slack.
    pub fn in_u_k(&self, y: &[Rational], k: &[i64]) -> bool {
        if y.len() != self.dim || k.len() != self.dim {
            return false;
        }
        self.facets.iter().all(|f| f.pairing(k) == 0 || f.slack(y).is_positive())
    }

    /// Exact vertex enumeration over all `n`-subsets of facets.
    pub fn vertices(&self) -> Vec<Vertex> {
        let n = self.dim;
        let mut seen: BTreeSet<Vec<Rational>> = BTreeSet::new();
        let mut out = Vec::new();
        for subset in (0..self.facets.len()).combinations(n) {
            let m: Vec<Vec<Rational>> = subset
                .iter()
                .map(|&j| self.facets[j].normal.iter().map(|&x| Rational::from_integer(x.into())).collect())
                .collect();
            let rhs: Vec<Rational> = subset.iter().map(|&j| self.facets[j].offset.clone()).collect();
            let Some(y) = intlat::solve_rational(&m, &rhs) else { continue };
            if !self.contains(&y) || !seen.insert(y.clone()) {
                continue;
            }
            let active = self.active_facets(&y);
            out.push(Vertex { point: y, active });
        }
        out
    }

    /// Extreme rays of the recession cone `{ d : <d, X_j> >= 0 }`.
    pub fn recession_rays(&self) -> Vec<Vec<Rational>> {
        let n = self.dim;
        let mut rays: BTreeSet<Vec<Rational>> = BTreeSet::new();
        for subset in (0..self.facets.len()).combinations(n - 1) {
            let rows: Vec<Vec<Rational>> = subset
                .iter()
                .map(|&j| self.facets[j].normal.iter().map(|&x| Rational::from_integer(x.into())).collect())
                .collect();
            let Some(d) = intlat::null_direction(&rows, n) else { continue };
            for cand in [d.clone(), d.iter().map(|x| -x).collect::<Vec<_>>()] {
                let ok = self.facets.iter().all(|f| !dot_int(&f.normal, &cand).is_negative());
                if ok {
                    rays.insert(normalize_direction(cand));
                }
            }
        }
        rays.into_iter().collect()
    }

    /// Whether the facet normals span `R^n` (no lines in the polyhedron).
    fn normals_span(&self) -> bool {
        let rows: Vec<Vec<Rational>> = self
            .facets
            .iter()
            .map(|f| f.normal.iter().map(|&x| Rational::from_integer(x.into())).collect())
            .collect();
        intlat::rational_rank(&rows) == self.dim
    }

    /// Runs every Delzant condition and collects violations.
    pub fn check_delzant(&self) -> DelzantReport {
        let mut violations = Vec::new();
        for (j, f) in self.facets.iter().enumerate() {
            if intlat::content(&f.normal).abs() != 1 {
                violations.push(Violation::NonPrimitive { facet: j });
            }
        }
        let spans = self.normals_span();
        let vertices = self.vertices();
        let rays = if spans { self.recession_rays() } else { Vec::new() };
        let bounded = spans && rays.is_empty();
        if self.compact && !bounded {
            violations.push(Violation::Unbounded);
        }
        if !self.compact && bounded {
            violations.push(Violation::CompactFlagMismatch);
        }
        if vertices.is_empty() {
            violations.push(Violation::NoVertices);
        }

        let interior_sample = if vertices.is_empty() {
            None
        } else {
            let mut c = centroid(vertices.iter().map(|v| v.point.as_slice()), self.dim);
            for r in &rays {
                for (ci, ri) in c.iter_mut().zip(r) {
                    *ci += ri;
                }
            }
            Some(c)
        };
        let interior_ok = interior_sample.as_ref().is_some_and(|c| self.is_interior(c));
        if !vertices.is_empty() && !interior_ok {
            violations.push(Violation::EmptyInterior);
        }

        for (vi, v) in vertices.iter().enumerate() {
            if v.active.len() != self.dim {
                violations.push(Violation::NonSimpleVertex { vertex: vi, active: v.active.clone() });
                continue;
            }
            let normals: Vec<Vec<i64>> = v.active.iter().map(|&j| self.facets[j].normal.clone()).collect();
            let det = intlat::determinant(
                &IntMatrix::from_columns(self.dim, &normals).expect("square normal block"),
            )
            .expect("square");
            if !det.abs().is_one() {
                violations.push(Violation::NonUnimodular { vertex: vi, det: det.to_string() });
            }
        }

        // every facet must support an (n-1)-dimensional face
        if interior_ok {
            for j in 0..self.facets.len() {
                if !vertices.iter().any(|v| v.active.contains(&j)) {
                    violations.push(Violation::RedundantFacet { facet: j });
                }
            }
        }

        DelzantReport {
            vertices,
            rays,
            violations,
            interior_sample: if interior_ok { interior_sample } else { None },
        }
    }

    /// Fails on any Delzant violation in strict mode; returns the report.
    pub fn require_delzant(&self, mode: Strictness) -> Result<DelzantReport> {
        let report = self.check_delzant();
        if mode == Strictness::Strict && !report.passed() {
            return Err(Error::Construction(format!(
                "polytope is not Delzant: {}",
                report.violations.iter().map(ToString::to_string).join("; ")
            )));
        }
        Ok(report)
    }

    /// All faces of a simple polytope, each with a rational point of its
    /// relative interior. Sorted by codimension, then by active set.
    pub fn enumerate_faces(&self) -> Result<Vec<Face>> {
        let report = self.check_delzant();
        if report.vertices.is_empty() || report.vertices.iter().any(|v| v.active.len() != self.dim) {
            return Err(Error::Construction("face enumeration needs a simple polytope with vertices".into()));
        }
        let mut active_sets: BTreeSet<Vec<usize>> = BTreeSet::new();
        for v in &report.vertices {
            for size in 0..=v.active.len() {
                for s in v.active.iter().copied().combinations(size) {
                    active_sets.insert(s);
                }
            }
        }
        let mut faces = Vec::with_capacity(active_sets.len());
        for active in active_sets {
            let members = report.vertices.iter().filter(|v| active.iter().all(|j| v.active.contains(j)));
            let mut sample = centroid(members.map(|v| v.point.as_slice()), self.dim);
            for r in &report.rays {
                if active.iter().all(|&j| dot_int(&self.facets[j].normal, r).is_zero()) {
                    for (si, ri) in sample.iter_mut().zip(r) {
                        *si += ri;
                    }
                }
            }
            if self.active_facets(&sample) != active {
                return Err(Error::Construction(format!(
                    "face sample {} does not reproduce active set {:?}",
                    fmt_point(&sample),
                    active
                )));
            }
            faces.push(Face { active, sample });
        }
        faces.sort_by(|a, b| a.active.len().cmp(&b.active.len()).then_with(|| a.active.cmp(&b.active)));
        Ok(faces)
    }

    pub fn to_json(&self) -> PolytopeJson {
        PolytopeJson {
            n: self.dim,
            facets: self
                .facets
                .iter()
                .map(|f| FacetJson { normal: f.normal.clone(), offset: fmt_rational(&f.offset) })
                .collect(),
            compact: self.compact,
        }
    }

    pub fn from_json(j: &PolytopeJson) -> Result<Self> {
        let facets = j
            .facets
            .iter()
            .map(|f| Ok(Facet::new(f.normal.clone(), parse_rational(&f.offset)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(j.n, facets, j.compact)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: PolytopeJson = serde_json::from_str(s)?;
        Self::from_json(&j)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serializable")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub point: Vec<Rational>,
    pub active: Vec<usize>,
}

/// An open face: its active facet set and a point of its relative interior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub active: Vec<usize>,
    pub sample: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonPrimitive { facet: usize },
    Unbounded,
    CompactFlagMismatch,
    NoVertices,
    EmptyInterior,
    NonSimpleVertex { vertex: usize, active: Vec<usize> },
    NonUnimodular { vertex: usize, det: String },
    RedundantFacet { facet: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NonPrimitive { facet } => write!(f, "facet {facet} has a non-primitive normal"),
            Violation::Unbounded => write!(f, "polyhedron is unbounded"),
            Violation::CompactFlagMismatch => write!(f, "polytope is bounded but flagged noncompact"),
            Violation::NoVertices => write!(f, "polyhedron is empty or has no vertices"),
            Violation::EmptyInterior => write!(f, "polyhedron has empty interior"),
            Violation::NonSimpleVertex { vertex, active } => {
                write!(f, "vertex {vertex} is not simple (active facets {active:?})")
            }
            Violation::NonUnimodular { vertex, det } => {
                write!(f, "vertex {vertex} normals have determinant {det}")
            }
            Violation::RedundantFacet { facet } => write!(f, "facet {facet} does not support a face"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DelzantReport {
    pub vertices: Vec<Vertex>,
    pub rays: Vec<Vec<Rational>>,
    pub violations: Vec<Violation>,
    pub interior_sample: Option<Vec<Rational>>,
}

impl DelzantReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// On-disk polytope schema. Offsets are exact `"p/q"` strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub n: usize,
    pub facets: Vec<FacetJson>,
    #[serde(default = "default_compact")]
    pub compact: bool,
}

fn default_compact() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FacetJson {
    pub normal: Vec<i64>,
    pub offset: String,
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    BigRational::from_str(t).map_err(|_| Error::Schema(format!("not an exact rational: {s:?}")))
}

/// Canonical `"p/q"` (or `"p"` for integers).
pub fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn fmt_point(y: &[Rational]) -> String {
    format!("({})", y.iter().map(fmt_rational).join(", "))
}

fn centroid<'a>(points: impl Iterator<Item = &'a [Rational]>, dim: usize) -> Vec<Rational> {
    let mut sum = vec![Rational::zero(); dim];
    let mut count = 0i64;
    for p in points {
        for (s, x) in sum.iter_mut().zip(p) {
            *s += x;
        }
        count += 1;
    }
    let c = Rational::from_integer(count.max(1).into());
    sum.into_iter().map(|s| s / &c).collect()
}

fn normalize_direction(d: Vec<Rational>) -> Vec<Rational> {
    let scale = d.iter().find(|x| !x.is_zero()).map(|x| x.abs()).unwrap_or_else(Rational::one);
    d.into_iter().map(|x| x / &scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn pt(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(a, b)| rat(a, b)).collect()
    }

    fn non_delzant_triangle() -> DelzantPolytope {
        DelzantPolytope::new(
            2,
            vec![
                Facet::new(vec![1, 0], rat(0, 1)),
                Facet::new(vec![0, 1], rat(0, 1)),
                Facet::new(vec![-1, -2], rat(-2, 1)),
            ],
            true,
        )
        .unwrap()
    }

    #[test]
    fn delzant_checks() {
        assert!(DelzantPolytope::interval().check_delzant().passed());
        assert!(DelzantPolytope::square().check_delzant().passed());
        assert!(DelzantPolytope::simplex(2).unwrap().check_delzant().passed());
        assert!(DelzantPolytope::simplex(3).unwrap().check_delzant().passed());
        let r = non_delzant_triangle().check_delzant();
        assert!(!r.passed());
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NonUnimodular { det, .. } if det == "-2" || det == "2")));
    }

    #[test]
    fn square_check_lists_four_vertices() {
        let r = DelzantPolytope::square().check_delzant();
        assert_eq!(r.vertices.len(), 4);
        assert!(r.rays.is_empty());
    }

    #[test]
    fn unbounded_and_degenerate_inputs_are_flagged() {
        let half_line =
            DelzantPolytope::new(1, vec![Facet::new(vec![1], rat(0, 1))], true).unwrap();
        assert!(half_line.check_delzant().violations.contains(&Violation::Unbounded));

        let orthant = DelzantPolytope::orthant(2).unwrap();
        let r = orthant.check_delzant();
        assert!(r.passed(), "{:?}", r.violations);
        assert_eq!(r.rays.len(), 2);

        let flat = DelzantPolytope::new(
            1,
            vec![Facet::new(vec![1], rat(0, 1)), Facet::new(vec![-1], rat(0, 1))],
            true,
        )
        .unwrap();
        assert!(flat.check_delzant().violations.contains(&Violation::EmptyInterior));

        let empty = DelzantPolytope::new(
            1,
            vec![Facet::new(vec![1], rat(1, 1)), Facet::new(vec![-1], rat(0, 1))],
            true,
        )
        .unwrap();
        assert!(!empty.check_delzant().passed());

        let fat = DelzantPolytope::new(
            1,
            vec![Facet::new(vec![2], rat(0, 1)), Facet::new(vec![-1], rat(-1, 1))],
            true,
        )
        .unwrap();
        assert!(fat.check_delzant().violations.contains(&Violation::NonPrimitive { facet: 0 }));
    }

    #[test]
    fn isotropy_examples() {
        let i = DelzantPolytope::interval();
        assert!(i.isotropy_lattice(&pt(&[(1, 2)])).unwrap().is_empty());
        assert_eq!(i.isotropy_lattice(&pt(&[(0, 1)])).unwrap(), vec![vec![1]]);
        assert!(matches!(i.isotropy_lattice(&pt(&[(3, 2)])), Err(Error::Domain(_))));
        let s = DelzantPolytope::simplex(2).unwrap();
        assert_eq!(s.isotropy_lattice(&pt(&[(0, 1), (0, 1)])).unwrap(), vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn delta_k_examples() {
        let i = DelzantPolytope::interval();
        assert!(i.in_delta_k(&pt(&[(0, 1)]), &[0]));
        assert!(!i.in_delta_k(&pt(&[(0, 1)]), &[2]));
        let s = DelzantPolytope::simplex(2).unwrap();
        assert!(s.in_delta_k(&pt(&[(0, 1), (1, 2)]), &[0, 3]));
        assert!(!s.in_delta_k(&pt(&[(0, 1), (1, 2)]), &[1, 3]));
    }

    #[test]
    fn u_k_examples() {
        let i = DelzantPolytope::interval();
        assert!(i.in_u_k(&pt(&[(1, 2)]), &[1]));
        assert!(!i.in_u_k(&pt(&[(0, 1)]), &[1]));
        assert!(i.in_u_k(&pt(&[(-7, 1)]), &[0]));
        assert!(DelzantPolytope::square().in_u_k(&pt(&[(5, 1), (-3, 1)]), &[0, 0]));
    }

    #[test]
    fn face_counts() {
        let i = DelzantPolytope::interval().enumerate_faces().unwrap();
        let sets: Vec<Vec<usize>> = i.iter().map(|f| f.active.clone()).collect();
        assert_eq!(sets, vec![vec![], vec![0], vec![1]]);
        assert_eq!(DelzantPolytope::square().enumerate_faces().unwrap().len(), 9);
        assert_eq!(DelzantPolytope::simplex(2).unwrap().enumerate_faces().unwrap().len(), 7);
        assert_eq!(DelzantPolytope::simplex(3).unwrap().enumerate_faces().unwrap().len(), 15);
        assert_eq!(DelzantPolytope::orthant(2).unwrap().enumerate_faces().unwrap().len(), 4);
    }

    #[test]
    fn face_samples_reproduce_active_sets() {
        for p in [DelzantPolytope::interval(), DelzantPolytope::square(), DelzantPolytope::simplex(2).unwrap()] {
            for f in p.enumerate_faces().unwrap() {
                assert_eq!(p.active_facets(&f.sample), f.active);
            }
        }
    }

    #[test]
    fn delta_k_is_delta_cap_u_k_on_grid() {
        for p in [DelzantPolytope::interval(), DelzantPolytope::square(), DelzantPolytope::simplex(2).unwrap()] {
            let n = p.dim();
            let grid: Vec<Rational> = (-2..=10).map(|i| rat(i, 8)).collect();
            let points: Vec<Vec<Rational>> = if n == 1 {
                grid.iter().map(|x| vec![x.clone()]).collect()
            } else {
                grid.iter().cartesian_product(grid.iter()).map(|(a, b)| vec![a.clone(), b.clone()]).collect()
            };
            let ks: Vec<Vec<i64>> = if n == 1 {
                (-3..=3).map(|a| vec![a]).collect()
            } else {
                (-2..=2).cartesian_product(-2..=2).map(|(a, b)| vec![a, b]).collect()
            };
            for y in &points {
                assert!(p.in_delta_k(y, &vec![0; n]) == p.contains(y));
                for k in &ks {
                    assert_eq!(p.in_delta_k(y, k), p.contains(y) && p.in_u_k(y, k));
                    if p.is_interior(y) {
                        assert!(p.in_delta_k(y, k));
                    }
                }
                if p.contains(y) {
                    assert_eq!(p.isotropy_lattice(y).unwrap().is_empty(), p.is_interior(y));
                }
            }
        }
    }

    #[test]
    fn json_roundtrip_and_schema_errors() {
        let s = DelzantPolytope::simplex(2).unwrap();
        let back = DelzantPolytope::from_json_str(&s.to_json_string()).unwrap();
        assert_eq!(back, s);
        let txt = r#"{"n":1,"facets":[{"normal":[1],"offset":"1/3"},{"normal":[-1],"offset":"-2/3"}],"compact":true}"#;
        let p = DelzantPolytope::from_json_str(txt).unwrap();
        assert_eq!(p.facets()[0].offset, rat(1, 3));
        assert!(DelzantPolytope::from_json_str(r#"{"n":1,"facets":[{"normal":[1],"offset":"x"}]}"#).is_err());
        assert!(DelzantPolytope::from_json_str(r#"{"n":2,"facets":[{"normal":[1],"offset":"0"}]}"#).is_err());
        assert!(DelzantPolytope::from_json_str("{").is_err());
    }

    #[test]
    fn strict_mode_rejects_non_delzant() {
        let t = non_delzant_triangle();
        assert!(t.require_delzant(Strictness::Strict).is_err());
        assert!(!t.require_delzant(Strictness::Permissive).unwrap().passed());
    }
}
