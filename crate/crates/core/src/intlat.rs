//! Exact integer and rational linear algebra.
//!
//! Lattice computations (facet normal matrices, torus kernels, unimodularity at
//! vertices) need exact answers, so everything here runs on arbitrary
//! precision integers or rationals and never touches floating point.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense row-major matrix of arbitrary precision integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{:?}", self.to_rows())
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds from rows; all rows must have the same length.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Dimension { expected: cols, found: r.len() });
            }
            data.extend(r.iter().map(|&v| BigInt::from(v)));
        }
        Ok(IntMatrix { rows: rows.len(), cols, data })
    }

    /// Matrix whose columns are the given vectors (all of length `len`).
    pub fn from_columns(len: usize, columns: &[Vec<i64>]) -> Result<Self> {
        let mut m = Self::zeros(len, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != len {
                return Err(Error::Dimension { expected: len, found: c.len() });
            }
            for (i, v) in c.iter().enumerate() {
                m.data[i * columns.len() + j] = BigInt::from(*v);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension { expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product over the rationals.
    pub fn mul_rational_vec(&self, v: &[BigRational]) -> Result<Vec<BigRational>> {
        if v.len() != self.cols {
            return Err(Error::Dimension { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows)
            .map(|i| {
                (0..self.cols).fold(BigRational::zero(), |acc, j| {
                    acc + BigRational::from_integer(self.get(i, j).clone()) * &v[j]
                })
            })
            .collect())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += factor * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(src, j) * factor;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += factor * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, src) * factor;
            self.data[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let idx = i * self.cols + j;
            self.data[idx] = -std::mem::take(&mut self.data[idx]);
        }
    }
}

/// Result of [`smith_normal_form`]: `u * a * v == d`.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    /// Nonzero diagonal entries, in order.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols))
            .map(|i| self.d.get(i, i).clone())
            .take_while(|x| !x.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

/// Smith normal form by repeated pivoting on the smallest entry.
///
/// The returned `u` and `v` are unimodular, `d` is diagonal with
/// nonnegative entries and `d[i][i]` divides `d[i+1][i+1]`.
pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    let (rows, cols) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        loop {
            // smallest nonzero |entry| of the trailing block
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = d.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    if pivot.is_none_or(|(pi, pj)| x.abs() < d.get(pi, pj).abs()) {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else { break };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let p = d.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..rows {
                let q = d.get(i, t).div_floor(&p);
                if !q.is_zero() {
                    d.add_row_multiple(i, t, &-&q);
                    u.add_row_multiple(i, t, &-&q);
                }
                clean &= d.get(i, t).is_zero();
            }
            for j in t + 1..cols {
                let q = d.get(t, j).div_floor(&p);
                if !q.is_zero() {
                    d.add_col_multiple(j, t, &-&q);
                    v.add_col_multiple(j, t, &-&q);
                }
                clean &= d.get(t, j).is_zero();
            }
            if !clean {
                continue;
            }
            // divisibility of the trailing block by the pivot
            let offender = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| !d.get(i, j).is_multiple_of(&p)));
            match offender {
                Some(i) => {
                    d.add_row_multiple(t, i, &BigInt::one());
                    u.add_row_multiple(t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithForm { u, d, v }
}

/// Columns form a Z-basis of `{ v in Z^cols : a v = 0 }`.
pub fn integer_kernel_basis(a: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(a);
    let r = snf.rank();
    let mut b = IntMatrix::zeros(a.cols, a.cols - r);
    for (out_j, j) in (r..a.cols).enumerate() {
        for i in 0..a.cols {
            b.set(i, out_j, snf.v.get(i, j).clone());
        }
    }
    b
}

/// Row-style Hermite normal form: echelon with positive pivots, entries
/// above each pivot reduced into `[0, pivot)`. Zero rows are dropped, so the
/// result is a canonical basis of the row lattice.
pub fn row_hermite_form(a: &IntMatrix) -> IntMatrix {
    let mut h = a.clone();
    let mut r = 0;
    for c in 0..h.cols {
        if r == h.rows {
            break;
        }
        let mut found = false;
        loop {
            let mut pivot: Option<usize> = None;
            for i in r..h.rows {
                let x = h.get(i, c);
                if !x.is_zero() && pivot.is_none_or(|p| x.abs() < h.get(p, c).abs()) {
                    pivot = Some(i);
                }
            }
            let Some(pi) = pivot else { break };
            found = true;
            h.swap_rows(r, pi);
            let p = h.get(r, c).clone();
            let mut clean = true;
            for i in r + 1..h.rows {
                let q = h.get(i, c).div_floor(&p);
                if !q.is_zero() {
                    h.add_row_multiple(i, r, &-&q);
                }
                clean &= h.get(i, c).is_zero();
            }
            if clean {
                break;
            }
        }
        if !found {
            continue;
        }
        if h.get(r, c).is_negative() {
            h.negate_row(r);
        }
        let p = h.get(r, c).clone();
        for i in 0..r {
            let q = h.get(i, c).div_floor(&p);
            if !q.is_zero() {
                h.add_row_multiple(i, r, &-&q);
            }
        }
        r += 1;
    }
    let mut out = IntMatrix::zeros(r, h.cols);
    for i in 0..r {
        for j in 0..h.cols {
            out.set(i, j, h.get(i, j).clone());
        }
    }
    out
}

/// Determinant of a square integer matrix (fraction-free Bareiss elimination).
pub fn determinant(a: &IntMatrix) -> Result<BigInt> {
    if a.rows != a.cols {
        return Err(Error::Dimension { expected: a.rows, found: a.cols });
    }
    let n = a.rows;
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut m = a.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m.get(k, k).is_zero() {
            match (k + 1..n).find(|&i| !m.get(i, k).is_zero()) {
                Some(i) => {
                    m.swap_rows(k, i);
                    sign = -sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let val = (m.get(i, j) * m.get(k, k) - m.get(i, k) * m.get(k, j)) / &prev;
                m.set(i, j, val);
            }
        }
        prev = m.get(k, k).clone();
    }
    Ok(sign * m.get(n - 1, n - 1))
}

/// True iff the `n` given vectors of length `n` form a basis of `Z^n`.
pub fn is_unimodular_basis(vectors: &[Vec<i64>]) -> Result<bool> {
    let n = vectors.first().map_or(0, Vec::len);
    if vectors.len() != n {
        return Err(Error::Dimension { expected: n, found: vectors.len() });
    }
    let m = IntMatrix::from_columns(n, vectors)?;
    Ok(determinant(&m)?.abs().is_one())
}

/// Greatest common divisor of the entries (0 for the zero vector).
pub fn content(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

/// Rank over Q of the row vectors.
pub fn rational_rank(rows: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let f = &m[i][c] / &pivot;
                for j in c..cols {
                    let delta = &f * &m[rank][j];
                    m[i][j] -= delta;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Solves the square system `m x = b` exactly; `None` if singular.
pub fn solve_rational(m: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = m.len();
    let mut aug: Vec<Vec<BigRational>> = m
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !aug[i][c].is_zero())?;
        aug.swap(c, p);
        let pivot = aug[c][c].clone();
        for j in c..=n {
            aug[c][j] = &aug[c][j] / &pivot;
        }
        for i in 0..n {
            if i != c && !aug[i][c].is_zero() {
                let f = aug[i][c].clone();
                for j in c..=n {
                    let delta = &f * &aug[c][j];
                    aug[i][j] -= delta;
                }
            }
        }
    }
    Some(aug.into_iter().map(|mut r| r.pop().expect("augmented column")).collect())
}

/// One-dimensional null space direction of `rows` (each of length `n`), if
/// the rows have rank exactly `n - 1`.
pub fn null_direction(rows: &[Vec<BigRational>], n: usize) -> Option<Vec<BigRational>> {
    if rational_rank(rows) != n - 1 {
        return None;
    }
    // Try unit right-hand sides: fixing coordinate `free` to 1.
    for free in 0..n {
        let mut m = Vec::new();
        let mut rhs = Vec::new();
        for r in rows {
            let mut row: Vec<BigRational> = r.clone();
            rhs.push(-row.remove(free));
            m.push(row);
        }
        // reduce to a square independent subsystem
        let mut chosen: Vec<usize> = Vec::new();
        for i in 0..m.len() {
            let mut trial: Vec<Vec<BigRational>> = chosen.iter().map(|&c| m[c].clone()).collect();
            trial.push(m[i].clone());
            if rational_rank(&trial) == trial.len() {
                chosen.push(i);
            }
        }
        if chosen.len() != n - 1 {
            continue;
        }
        let sq: Vec<Vec<BigRational>> = chosen.iter().map(|&c| m[c].clone()).collect();
        let b: Vec<BigRational> = chosen.iter().map(|&c| rhs[c].clone()).collect();
        if let Some(mut x) = solve_rational(&sq, &b) {
            x.insert(free, BigRational::one());
            let consistent = rows.iter().all(|r| {
                r.iter().zip(&x).fold(BigRational::zero(), |acc, (a, b)| acc + a * b).is_zero()
            });
            if consistent {
                return Some(x);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    fn check_snf(a: &IntMatrix) -> SmithForm {
        let s = smith_normal_form(a);
        assert_eq!(s.u.mul(a).unwrap().mul(&s.v).unwrap(), s.d);
        assert!(s.d.is_diagonal());
        assert!(determinant(&s.u).unwrap().abs().is_one());
        assert!(determinant(&s.v).unwrap().abs().is_one());
        let f = s.invariant_factors();
        for w in f.windows(2) {
            assert!(w[1].is_multiple_of(&w[0]));
        }
        for x in &f {
            assert!(x.is_positive());
        }
        s
    }

    #[test]
    fn snf_one_by_one() {
        let s = check_snf(&m(&[vec![2]]));
        assert_eq!(s.d, m(&[vec![2]]));
        assert_eq!(s.u, IntMatrix::identity(1));
        assert_eq!(s.v, IntMatrix::identity(1));
    }

    #[test]
    fn snf_identity() {
        let s = check_snf(&IntMatrix::identity(3));
        assert_eq!(s.d, IntMatrix::identity(3));
    }

    #[test]
    fn snf_simplex_normals() {
        let s = check_snf(&m(&[vec![1, 0, -1], vec![0, 1, -1]]));
        assert_eq!(s.d, m(&[vec![1, 0, 0], vec![0, 1, 0]]));
    }

    #[test]
    fn snf_nontrivial_factors() {
        let s = check_snf(&m(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]));
        let f: Vec<i64> = s.invariant_factors().iter().map(|x| x.try_into().unwrap()).collect();
        assert_eq!(f, vec![2, 6, 12]);
    }

    #[test]
    fn kernel_of_simplex_normals() {
        let b = integer_kernel_basis(&m(&[vec![1, 0, -1], vec![0, 1, -1]]));
        assert_eq!(b.cols(), 1);
        let col: Vec<BigInt> = b.column(0);
        let sign = if col[0].is_negative() { -1 } else { 1 };
        let col: Vec<i64> = col.iter().map(|x| i64::try_from(x).unwrap() * sign).collect();
        assert_eq!(col, vec![1, 1, 1]);
    }

    #[test]
    fn kernel_of_injective_map_is_empty() {
        assert_eq!(integer_kernel_basis(&IntMatrix::identity(2)).cols(), 0);
    }

    #[test]
    fn kernel_of_interval_normals() {
        let b = integer_kernel_basis(&m(&[vec![1, -1]]));
        let col: Vec<i64> = b.column(0).iter().map(|x| i64::try_from(x).unwrap()).collect();
        assert!(col == vec![1, 1] || col == vec![-1, -1]);
    }

    #[test]
    fn unimodular_examples() {
        assert!(is_unimodular_basis(&[vec![1, 0], vec![0, 1]]).unwrap());
        assert!(!is_unimodular_basis(&[vec![1, 0], vec![1, 2]]).unwrap());
        assert!(is_unimodular_basis(&[vec![0, 1], vec![-1, -1]]).unwrap());
        assert!(matches!(
            is_unimodular_basis(&[vec![1, 0]]),
            Err(Error::Dimension { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let a = m(&[vec![2, -1, 3], vec![0, 4, 1], vec![5, 2, -2]]);
        // 2(4*-2 - 1*2) - (-1)(0*-2 - 1*5) + 3(0*2 - 4*5) = -20 - 5 - 60
        assert_eq!(determinant(&a).unwrap(), BigInt::from(-85));
    }

    #[test]
    fn null_direction_of_single_row() {
        let q = |x: i64| BigRational::from_integer(x.into());
        let d = null_direction(&[vec![q(1), q(1)]], 2).unwrap();
        assert_eq!(&d[0] + &d[1], q(0));
        assert!(null_direction(&[], 1).is_some());
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
            prop::collection::vec(prop::collection::vec(-6i64..7, c), r)
        })
    }

    proptest! {
        #[test]
        fn snf_reconstructs(rows in small_matrix()) {
            check_snf(&m(&rows));
        }

        #[test]
        fn kernel_is_sound_and_complete(rows in small_matrix()) {
            let a = m(&rows);
            let b = integer_kernel_basis(&a);
            prop_assert!(a.mul(&b).unwrap().is_zero());
            let qrows: Vec<Vec<BigRational>> = rows.iter()
                .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
                .collect();
            prop_assert_eq!(rational_rank(&qrows) + b.cols(), a.cols());
        }
    }

    #[test]
    fn hermite_form_is_canonical() {
        let a = IntMatrix::from_rows(&[vec![1, 1, 1, 1], vec![0, -1, 0, -1]]).unwrap();
        let h = row_hermite_form(&a);
        assert_eq!(h, IntMatrix::from_rows(&[vec![1, 0, 1, 0], vec![0, 1, 0, 1]]).unwrap());
        let b = IntMatrix::from_rows(&[vec![0, 2, 0, 2], vec![1, 3, 1, 3], vec![0, 0, 0, 0]]).unwrap();
        assert_eq!(row_hermite_form(&b), IntMatrix::from_rows(&[vec![1, 1, 1, 1], vec![0, 2, 0, 2]]).unwrap());
    }
}
