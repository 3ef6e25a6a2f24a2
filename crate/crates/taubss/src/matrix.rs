//! Dense integer matrices with exact normal-form algorithms.
//!
//! Everything here runs over arbitrary-precision integers: Smith normal form
//! drives all homology and group-presentation computations in this crate, and
//! torsion bookkeeping cannot tolerate overflow.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Row-major dense matrix over `BigInt`.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[BigInt]) {
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = v[i].clone();
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Matrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let p = &self[(i, k)] * &other[(k, j)];
                    out[(i, j)] += p;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v[j]).sum())
            .collect()
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let mut out = Matrix::zero(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let mut out = Matrix::zero(self.rows + other.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..self.cols {
                out[(self.rows + i, j)] = other[(i, j)].clone();
            }
        }
        out
    }

    pub fn from_cols(cols: Vec<Vec<BigInt>>, rows: usize) -> Matrix {
        let mut m = Matrix::zero(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            m.set_col(j, c);
        }
        m
    }

    pub fn submatrix_cols(&self, js: &[usize]) -> Matrix {
        Matrix::from_cols(js.iter().map(|&j| self.col(j)).collect(), self.rows)
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

    /// row[a] += c * row[b]
    fn add_row(&mut self, a: usize, b: usize, c: &BigInt) {
        for j in 0..self.cols {
            let p = c * &self[(b, j)];
            self[(a, j)] += p;
        }
    }

    /// col[a] += c * col[b]
    fn add_col(&mut self, a: usize, b: usize, c: &BigInt) {
        for i in 0..self.rows {
            let p = c * &self[(i, b)];
            self[(i, a)] += p;
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            let v = -self[(a, j)].clone();
            self[(a, j)] = v;
        }
    }

    fn negate_col(&mut self, a: usize) {
        for i in 0..self.rows {
            let v = -self[(i, a)].clone();
            self[(i, a)] = v;
        }
    }
}

/// Smith normal form `u * a * v = d` with `u`, `v` unimodular and `d` diagonal,
/// each diagonal entry nonnegative and dividing the next.
pub struct Smith {
    pub u: Matrix,
    pub v: Matrix,
    pub d: Matrix,
}

impl Smith {
    /// Diagonal entries, including zeros, of length `min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        let n = self.d.rows().min(self.d.cols());
        (0..n).map(|i| self.d[(i, i)].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

pub fn smith(a: &Matrix) -> Smith {
    let mut d = a.clone();
    let mut u = Matrix::identity(a.rows());
    let mut v = Matrix::identity(a.cols());
    let n = a.rows().min(a.cols());

    for k in 0..n {
        loop {
            // Pivot: entry of least nonzero absolute value in d[k.., k..].
            let mut pivot: Option<(usize, usize)> = None;
            for i in k..d.rows() {
                for j in k..d.cols() {
                    if !d[(i, j)].is_zero()
                        && pivot.is_none_or(|p| d[(i, j)].abs() < d[p].abs())
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                return Smith { u, v, d };
            };
            d.swap_rows(k, pi);
            u.swap_rows(k, pi);
            d.swap_cols(k, pj);
            v.swap_cols(k, pj);

            // Clear row and column k; imperfect divisions shrink the pivot,
            // so the loop terminates.
            let mut clean = true;
            for i in k + 1..d.rows() {
                if !d[(i, k)].is_zero() {
                    let q = div_round(&d[(i, k)], &d[(k, k)]);
                    let nq = -&q;
                    d.add_row(i, k, &nq);
                    u.add_row(i, k, &nq);
                    if !d[(i, k)].is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                continue;
            }
            for j in k + 1..d.cols() {
                if !d[(k, j)].is_zero() {
                    let q = div_round(&d[(k, j)], &d[(k, k)]);
                    let nq = -&q;
                    d.add_col(j, k, &nq);
                    v.add_col(j, k, &nq);
                    if !d[(k, j)].is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                continue;
            }

            // Enforce divisibility d[k,k] | d[i,j] on the trailing block.
            let mut fixed = true;
            'outer: for i in k + 1..d.rows() {
                for j in k + 1..d.cols() {
                    if !(&d[(i, j)] % &d[(k, k)]).is_zero() {
                        d.add_row(k, i, &BigInt::one());
                        u.add_row(k, i, &BigInt::one());
                        fixed = false;
                        break 'outer;
                    }
                }
            }
            if fixed {
                break;
            }
        }
        if d[(k, k)].is_negative() {
            d.negate_row(k);
            u.negate_row(k);
        }
    }
    Smith { u, v, d }
}

/// Rounded division: quotient minimizing |a - q*b|.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    let two_r = BigInt::from(2) * r.abs();
    if two_r > b.abs() {
        if (a * b).is_negative() {
            q - 1
        } else {
            q + 1
        }
    } else {
        q
    }
}

/// A basis (as matrix columns) for the integer kernel of `a`.
pub fn kernel(a: &Matrix) -> Matrix {
    let s = smith(a);
    let r = s.rank();
    // a * v has zero columns from r on; kernel basis = those columns of v.
    let ks: Vec<usize> = (r..a.cols()).collect();
    s.v.submatrix_cols(&ks)
}

/// Solve `a x = b` over the integers. Returns one solution if it exists.
pub fn solve(a: &Matrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(a.rows(), b.len());
    let s = smith(a);
    let ub = s.u.mul_vec(b);
    let n = a.rows().min(a.cols());
    let mut y = vec![BigInt::zero(); a.cols()];
    for (i, ubi) in ub.iter().enumerate() {
        let di = if i < n { s.d[(i, i)].clone() } else { BigInt::zero() };
        if di.is_zero() {
            if !ubi.is_zero() {
                return None;
            }
        } else {
            let (q, r) = ubi.div_rem(&di);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        }
    }
    Some(s.v.mul_vec(&y))
}

/// Column-style Hermite normal form: canonical basis matrix for the column
/// span (lattice) of `a`. Zero columns are dropped; pivots are positive and
/// entries left of each pivot are reduced into `[0, pivot)`.
pub fn hnf(a: &Matrix) -> Matrix {
    let mut m = a.clone();
    let rows = m.rows();
    let mut pivot_col = 0usize;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for i in 0..rows {
        if pivot_col >= m.cols() {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for j in pivot_col..m.cols() {
                if !m[(i, j)].is_zero()
                    && best.is_none_or(|bj| m[(i, j)].abs() < m[(i, bj)].abs())
                {
                    best = Some(j);
                }
            }
            let Some(bj) = best else { break };
            m.swap_cols(pivot_col, bj);
            let mut done = true;
            for j in pivot_col + 1..m.cols() {
                if !m[(i, j)].is_zero() {
                    let q = div_round(&m[(i, j)], &m[(i, pivot_col)]);
                    let nq = -&q;
                    m.add_col(j, pivot_col, &nq);
                    if !m[(i, j)].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if pivot_col < m.cols() && !m[(i, pivot_col)].is_zero() {
            if m[(i, pivot_col)].is_negative() {
                m.negate_col(pivot_col);
            }
            pivots.push((i, pivot_col));
            pivot_col += 1;
        }
    }
    for &(i, j) in pivots.iter() {
        for j2 in 0..j {
            let q = m[(i, j2)].div_floor(&m[(i, j)]);
            if !q.is_zero() {
                let nq = -&q;
                m.add_col(j2, j, &nq);
            }
        }
    }
    let keep: Vec<usize> = (0..m.cols()).filter(|&j| !m.col(j).iter().all(|x| x.is_zero())).collect();
    m.submatrix_cols(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn smith_reconstructs() {
        let a = Matrix::from_i64(&[
            &[-6, 111, -36, 6],
            &[5, -672, 210, 74],
            &[0, -255, 81, 24],
            &[-7, 255, -81, -10],
        ]);
        let s = smith(&a);
        assert_eq!(s.u.mul(&a).mul(&s.v), s.d);
        let diag = s.diagonal();
        assert_eq!(diag, vec![bi(1), bi(3), bi(21), bi(0)]);
        for w in diag.windows(2) {
            if !w[1].is_zero() {
                assert!((&w[1] % &w[0]).is_zero());
            }
        }
    }

    #[test]
    fn solve_and_kernel() {
        let a = Matrix::from_i64(&[&[2, 4], &[1, 2]]);
        let sol = solve(&a, &[bi(6), bi(3)]).unwrap();
        assert_eq!(a.mul_vec(&sol), vec![bi(6), bi(3)]);
        assert!(solve(&a, &[bi(1), bi(0)]).is_none());
        let k = kernel(&a);
        assert_eq!(k.cols(), 1);
        assert!(a.mul(&k).is_zero());
    }

    #[test]
    fn hnf_canonical() {
        let a = Matrix::from_i64(&[&[4, 2], &[0, 0]]);
        let b = Matrix::from_i64(&[&[2, 28], &[0, 0]]);
        assert_eq!(hnf(&a), hnf(&b));
        let h = hnf(&a);
        assert_eq!(h.cols(), 1);
        assert_eq!(h[(0, 0)], bi(2));
    }

    #[test]
    fn hnf_empty_and_zero() {
        let z = Matrix::zero(3, 2);
        assert_eq!(hnf(&z).cols(), 0);
        let e = Matrix::zero(2, 0);
        assert_eq!(hnf(&e).cols(), 0);
    }
}
