//! Exact integer and rational linear algebra: saturated kernels, Hermite and
//! Smith normal forms, determinants. Everything runs over arbitrary-precision
//! integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows; `cols` is required so that 0-row matrices
    /// keep their width.
    pub fn from_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Self {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged matrix");
            data.extend(row);
        }
        IntMatrix {
            rows: r,
            cols,
            data,
        }
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
            cols,
        )
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

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
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

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, k: &BigInt) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * k).collect(),
        }
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let x = self.get(i, j);
                    if i == j {
                        x.is_one()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        IntMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &IntMatrix) -> IntMatrix {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    pub fn to_rational(&self) -> Vec<Vec<BigRational>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|x| BigRational::from_integer(x.clone()))
                    .collect()
            })
            .collect()
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

    /// row[dst] += k * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * k;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * k;
            self.data[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -std::mem::take(&mut self.data[r * self.cols + j]);
            self.data[r * self.cols + j] = v;
        }
    }

    /// Replaces rows (a, b) by (x*a + y*b, u*a + v*b).
    fn combine_rows(&mut self, a: usize, b: usize, x: &BigInt, y: &BigInt, u: &BigInt, v: &BigInt) {
        for j in 0..self.cols {
            let ra = self.data[a * self.cols + j].clone();
            let rb = self.data[b * self.cols + j].clone();
            self.data[a * self.cols + j] = x * &ra + y * &rb;
            self.data[b * self.cols + j] = u * &ra + v * &rb;
        }
    }
}

/// Row-style Hermite normal form of the lattice spanned by `vectors`:
/// echelon rows with positive pivots and reduced entries above each pivot.
/// Zero rows are dropped.
pub fn hnf_rows(vectors: &[Vec<BigInt>], dim: usize) -> Vec<Vec<BigInt>> {
    let mut m = IntMatrix::from_rows(vectors.to_vec(), dim);
    let mut r = 0;
    for c in 0..dim {
        if r == m.rows {
            break;
        }
        for i in r + 1..m.rows {
            if m.get(i, c).is_zero() {
                continue;
            }
            let a = m.get(r, c).clone();
            let b = m.get(i, c).clone();
            let e = a.extended_gcd(&b);
            let g = e.gcd;
            m.combine_rows(r, i, &e.x, &e.y, &(-(&b / &g)), &(&a / &g));
        }
        if m.get(r, c).is_zero() {
            continue;
        }
        if m.get(r, c).is_negative() {
            m.negate_row(r);
        }
        let piv = m.get(r, c).clone();
        for i in 0..r {
            let q = m.get(i, c).div_floor(&piv);
            m.add_row_multiple(i, r, &-q);
        }
        r += 1;
    }
    m.to_rows().into_iter().take(r).collect()
}

/// A saturated Z-basis of {x in Z^n : A x = 0}, in Hermite normal form.
pub fn kernel_basis(a: &IntMatrix) -> Vec<Vec<BigInt>> {
    let m = a.rows();
    let n = a.cols();
    // Row j of `w` is [column j of A | e_j]; unimodular row operations keep
    // the right block a basis of Z^n, so the rows whose left block vanishes
    // span a saturated sublattice.
    let mut w = IntMatrix::zeros(n, m + n);
    for j in 0..n {
        for i in 0..m {
            w.set(j, i, a.get(i, j).clone());
        }
        w.set(j, m + j, BigInt::one());
    }
    let mut r = 0;
    for c in 0..m {
        if r == n {
            break;
        }
        for i in r + 1..n {
            if w.get(i, c).is_zero() {
                continue;
            }
            let x = w.get(r, c).clone();
            let y = w.get(i, c).clone();
            let e = x.extended_gcd(&y);
            let g = e.gcd;
            w.combine_rows(r, i, &e.x, &e.y, &(-(&y / &g)), &(&x / &g));
        }
        if !w.get(r, c).is_zero() {
            r += 1;
        }
    }
    let kernel: Vec<Vec<BigInt>> = (r..n).map(|i| w.row(i)[m..].to_vec()).collect();
    hnf_rows(&kernel, n)
}

/// Smith normal form with transforms: `u * a * v = diag`, `v_inv = v^-1`.
#[derive(Clone, Debug)]
pub struct Smith {
    /// Nonnegative diagonal entries d_0 | d_1 | ..., length min(rows, cols).
    pub diag: Vec<BigInt>,
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.diag.iter().filter(|d| !d.is_zero()).count()
    }
}

pub fn smith(a: &IntMatrix) -> Smith {
    let (r, c) = (a.rows(), a.cols());
    let mut m = a.clone();
    let mut u = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);
    let mut v_inv = IntMatrix::identity(c);
    let k = r.min(c);
    let mut diag = Vec::with_capacity(k);

    for t in 0..k {
        loop {
            // smallest nonzero entry of the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    let x = m.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    match best {
                        Some((bi, bj)) if m.get(bi, bj).abs() <= x.abs() => {}
                        _ => best = Some((i, j)),
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break;
            };
            m.swap_rows(t, pi);
            u.swap_rows(t, pi);
            m.swap_cols(t, pj);
            v.swap_cols(t, pj);
            v_inv.swap_rows(t, pj);

            let piv = m.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..r {
                let q = m.get(i, t).div_floor(&piv);
                let nq = -q;
                m.add_row_multiple(i, t, &nq);
                u.add_row_multiple(i, t, &nq);
                if !m.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..c {
                let q = m.get(t, j).div_floor(&piv);
                let nq = -&q;
                m.add_col_multiple(j, t, &nq);
                v.add_col_multiple(j, t, &nq);
                v_inv.add_row_multiple(t, j, &q);
                if !m.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let mut offender = None;
            'scan: for i in t + 1..r {
                for j in t + 1..c {
                    if !m.get(i, j).is_multiple_of(&piv) {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    m.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if m.get(t, t).is_negative() {
            m.negate_row(t);
            u.negate_row(t);
        }
        diag.push(m.get(t, t).clone());
    }
    Smith { diag, u, v, v_inv }
}

/// Order of the cokernel of a square integer matrix, or `None` if singular.
pub fn cokernel_order(a: &IntMatrix) -> Option<BigInt> {
    assert_eq!(a.rows(), a.cols(), "cokernel order needs a square matrix");
    let s = smith(a);
    if s.diag.iter().any(Zero::is_zero) {
        return None;
    }
    Some(s.diag.iter().product())
}

/// Invariant factors (excluding ones) of Z^cols / rowspan(relations).
/// A zero entry denotes a free Z summand.
pub fn abelian_invariants(relations: &IntMatrix) -> Vec<BigInt> {
    let s = smith(relations);
    let mut out: Vec<BigInt> = s.diag.iter().filter(|d| !d.is_one()).cloned().collect();
    out.extend(std::iter::repeat_n(BigInt::zero(), relations.cols().saturating_sub(s.diag.len())));
    out
}

/// Order of Z^cols / rowspan(relations), `None` if infinite.
pub fn presented_order(relations: &IntMatrix) -> Option<BigInt> {
    let inv = abelian_invariants(relations);
    if inv.iter().any(Zero::is_zero) {
        return None;
    }
    Some(inv.iter().product())
}

/// Determinant of a square rational matrix by Gaussian elimination.
pub fn det_rational(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&i| !a[i][col].is_zero()) else {
            return BigRational::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let piv = a[col][col].clone();
        det *= &piv;
        for i in col + 1..n {
            if a[i][col].is_zero() {
                continue;
            }
            let f = &a[i][col] / &piv;
            for j in col..n {
                let v = &f * &a[col][j];
                a[i][j] -= v;
            }
        }
    }
    det
}

/// Fraction-free (Bareiss) determinant of a square integer matrix.
pub fn det_bareiss(a: &IntMatrix) -> BigInt {
    let n = a.rows();
    assert_eq!(n, a.cols());
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.to_rows();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}
