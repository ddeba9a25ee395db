//! Dense integer matrices with exact elimination: Hermite-style column echelon,
//! Smith normal form with transforms, Bareiss determinant and the
//! division-free Berkowitz characteristic polynomial.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{internal, pre, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ZMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for ZMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ZMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ZMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ZMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// Result of [`ZMatrix::smith`]: `u * a * v` is diagonal with entries `diag`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: ZMatrix,
    pub v: ZMatrix,
    pub diag: Vec<BigInt>,
}

impl ZMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ZMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ZMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<BigInt>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return pre("ragged matrix rows");
        }
        Ok(ZMatrix { rows: r, cols: c, data: rows.iter().flatten().cloned().collect() })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix rows");
        ZMatrix {
            rows: rows.len(),
            cols: c,
            data: rows.iter().flat_map(|r| r.iter().map(|&x| BigInt::from(x))).collect(),
        }
    }

    pub fn from_columns(n_rows: usize, cols: &[Vec<BigInt>]) -> Self {
        Self::from_fn(n_rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn diagonal(entries: &[BigInt]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i].clone() } else { BigInt::zero() })
    }

    pub fn block_diag(blocks: &[ZMatrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(n, m);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<BigInt>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &ZMatrix) -> ZMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn add(&self, other: &ZMatrix) -> ZMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ZMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &ZMatrix) -> ZMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ZMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> ZMatrix {
        ZMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * k).collect() }
    }

    pub fn neg(&self) -> ZMatrix {
        self.scale(&BigInt::from(-1))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.rows)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> ZMatrix {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[BigInt], y: &[BigInt]) -> BigInt {
        dot(x, &self.mul_vec(y))
    }

    /// `B^T A B` for a matrix whose columns are vectors.
    pub fn congruence(&self, b: &ZMatrix) -> ZMatrix {
        b.transpose().mul(&self.mul(b))
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += k * row[src]
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let t = &self[(src, j)] * k;
            self[(dst, j)] += t;
        }
    }

    /// col[dst] += k * col[src]
    pub fn add_col_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let t = &self[(i, src)] * k;
            self[(i, dst)] += t;
        }
    }

    pub fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let t = -&self[(i, j)];
            self[(i, j)] = t;
        }
    }

    pub fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let t = -&self[(i, j)];
            self[(i, j)] = t;
        }
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(p) => {
                        a.swap_rows(k, p);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = v;
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * &a[(n - 1, n - 1)]
    }

    /// Coefficients of `det(xI - A)`, leading coefficient first.
    pub fn charpoly(&self) -> Vec<BigInt> {
        assert!(self.is_square(), "characteristic polynomial of non-square matrix");
        let n = self.rows;
        let mut c: Vec<BigInt> = vec![BigInt::one()];
        for r in 0..n {
            // Principal r x r block is A[0..r, 0..r]; append row/column r.
            let a = self[(r, r)].clone();
            let col: Vec<BigInt> = (0..r).map(|i| self[(i, r)].clone()).collect();
            let row: Vec<BigInt> = (0..r).map(|j| self[(r, j)].clone()).collect();
            let mut t = Vec::with_capacity(r + 2);
            t.push(BigInt::one());
            t.push(-a);
            let mut s = col;
            for _ in 0..r {
                t.push(-dot(&row, &s));
                s = (0..r).map(|i| (0..r).map(|j| &self[(i, j)] * &s[j]).sum()).collect();
            }
            let mut next = vec![BigInt::zero(); r + 2];
            for (i, slot) in next.iter_mut().enumerate() {
                for (j, cj) in c.iter().enumerate().take(i + 1) {
                    if i - j < t.len() {
                        *slot += &t[i - j] * cj;
                    }
                }
            }
            c = next;
        }
        c
    }

    /// Column echelon form: returns `(h, u, rank)` with `self * u = h`, `u`
    /// unimodular and the first `rank` columns of `h` in echelon form.
    pub fn column_echelon(&self) -> (ZMatrix, ZMatrix, usize) {
        let mut h = self.clone();
        let mut u = Self::identity(self.cols);
        let mut k = 0;
        for i in 0..self.rows {
            if k == self.cols {
                break;
            }
            for j in k + 1..self.cols {
                if h[(i, j)].is_zero() {
                    continue;
                }
                if h[(i, k)].is_zero() {
                    h.swap_cols(k, j);
                    u.swap_cols(k, j);
                    continue;
                }
                let a = h[(i, k)].clone();
                let b = h[(i, j)].clone();
                let (g, s, t) = xgcd(&a, &b);
                let bg = &b / &g;
                let ag = &a / &g;
                combine_cols(&mut h, k, j, &s, &t, &bg, &ag);
                combine_cols(&mut u, k, j, &s, &t, &bg, &ag);
            }
            if !h[(i, k)].is_zero() {
                k += 1;
            }
        }
        (h, u, k)
    }

    pub fn rank(&self) -> usize {
        self.column_echelon().2
    }

    /// Saturated integer kernel; columns of the result form a basis of
    /// `{x in Z^n : A x = 0}`.
    pub fn kernel(&self) -> ZMatrix {
        let (_, u, k) = self.column_echelon();
        let cols: Vec<usize> = (k..self.cols).collect();
        let rows: Vec<usize> = (0..self.cols).collect();
        u.submatrix(&rows, &cols)
    }

    pub fn smith(&self) -> Smith {
        let (r, c) = (self.rows, self.cols);
        let mut d = self.clone();
        let mut u = Self::identity(r);
        let mut v = Self::identity(c);
        let steps = r.min(c);
        let mut diag = Vec::with_capacity(steps);
        for t in 0..steps {
            let Some((pi, pj)) = min_abs_entry(&d, t) else {
                diag.extend(std::iter::repeat_n(BigInt::zero(), steps - t));
                break;
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);
            loop {
                let mut clean = true;
                for i in t + 1..r {
                    if d[(i, t)].is_zero() {
                        continue;
                    }
                    let q = -d[(i, t)].div_floor(&d[(t, t)]);
                    d.add_row_multiple(i, t, &q);
                    u.add_row_multiple(i, t, &q);
                    if !d[(i, t)].is_zero() {
                        clean = false;
                    }
                }
                for j in t + 1..c {
                    if d[(t, j)].is_zero() {
                        continue;
                    }
                    let q = -d[(t, j)].div_floor(&d[(t, t)]);
                    d.add_col_multiple(j, t, &q);
                    v.add_col_multiple(j, t, &q);
                    if !d[(t, j)].is_zero() {
                        clean = false;
                    }
                }
                if !clean {
                    let mut best: Option<(usize, usize)> = None;
                    let cand = (t..r).map(|i| (i, t)).chain((t + 1..c).map(|j| (t, j)));
                    for (i, j) in cand {
                        if d[(i, j)].is_zero() {
                            continue;
                        }
                        if best.is_none_or(|(bi, bj)| d[(i, j)].abs() < d[(bi, bj)].abs()) {
                            best = Some((i, j));
                        }
                    }
                    let (bi, bj) = best.expect("nonzero entry present");
                    d.swap_rows(t, bi);
                    u.swap_rows(t, bi);
                    d.swap_cols(t, bj);
                    v.swap_cols(t, bj);
                    continue;
                }
                let bad = (t + 1..r).find(|&i| {
                    (t + 1..c).any(|j| !d[(i, j)].is_multiple_of(&d[(t, t)]))
                });
                match bad {
                    Some(i) => {
                        let one = BigInt::one();
                        d.add_row_multiple(t, i, &one);
                        u.add_row_multiple(t, i, &one);
                    }
                    None => break,
                }
            }
            if d[(t, t)].is_negative() {
                d.negate_row(t);
                u.negate_row(t);
            }
            diag.push(d[(t, t)].clone());
        }
        Smith { u, v, diag }
    }

    pub fn inverse_rational(&self) -> Option<Vec<Vec<BigRational>>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut row: Vec<BigRational> =
                    self.row(i).iter().map(|x| BigRational::from_integer(x.clone())).collect();
                row.extend((0..n).map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                }));
                row
            })
            .collect();
        for k in 0..n {
            let p = (k..n).find(|&i| !a[i][k].is_zero())?;
            a.swap(k, p);
            let inv = a[k][k].recip();
            for x in a[k].iter_mut() {
                *x = &*x * &inv;
            }
            for i in 0..n {
                if i != k && !a[i][k].is_zero() {
                    let f = a[i][k].clone();
                    for j in 0..2 * n {
                        let t = &a[k][j] * &f;
                        a[i][j] -= t;
                    }
                }
            }
        }
        Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
    }

    /// Inverse of a unimodular matrix, as an integer matrix.
    pub fn inverse_unimodular(&self) -> Result<ZMatrix> {
        let Some(inv) = self.inverse_rational() else {
            return pre("matrix is singular");
        };
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if !inv[i][j].is_integer() {
                    return pre("matrix is not unimodular");
                }
                out[(i, j)] = inv[i][j].to_integer();
            }
        }
        Ok(out)
    }

    /// Some integer solution of `A x = b`, if one exists.
    pub fn solve_integer(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(b.len(), self.rows);
        let s = self.smith();
        let ub = s.u.mul_vec(b);
        let mut y = vec![BigInt::zero(); self.cols];
        for (i, ubi) in ub.iter().enumerate() {
            let di = s.diag.get(i).cloned().unwrap_or_else(BigInt::zero);
            if di.is_zero() {
                if !ubi.is_zero() {
                    return None;
                }
            } else {
                if !ubi.is_multiple_of(&di) {
                    return None;
                }
                y[i] = ubi / &di;
            }
        }
        Some(s.v.mul_vec(&y))
    }
}

fn combine_cols(
    m: &mut ZMatrix,
    k: usize,
    j: usize,
    s: &BigInt,
    t: &BigInt,
    bg: &BigInt,
    ag: &BigInt,
) {
    for i in 0..m.rows {
        let ck = m[(i, k)].clone();
        let cj = m[(i, j)].clone();
        m[(i, k)] = s * &ck + t * &cj;
        m[(i, j)] = bg * &ck - ag * &cj;
    }
}

fn min_abs_entry(d: &ZMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..d.rows {
        for j in t..d.cols {
            if d[(i, j)].is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| d[(i, j)].abs() < d[(bi, bj)].abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).map(|(x, y)| x * y).sum()
}

/// Nonnegative gcd of all entries; zero for the zero vector.
pub fn content(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// Extended gcd with `g = s a + t b`, `g >= 0`.
pub fn xgcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

pub fn int_vec(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Unimodular matrix whose first column is the primitive vector `v`.
pub fn complete_to_basis(v: &[BigInt]) -> Result<ZMatrix> {
    let n = v.len();
    if !content(v).is_one() {
        return pre("vector is not primitive");
    }
    let mut w = v.to_vec();
    // Row operations R with R v = e_1; `inv` accumulates R^{-1}.
    let mut inv = ZMatrix::identity(n);
    loop {
        let nz: Vec<usize> = (0..n).filter(|&i| !w[i].is_zero()).collect();
        if nz.len() == 1 {
            let p = nz[0];
            if p != 0 {
                w.swap(0, p);
                inv.swap_cols(0, p);
            }
            if w[0].is_negative() {
                w[0] = -&w[0];
                inv.negate_col(0);
            }
            break;
        }
        let p = *nz.iter().min_by_key(|&&i| w[i].abs()).expect("nonzero entries");
        for &i in &nz {
            if i == p {
                continue;
            }
            let q = w[i].div_floor(&w[p]);
            // row i -= q row p  ==>  inverse: col p += q col i
            w[i] = &w[i] - &q * &w[p];
            inv.add_col_multiple(p, i, &q);
        }
    }
    if inv.col(0) != v {
        return internal("basis completion failed to reproduce the input vector");
    }
    Ok(inv)
}

/// Integral LLL reduction (delta = 3/4) of a positive definite Gram matrix.
/// Returns the unimodular `h` whose columns express the reduced basis in the
/// input basis; the reduced Gram matrix is `h^T g h`.
pub fn lll_gram(g: &ZMatrix) -> Result<ZMatrix> {
    let n = g.nrows();
    let mut g = g.clone();
    let mut h = ZMatrix::identity(n);
    if n <= 1 {
        return Ok(h);
    }
    // 1-based bookkeeping: d[0] = 1, d[i] for the i-th leading minor.
    let mut d = vec![BigInt::zero(); n + 1];
    d[0] = BigInt::one();
    let mut lam = ZMatrix::zeros(n + 1, n + 1);
    d[1] = g[(0, 0)].clone();
    if !d[1].is_positive() {
        return pre("LLL input is not positive definite");
    }
    let mut k = 2;
    let mut kmax = 1;
    let four = BigInt::from(4);
    let three = BigInt::from(3);
    while k <= n {
        if k > kmax {
            kmax = k;
            for j in 1..=k {
                let mut u = g[(k - 1, j - 1)].clone();
                for i in 1..j {
                    u = (&d[i] * &u - &lam[(k, i)] * &lam[(j, i)]) / &d[i - 1];
                }
                if j < k {
                    lam[(k, j)] = u;
                } else {
                    if !u.is_positive() {
                        return pre("LLL input is not positive definite");
                    }
                    d[k] = u;
                }
            }
        }
        lll_red(&mut g, &mut h, &mut lam, &d, k, k - 1);
        let lhs = &four * &d[k] * &d[k - 2];
        let rhs = &three * &d[k - 1] * &d[k - 1] - &four * &lam[(k, k - 1)] * &lam[(k, k - 1)];
        if lhs < rhs {
            // swap b_k and b_{k-1}
            g.swap_rows(k - 1, k - 2);
            g.swap_cols(k - 1, k - 2);
            h.swap_cols(k - 1, k - 2);
            for j in 1..k - 1 {
                let t = lam[(k, j)].clone();
                lam[(k, j)] = lam[(k - 1, j)].clone();
                lam[(k - 1, j)] = t;
            }
            let l = lam[(k, k - 1)].clone();
            let b = (&d[k - 2] * &d[k] + &l * &l) / &d[k - 1];
            for i in k + 1..=kmax {
                let t = lam[(i, k)].clone();
                lam[(i, k)] = (&d[k] * &lam[(i, k - 1)] - &l * &t) / &d[k - 1];
                lam[(i, k - 1)] = (&b * &t + &l * &lam[(i, k)]) / &d[k];
            }
            d[k - 1] = b;
            if k > 2 {
                k -= 1;
            }
        } else {
            for l in (1..k - 1).rev() {
                lll_red(&mut g, &mut h, &mut lam, &d, k, l);
            }
            k += 1;
        }
    }
    Ok(h)
}

fn lll_red(g: &mut ZMatrix, h: &mut ZMatrix, lam: &mut ZMatrix, d: &[BigInt], k: usize, l: usize) {
    let two = BigInt::from(2);
    if (&two * lam[(k, l)].abs()) <= d[l] {
        return;
    }
    // q = round(lam / d_l)
    let q = (&two * &lam[(k, l)] + &d[l]).div_floor(&(&two * &d[l]));
    let mq = -&q;
    h.add_col_multiple(k - 1, l - 1, &mq);
    g.add_row_multiple(k - 1, l - 1, &mq);
    g.add_col_multiple(k - 1, l - 1, &mq);
    lam[(k, l)] = &lam[(k, l)] - &q * &d[l];
    for i in 1..l {
        let t = &q * &lam[(l, i)];
        lam[(k, i)] -= t;
    }
}

/// Size-reduce the columns of `b` for the Euclidean inner product.
pub fn lll_columns(b: &ZMatrix) -> ZMatrix {
    if b.ncols() == 0 {
        return b.clone();
    }
    let g = b.transpose().mul(b);
    match lll_gram(&g) {
        Ok(h) => b.mul(&h),
        Err(_) => b.clone(),
    }
}

/// Random unimodular matrix and its inverse, built from `steps` elementary
/// operations with small coefficients.
pub fn random_unimodular<R: rand::Rng + ?Sized>(n: usize, steps: usize, rng: &mut R) -> (ZMatrix, ZMatrix) {
    let mut p = ZMatrix::identity(n);
    let mut q = ZMatrix::identity(n);
    if n == 0 {
        return (p, q);
    }
    for _ in 0..steps {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        match rng.gen_range(0..6) {
            0 => {
                p.swap_rows(i, j);
                q.swap_cols(i, j);
            }
            1 => {
                p.negate_row(i);
                q.negate_col(i);
            }
            _ if i != j => {
                let k = BigInt::from(*[-2i64, -1, 1, 2].get(rng.gen_range(0..4)).expect("index"));
                // p <- E p with E = I + k e_i e_j^T; q <- q E^{-1}
                p.add_row_multiple(i, j, &k);
                q.add_col_multiple(j, i, &-k);
            }
            _ => {}
        }
    }
    (p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> ZMatrix {
        ZMatrix::from_i64(rows)
    }

    #[test]
    fn det_and_charpoly_small() {
        let a = m(&[&[2, -1, 0], &[-1, 2, -1], &[0, -1, 2]]);
        assert_eq!(a.det(), BigInt::from(4));
        // x^3 - 6x^2 + 10x - 4
        assert_eq!(a.charpoly(), int_vec(&[1, -6, 10, -4]));
    }

    #[test]
    fn smith_of_hyperbolic_and_diagonal() {
        let a = m(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let s = a.smith();
        assert_eq!(s.diag, int_vec(&[2, 6, 12]));
        let d = s.u.mul(&a).mul(&s.v);
        assert_eq!(d, ZMatrix::diagonal(&s.diag));
        assert!(s.u.det().abs().is_one() && s.v.det().abs().is_one());
    }

    #[test]
    fn kernel_is_saturated() {
        let a = m(&[&[2, 4, 6]]);
        let k = a.kernel();
        assert_eq!(k.ncols(), 2);
        assert!(a.mul(&k).is_zero());
        let s = k.smith();
        assert!(s.diag.iter().all(|d| d.is_one()));
    }

    #[test]
    fn completion_has_unit_determinant() {
        let v = int_vec(&[6, 10, 15]);
        let b = complete_to_basis(&v).unwrap();
        assert_eq!(b.col(0), v);
        assert!(b.det().abs().is_one());
        assert!(complete_to_basis(&int_vec(&[2, 4])).is_err());
    }

    #[test]
    fn integer_solve() {
        let a = m(&[&[2, 0], &[0, 3]]);
        assert_eq!(a.solve_integer(&int_vec(&[4, 9])), Some(int_vec(&[2, 3])));
        assert_eq!(a.solve_integer(&int_vec(&[1, 0])), None);
    }
    #[test]
    fn lll_shortens_skewed_basis() {
        let b = m(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let skew = m(&[&[1, 5, 17], &[0, 1, 9], &[0, 0, 1]]);
        let c = b.mul(&skew);
        let r = lll_columns(&c);
        assert!(r.det().abs().is_one());
        for j in 0..3 {
            let norm: BigInt = r.col(j).iter().map(|x| x * x).sum();
            assert!(norm.is_one());
        }
    }
}
