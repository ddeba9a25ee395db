//! Free abelian groups with an integral involution: the Comessatti
//! characteristic, the standard block form, eigen-sublattices and the
//! equivalent conditions for an eigen-splitting.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{internal, pre, Result};
use crate::f2::{Bits, F2Map};
use crate::lattice::{IntegerLattice, Sublattice, Vector};
use crate::zmat::ZMatrix;

#[derive(Clone, Debug)]
pub struct InvolutiveModule {
    sigma: ZMatrix,
    gram: Option<IntegerLattice>,
}

/// Reduction mod 2 of an integer matrix, as a map on column vectors.
pub fn mod2(m: &ZMatrix) -> F2Map {
    let images = (0..m.ncols())
        .map(|j| Bits::from_indices(m.nrows(), (0..m.nrows()).filter(|&i| m[(i, j)].is_odd())))
        .collect();
    F2Map::new(m.nrows(), images)
}

pub fn is_involution(m: &ZMatrix) -> bool {
    m.is_square() && m.mul(m).is_identity()
}

/// `rank_F2(1 + sigma)` for an integral involution.
pub fn comessatti_of(sigma: &ZMatrix) -> Result<usize> {
    if !is_involution(sigma) {
        return pre("matrix is not an involution (sigma^2 != I)");
    }
    Ok(lambda_unchecked(sigma))
}

fn lambda_unchecked(sigma: &ZMatrix) -> usize {
    mod2(&sigma.add(&ZMatrix::identity(sigma.nrows()))).rank()
}

#[derive(Clone, Debug, Serialize)]
pub struct ComessattiDecomposition {
    pub rank_plus: usize,
    pub rank_minus: usize,
    pub lambda: usize,
    /// Columns form a basis in which sigma is `diag(+1)^a + diag(-1)^b + swap^lambda`.
    #[serde(skip)]
    pub basis_change: Option<ZMatrix>,
}

impl ComessattiDecomposition {
    pub fn plus_blocks(&self) -> usize {
        self.rank_plus - self.lambda
    }

    pub fn minus_blocks(&self) -> usize {
        self.rank_minus - self.lambda
    }

    /// The standard form matrix the basis change conjugates sigma into.
    pub fn standard_form(&self) -> ZMatrix {
        let mut blocks = Vec::new();
        let a = self.plus_blocks();
        let b = self.minus_blocks();
        if a > 0 {
            blocks.push(ZMatrix::identity(a));
        }
        if b > 0 {
            blocks.push(ZMatrix::identity(b).neg());
        }
        for _ in 0..self.lambda {
            blocks.push(ZMatrix::from_i64(&[&[0, 1], &[1, 0]]));
        }
        ZMatrix::block_diag(&blocks)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SplittingReport {
    pub trivial_mod2_action: bool,
    pub lambda_zero: bool,
    pub eigen_splitting: bool,
    pub all_traces_even: bool,
}

impl SplittingReport {
    pub fn consistent(&self) -> bool {
        let v = self.trivial_mod2_action;
        self.lambda_zero == v && self.eigen_splitting == v && self.all_traces_even == v
    }
}

impl InvolutiveModule {
    pub fn new(sigma: ZMatrix, gram: Option<IntegerLattice>) -> Result<Self> {
        if !sigma.is_square() || sigma.nrows() == 0 {
            return pre("sigma must be a nonempty square matrix");
        }
        if !is_involution(&sigma) {
            return pre("sigma is not an involution (sigma^2 != I)");
        }
        if let Some(l) = &gram {
            if l.rank() != sigma.nrows() {
                return pre("gram and sigma have different ranks");
            }
            if &l.gram().congruence(&sigma) != l.gram() {
                return pre("sigma is not an isometry of the gram form");
            }
        }
        Ok(InvolutiveModule { sigma, gram })
    }

    pub fn rank(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn sigma(&self) -> &ZMatrix {
        &self.sigma
    }

    pub fn gram(&self) -> Option<&IntegerLattice> {
        self.gram.as_ref()
    }

    pub fn comessatti(&self) -> usize {
        lambda_unchecked(&self.sigma)
    }

    pub fn direct_sum(&self, other: &InvolutiveModule) -> InvolutiveModule {
        let gram = match (&self.gram, &other.gram) {
            (Some(a), Some(b)) => Some(a.direct_sum(b)),
            _ => None,
        };
        InvolutiveModule {
            sigma: ZMatrix::block_diag(&[self.sigma.clone(), other.sigma.clone()]),
            gram,
        }
    }

    /// The same involution in the basis given by the columns of `p`
    /// (`pinv` its inverse): `pinv * sigma * p`.
    pub fn change_basis(&self, p: &ZMatrix, pinv: &ZMatrix) -> Result<InvolutiveModule> {
        if !pinv.mul(p).is_identity() {
            return pre("basis change is not invertible over the integers");
        }
        let gram = match &self.gram {
            Some(l) => Some(IntegerLattice::new(l.gram().congruence(p))?),
            None => None,
        };
        InvolutiveModule::new(pinv.mul(&self.sigma).mul(p), gram)
    }

    fn eigen_basis(&self, sign: i64) -> ZMatrix {
        let n = self.rank();
        let a = self.sigma.sub(&ZMatrix::identity(n).scale(&BigInt::from(sign)));
        crate::zmat::lll_columns(&a.kernel())
    }

    /// `M^sigma` (sign = +1) or `M^{sigma-}` (sign = -1) with restricted form.
    pub fn eigen_sublattice(&self, sign: i64) -> Result<Sublattice> {
        if sign != 1 && sign != -1 {
            return pre("eigenvalue sign must be +1 or -1");
        }
        let Some(l) = &self.gram else {
            return pre("eigen-sublattice needs a gram matrix");
        };
        Ok(Sublattice::from_basis(l, self.eigen_basis(sign)))
    }

    pub fn decompose(&self) -> Result<ComessattiDecomposition> {
        let n = self.rank();
        let lambda = self.comessatti();
        let plus = self.eigen_basis(1);
        let minus = self.eigen_basis(-1);
        let (p, q) = (plus.ncols(), minus.ncols());
        if p + q != n {
            return internal("eigenspace ranks do not add up to the rank");
        }
        let one_plus = self.sigma.add(&ZMatrix::identity(n));
        let one_minus = ZMatrix::identity(n).sub(&self.sigma);
        // x_i: basis vectors whose (1 + sigma)-images are independent mod 2.
        let mut ech = crate::f2::Echelon::new(n, 0);
        let mut xs: Vec<Vector> = Vec::new();
        for j in 0..n {
            let img = one_plus.col(j);
            let bits = Bits::from_indices(n, (0..n).filter(|&i| img[i].is_odd()));
            if ech.insert(bits, Bits::zeros(0)).is_none() {
                let mut e = vec![BigInt::zero(); n];
                e[j] = BigInt::one();
                xs.push(e);
            }
        }
        if xs.len() != lambda {
            return internal("Comessatti characteristic disagrees with chosen lifts");
        }
        let ys: Vec<Vector> = xs.iter().map(|x| one_plus.mul_vec(x)).collect();
        let zs: Vec<Vector> = xs.iter().map(|x| one_minus.mul_vec(x)).collect();
        let big_y = lift_basis(&plus, &ys)?;
        let big_z = lift_basis(&minus, &zs)?;
        let mut cols: Vec<Vector> = Vec::with_capacity(n);
        cols.extend((lambda..p).map(|i| big_y.col(i)));
        cols.extend((lambda..q).map(|i| big_z.col(i)));
        for i in 0..lambda {
            let yi = big_y.col(i);
            let zi = big_z.col(i);
            let x: Vector = (0..n)
                .map(|k| &xs[i][k] + (&yi[k] - &ys[i][k]) / 2 + (&zi[k] - &zs[i][k]) / 2)
                .collect();
            let sx = self.sigma.mul_vec(&x);
            cols.push(x);
            cols.push(sx);
        }
        let b = ZMatrix::from_columns(n, &cols);
        let binv = b.inverse_unimodular().map_err(|_| {
            crate::error::Error::Internal("standard-form basis is not unimodular".into())
        })?;
        let dec = ComessattiDecomposition {
            rank_plus: p,
            rank_minus: q,
            lambda,
            basis_change: Some(b.clone()),
        };
        if binv.mul(&self.sigma).mul(&b) != dec.standard_form() {
            return internal("standard-form conjugation check failed");
        }
        Ok(dec)
    }

    /// Evaluates the four equivalent splitting conditions independently.
    pub fn splitting_report(&self) -> Result<SplittingReport> {
        let n = self.rank();
        let m2 = mod2(&self.sigma);
        let trivial_mod2_action = (0..n).all(|j| m2.images[j] == Bits::unit(n, j));
        let lambda_zero = self.comessatti() == 0;
        let plus = self.eigen_basis(1);
        let minus = self.eigen_basis(-1);
        let joined = ZMatrix::from_columns(
            n,
            &plus.columns().into_iter().chain(minus.columns()).collect::<Vec<_>>(),
        );
        let eigen_splitting = joined.ncols() == n && joined.det().abs().is_one();
        let all_traces_even = (0..n).all(|j| {
            let mut e = vec![BigInt::zero(); n];
            e[j] = BigInt::one();
            let s = self.sigma.mul_vec(&e);
            e.iter().zip(&s).all(|(a, b)| (a + b).is_even())
        });
        let r = SplittingReport { trivial_mod2_action, lambda_zero, eigen_splitting, all_traces_even };
        if !r.consistent() {
            return internal(format!("splitting conditions disagree: {r:?}"));
        }
        Ok(r)
    }

    /// Induced involution on the symmetric square, basis `e_i e_j` with `i <= j`
    /// in lexicographic order.
    pub fn sym2(&self) -> InvolutiveModule {
        InvolutiveModule { sigma: sym2_matrix(&self.sigma), gram: None }
    }
}

pub fn sym2_matrix(s: &ZMatrix) -> ZMatrix {
    let r = s.nrows();
    let mut index = vec![vec![0usize; r]; r];
    let mut k = 0;
    for i in 0..r {
        for j in i..r {
            index[i][j] = k;
            index[j][i] = k;
            k += 1;
        }
    }
    let mut out = ZMatrix::zeros(k, k);
    for i in 0..r {
        for j in i..r {
            let col = index[i][j];
            for a in 0..r {
                if s[(a, i)].is_zero() {
                    continue;
                }
                for b in 0..r {
                    if s[(b, j)].is_zero() {
                        continue;
                    }
                    let c = &s[(a, i)] * &s[(b, j)];
                    out[(index[a][b], col)] += c;
                }
            }
        }
    }
    out
}

/// Unimodular basis of the saturated sublattice with basis `basis` whose first
/// `targets.len()` vectors agree with `targets` modulo twice the sublattice.
/// The targets must be independent modulo 2.
fn lift_basis(basis: &ZMatrix, targets: &[Vector]) -> Result<ZMatrix> {
    let r = basis.ncols();
    let mut coords: Vec<Vector> = Vec::with_capacity(targets.len());
    for t in targets {
        match basis.solve_integer(t) {
            Some(c) => coords.push(c),
            None => return internal("eigenvector lies outside its eigen-sublattice"),
        }
    }
    // Extend the targets mod 2 by unit vectors to an F2 basis.
    let mut cols: Vec<Bits> =
        coords.iter().map(|c| Bits::from_indices(r, (0..r).filter(|&i| c[i].is_odd()))).collect();
    let mut ech = crate::f2::Echelon::new(r, 0);
    for c in &cols {
        if ech.insert(c.clone(), Bits::zeros(0)).is_some() {
            return internal("lift targets are dependent modulo 2");
        }
    }
    for i in 0..r {
        let u = Bits::unit(r, i);
        if ech.insert(u.clone(), Bits::zeros(0)).is_none() {
            cols.push(u);
        }
    }
    // Row-reduce the F2 matrix C (columns `cols`) to the identity, recording
    // the operations, then replay their integer inverses on the identity.
    let mut rows: Vec<Bits> = (0..r)
        .map(|i| Bits::from_indices(r, (0..r).filter(|&j| cols[j].get(i))))
        .collect();
    enum Op {
        Swap(usize, usize),
        Add(usize, usize),
    }
    let mut ops = Vec::new();
    for c in 0..r {
        let Some(p) = (c..r).find(|&i| rows[i].get(c)) else {
            return internal("F2 lift matrix is singular");
        };
        if p != c {
            rows.swap(p, c);
            ops.push(Op::Swap(p, c));
        }
        for i in 0..r {
            if i != c && rows[i].get(c) {
                let pc = rows[c].clone();
                rows[i].xor_assign(&pc);
                ops.push(Op::Add(i, c));
            }
        }
    }
    let mut m = ZMatrix::identity(r);
    for op in ops.iter().rev() {
        match *op {
            Op::Swap(a, b) => m.swap_rows(a, b),
            Op::Add(i, c) => m.add_row_multiple(i, c, &BigInt::from(-1)),
        }
    }
    let lifted = basis.mul(&m);
    Ok(lifted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> ZMatrix {
        ZMatrix::from_i64(rows)
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(comessatti_of(&ZMatrix::identity(4)).unwrap(), 0);
        assert_eq!(comessatti_of(&ZMatrix::identity(3).neg()).unwrap(), 0);
        assert_eq!(comessatti_of(&m(&[&[0, 1], &[1, 0]])).unwrap(), 1);
        assert_eq!(comessatti_of(&m(&[&[1, 1], &[0, -1]])).unwrap(), 1);
        assert!(comessatti_of(&m(&[&[1, 1], &[0, 1]])).is_err());
    }

    #[test]
    fn decomposition_of_swap_and_minus_identity() {
        let s = InvolutiveModule::new(m(&[&[0, 1], &[1, 0]]), None).unwrap();
        let d = s.decompose().unwrap();
        assert_eq!((d.rank_plus, d.rank_minus, d.lambda), (1, 1, 1));
        let s = InvolutiveModule::new(ZMatrix::identity(3).neg(), None).unwrap();
        let d = s.decompose().unwrap();
        assert_eq!((d.rank_plus, d.rank_minus, d.lambda), (0, 3, 0));
    }

    #[test]
    fn eigen_sublattices_of_u() {
        let u = crate::lattice::make_named("U").unwrap();
        let s = InvolutiveModule::new(m(&[&[0, 1], &[1, 0]]), Some(u.clone())).unwrap();
        let plus = s.eigen_sublattice(1).unwrap();
        let minus = s.eigen_sublattice(-1).unwrap();
        assert_eq!(plus.gram, m(&[&[2]]));
        assert_eq!(minus.gram, m(&[&[-2]]));
        let id = InvolutiveModule::new(ZMatrix::identity(2), Some(u)).unwrap();
        assert_eq!(id.eigen_sublattice(1).unwrap().rank(), 2);
        assert_eq!(id.eigen_sublattice(-1).unwrap().rank(), 0);
    }

    #[test]
    fn splitting_reports() {
        let id = InvolutiveModule::new(ZMatrix::identity(3), None).unwrap();
        let r = id.splitting_report().unwrap();
        assert!(r.trivial_mod2_action && r.lambda_zero && r.eigen_splitting && r.all_traces_even);
        let sw = InvolutiveModule::new(m(&[&[0, 1], &[1, 0]]), None).unwrap();
        let r = sw.splitting_report().unwrap();
        assert!(!r.trivial_mod2_action && !r.lambda_zero && !r.eigen_splitting && !r.all_traces_even);
        let d = InvolutiveModule::new(m(&[&[1, 0], &[0, -1]]), None).unwrap();
        assert!(d.splitting_report().unwrap().lambda_zero);
    }
}
