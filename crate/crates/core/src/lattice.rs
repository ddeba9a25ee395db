//! Nondegenerate integral lattices given by a Gram matrix.
//!
//! Signatures come from sign variations of the characteristic polynomial,
//! discriminant groups from the Smith form of the Gram matrix. Isometry
//! classes are only ever compared through [`InvariantTriple`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{internal, pre, Error, Result};
use crate::zmat::{content, dot, lll_columns, lll_gram, ZMatrix};

pub type Vector = Vec<BigInt>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerLattice {
    gram: ZMatrix,
    label: Option<String>,
    hyperbolic_planes: usize,
}

/// Positive, negative and null index of a symmetric matrix.
pub fn inertia(gram: &ZMatrix) -> (usize, usize, usize) {
    let c = gram.charpoly();
    let r = gram.nrows();
    let null = c.iter().rev().take_while(|x| x.is_zero()).count();
    let variations = |signs: &mut dyn Iterator<Item = i8>| {
        let mut last = 0i8;
        let mut v = 0;
        for s in signs {
            if s == 0 {
                continue;
            }
            if last != 0 && s != last {
                v += 1;
            }
            last = s;
        }
        v
    };
    let sign = |x: &BigInt| -> i8 {
        if x.is_positive() {
            1
        } else if x.is_negative() {
            -1
        } else {
            0
        }
    };
    let pos = variations(&mut c.iter().map(sign));
    let neg = variations(
        &mut c.iter().enumerate().map(|(i, x)| if (r - i) % 2 == 1 { -sign(x) } else { sign(x) }),
    );
    (pos, neg, null)
}

fn rat(x: &BigInt) -> BigRational {
    BigRational::from_integer(x.clone())
}

/// Representative of `x` modulo `m` in `[0, m)`.
pub fn rat_mod(x: &BigRational, m: &BigInt) -> BigRational {
    let mq = rat(m);
    let k = (x / &mq).floor();
    x - k * mq
}

impl IntegerLattice {
    pub fn new(gram: ZMatrix) -> Result<Self> {
        if gram.nrows() == 0 {
            return pre("lattice of rank zero");
        }
        if !gram.is_symmetric() {
            return pre("Gram matrix is not symmetric");
        }
        if gram.det().is_zero() {
            return pre("degenerate lattice: Gram determinant is zero");
        }
        Ok(IntegerLattice { gram, label: None, hyperbolic_planes: 0 })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Record that the lattice is known to contain this many orthogonal
    /// hyperbolic planes as direct summands.
    pub fn with_hyperbolic_planes(mut self, k: usize) -> Self {
        self.hyperbolic_planes = k;
        self
    }

    pub fn gram(&self) -> &ZMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.nrows()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn hyperbolic_planes(&self) -> usize {
        self.hyperbolic_planes
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram[(i, i)].is_even())
    }

    pub fn det(&self) -> BigInt {
        self.gram.det()
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    pub fn signature(&self) -> (usize, usize) {
        let (p, n, _) = inertia(&self.gram);
        (p, n)
    }

    pub fn dot(&self, x: &[BigInt], y: &[BigInt]) -> BigInt {
        self.gram.bilinear(x, y)
    }

    pub fn norm(&self, x: &[BigInt]) -> BigInt {
        self.dot(x, x)
    }

    pub fn direct_sum(&self, other: &IntegerLattice) -> IntegerLattice {
        IntegerLattice {
            gram: ZMatrix::block_diag(&[self.gram.clone(), other.gram.clone()]),
            label: match (&self.label, &other.label) {
                (Some(a), Some(b)) => Some(format!("{a} + {b}")),
                _ => None,
            },
            hyperbolic_planes: self.hyperbolic_planes + other.hyperbolic_planes,
        }
    }

    /// The lattice `L(m)` with form multiplied by `m`.
    pub fn rescale(&self, m: &BigInt) -> Result<IntegerLattice> {
        if m.is_zero() {
            return pre("rescaling by zero gives a degenerate lattice");
        }
        let hp = if m.abs().is_one() { self.hyperbolic_planes } else { 0 };
        Ok(IntegerLattice { gram: self.gram.scale(m), label: None, hyperbolic_planes: hp })
    }

    fn check_vector(&self, v: &[BigInt]) -> Result<()> {
        if v.len() != self.rank() {
            return pre(format!("vector has length {}, lattice rank is {}", v.len(), self.rank()));
        }
        Ok(())
    }

    /// `div(v)`: the positive generator of the ideal `(v, L)`.
    pub fn divisibility(&self, v: &[BigInt]) -> Result<BigInt> {
        self.check_vector(v)?;
        if v.iter().all(|x| x.is_zero()) {
            return pre("divisibility of the zero vector");
        }
        Ok(content(&self.gram.mul_vec(v)))
    }

    pub fn is_primitive(&self, v: &[BigInt]) -> Result<bool> {
        self.check_vector(v)?;
        if v.iter().all(|x| x.is_zero()) {
            return pre("primitivity of the zero vector");
        }
        Ok(content(v).is_one())
    }

    pub fn discriminant_group(&self) -> DiscriminantGroup {
        DiscriminantGroup::of(self)
    }

    /// Class of `v / div(v)` in the discriminant group, with its q-value.
    pub fn discriminant_class(&self, v: &[BigInt]) -> Result<DiscClass> {
        if !self.is_primitive(v)? {
            return pre(format!(
                "vector is not primitive (content {}); divide out the content first",
                content(v)
            ));
        }
        let d = self.divisibility(v)?;
        let gv = self.gram.mul_vec(v);
        let y: Vector = gv.iter().map(|x| x / &d).collect();
        let group = self.discriminant_group();
        let coords = group.class_of(&y);
        let q = BigRational::new(self.norm(v), &d * &d);
        let modulus = if self.is_even() { BigInt::from(2) } else { BigInt::one() };
        Ok(DiscClass { coords, qvalue: rat_mod(&q, &modulus) })
    }

    /// Saturated integer kernel of `a` (columns indexed by lattice coordinates)
    /// with the restricted form.
    pub fn kernel_sublattice(&self, a: &ZMatrix) -> Sublattice {
        let k = if a.nrows() == 0 { ZMatrix::identity(self.rank()) } else { a.kernel() };
        Sublattice::from_basis(self, lll_columns(&k))
    }

    pub fn orthogonal_complement(&self, span: &[Vector]) -> Result<Sublattice> {
        for v in span {
            self.check_vector(v)?;
        }
        let s = ZMatrix::from_columns(self.rank(), span);
        let a = s.transpose().mul(&self.gram);
        Ok(self.kernel_sublattice(&a))
    }

    pub fn invariant_triple(&self) -> InvariantTriple {
        let g = self.discriminant_group();
        InvariantTriple {
            rank: self.rank(),
            signature: self.signature(),
            even: self.is_even(),
            group: g,
        }
    }

    /// A pair `(e, f)` spanning a hyperbolic plane `U` that is an orthogonal
    /// direct summand: `e^2 = f^2 = 0`, `e.f = 1`, `div(e) = 1`.
    ///
    /// Uses an exact LLL reduction of a majorant of the form followed by a
    /// bounded search for isotropic vectors in the reduced basis.
    pub fn find_hyperbolic_plane(&self) -> Result<(Vector, Vector)> {
        if !self.is_even() {
            return pre("hyperbolic plane search requires an even lattice");
        }
        let (p, n) = self.signature();
        if p == 0 || n == 0 {
            return pre("definite lattices contain no isotropic vectors");
        }
        let r = self.rank();
        let mut candidates: Vec<Vector> = Vec::new();
        let basis = match self.majorant() {
            Ok(Some(m)) => lll_gram(&m)?,
            Ok(None) | Err(_) => lll_columns(&ZMatrix::identity(r)),
        };
        if let Some(iso) = self.gram_schmidt_isotropic() {
            candidates.push(iso);
        }
        let reduced = self.gram.congruence(&basis);
        for c in isotropic_combinations(&reduced) {
            candidates.push(basis.mul_vec(&c));
        }
        for e in candidates {
            let e = primitive_part(&e);
            if !self.norm(&e).is_zero() || e.iter().all(|x| x.is_zero()) {
                continue;
            }
            if !self.divisibility(&e)?.is_one() {
                continue;
            }
            let ge = self.gram.mul_vec(&e);
            let row = ZMatrix::from_rows(&[ge])?;
            let Some(y) = row.solve_integer(&[BigInt::one()]) else {
                continue;
            };
            let c = self.norm(&y) / BigInt::from(2);
            let f: Vector = y.iter().zip(&e).map(|(yi, ei)| yi - &c * ei).collect();
            if self.norm(&f).is_zero() && self.dot(&e, &f).is_one() {
                return Ok((e, f));
            }
            return internal("hyperbolic partner construction failed");
        }
        pre("no hyperbolic plane found by the bounded isotropic search")
    }

    /// Rational Gram-Schmidt; returns an isotropic vector if a zero pivot occurs.
    fn gram_schmidt_isotropic(&self) -> Option<Vector> {
        let (_, _, iso) = self.gram_schmidt();
        iso
    }

    #[allow(clippy::type_complexity)]
    fn gram_schmidt(&self) -> (Vec<Vec<BigRational>>, Vec<BigRational>, Option<Vector>) {
        let r = self.rank();
        let g: Vec<Vec<BigRational>> =
            (0..r).map(|i| self.gram.row(i).iter().map(rat).collect()).collect();
        let form = |x: &[BigRational], y: &[BigRational]| -> BigRational {
            let mut s = BigRational::zero();
            for i in 0..r {
                if x[i].is_zero() {
                    continue;
                }
                for j in 0..r {
                    if !y[j].is_zero() && !g[i][j].is_zero() {
                        s += &x[i] * &g[i][j] * &y[j];
                    }
                }
            }
            s
        };
        let mut bs: Vec<Vec<BigRational>> = Vec::new();
        let mut norms: Vec<BigRational> = Vec::new();
        // mu[j][i]: coefficient of b_j in e_i
        let mut mu = vec![vec![BigRational::zero(); r]; r];
        for i in 0..r {
            let mut v: Vec<BigRational> =
                (0..r).map(|k| if k == i { BigRational::one() } else { BigRational::zero() }).collect();
            let ei = v.clone();
            for j in 0..i {
                let m = form(&ei, &bs[j]) / &norms[j];
                for k in 0..r {
                    let t = &m * &bs[j][k];
                    v[k] -= t;
                }
                mu[j][i] = m;
            }
            mu[i][i] = BigRational::one();
            let nn = form(&v, &v);
            if nn.is_zero() {
                let den = v.iter().fold(BigInt::one(), |a, x| a.lcm(x.denom()));
                let iv: Vector = v.iter().map(|x| (x * rat(&den)).to_integer()).collect();
                return (mu, norms, Some(primitive_part(&iv)));
            }
            bs.push(v);
            norms.push(nn);
        }
        (mu, norms, None)
    }

    /// Integral positive definite majorant `P^T |D| P` of the form, scaled to
    /// clear denominators. `None` if Gram-Schmidt meets an isotropic pivot.
    fn majorant(&self) -> Result<Option<ZMatrix>> {
        let r = self.rank();
        let (mu, norms, iso) = self.gram_schmidt();
        if iso.is_some() {
            return Ok(None);
        }
        let mut m = vec![vec![BigRational::zero(); r]; r];
        for (j, nj) in norms.iter().enumerate() {
            let a = nj.abs();
            for x in 0..r {
                if mu[j][x].is_zero() {
                    continue;
                }
                for y in 0..r {
                    if !mu[j][y].is_zero() {
                        m[x][y] += &a * &mu[j][x] * &mu[j][y];
                    }
                }
            }
        }
        let den = m.iter().flatten().fold(BigInt::one(), |a, x| a.lcm(x.denom()));
        let d = rat(&den);
        Ok(Some(ZMatrix::from_fn(r, r, |i, j| (&m[i][j] * &d).to_integer())))
    }
}

fn primitive_part(v: &[BigInt]) -> Vector {
    let c = content(v);
    if c.is_zero() || c.is_one() {
        return v.to_vec();
    }
    let mut out: Vector = v.iter().map(|x| x / &c).collect();
    if let Some(first) = out.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            out.iter_mut().for_each(|x| *x = -&*x);
        }
    }
    out
}

/// Small integer combinations of the basis that are isotropic for `g`.
fn isotropic_combinations(g: &ZMatrix) -> Vec<Vector> {
    let r = g.nrows();
    let mut out = Vec::new();
    let small: Option<Vec<Vec<i128>>> = (0..r)
        .map(|i| g.row(i).iter().map(|x| x.to_i64().map(i128::from)).collect())
        .collect();
    let unit = |i: usize, c: i128| -> (usize, i128) { (i, c) };
    let to_vec = |terms: &[(usize, i128)]| -> Vector {
        let mut v = vec![BigInt::zero(); r];
        for &(i, c) in terms {
            v[i] += BigInt::from(c);
        }
        v
    };
    for i in 0..r {
        if g[(i, i)].is_zero() {
            out.push(to_vec(&[unit(i, 1)]));
        }
    }
    for i in 0..r {
        for j in i + 1..r {
            let (a, b, c) = (&g[(i, i)], &g[(i, j)], &g[(j, j)]);
            if a.is_zero() {
                continue;
            }
            let disc = b * b - a * c;
            if disc.is_negative() {
                continue;
            }
            let s = disc.sqrt();
            if &s * &s != disc {
                continue;
            }
            for root in [-b + &s, -b - &s] {
                let mut v = vec![BigInt::zero(); r];
                v[i] = root;
                v[j] = a.clone();
                out.push(primitive_part(&v));
            }
        }
    }
    let Some(g) = small else {
        return out;
    };
    let q = |terms: &[(usize, i128)]| -> i128 {
        let mut s = 0i128;
        for &(i, ci) in terms {
            for &(j, cj) in terms {
                s += ci * cj * g[i][j];
            }
        }
        s
    };
    let idx: Vec<usize> = {
        let mut v: Vec<usize> = (0..r).collect();
        v.sort_by_key(|&i| g[i][i].abs());
        v.truncate(12);
        v
    };
    let coeffs: [i128; 4] = [1, -1, 2, -2];
    let m = idx.len();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                for &cb in &coeffs {
                    for &cc in &coeffs {
                        let t = [(idx[a], 1), (idx[b], cb), (idx[c], cc)];
                        if q(&t) == 0 {
                            out.push(to_vec(&t));
                        }
                        for &ca in &[2i128] {
                            if cb % 2 == 0 && cc % 2 == 0 {
                                continue;
                            }
                            let t = [(idx[a], ca), (idx[b], cb), (idx[c], cc)];
                            if q(&t) == 0 {
                                out.push(to_vec(&t));
                            }
                        }
                    }
                }
                if out.len() > 64 {
                    return out;
                }
            }
        }
    }
    for a in 0..m.min(10) {
        for b in a + 1..m.min(10) {
            for c in b + 1..m.min(10) {
                for d in c + 1..m.min(10) {
                    for &cb in &coeffs {
                        for &cc in &coeffs {
                            for &cd in &coeffs {
                                let t = [(idx[a], 1), (idx[b], cb), (idx[c], cc), (idx[d], cd)];
                                if q(&t) == 0 {
                                    out.push(to_vec(&t));
                                }
                            }
                        }
                    }
                    if out.len() > 64 {
                        return out;
                    }
                }
            }
        }
    }
    out
}

/// A saturated sublattice given by basis columns in ambient coordinates.
#[derive(Clone, Debug)]
pub struct Sublattice {
    pub basis: ZMatrix,
    pub gram: ZMatrix,
    pub degenerate: bool,
    pub saturated: bool,
}

impl Sublattice {
    pub fn from_basis(ambient: &IntegerLattice, basis: ZMatrix) -> Sublattice {
        let gram = ambient.gram().congruence(&basis);
        let degenerate = basis.ncols() > 0 && gram.det().is_zero();
        let saturated = basis.ncols() == 0
            || basis.transpose().smith().diag.iter().all(|d| d.is_one());
        Sublattice { basis, gram, degenerate, saturated }
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn lattice(&self) -> Result<IntegerLattice> {
        if self.rank() == 0 {
            return pre("sublattice has rank zero");
        }
        if self.degenerate {
            return pre("sublattice is degenerate; discriminant data undefined");
        }
        IntegerLattice::new(self.gram.clone())
    }

    pub fn to_ambient(&self, coords: &[BigInt]) -> Vector {
        self.basis.mul_vec(coords)
    }

    /// Coordinates of an ambient vector in this basis, if it lies in the span.
    pub fn coords(&self, v: &[BigInt]) -> Option<Vector> {
        self.basis.solve_integer(v)
    }

    /// Matrix of an ambient endomorphism preserving the sublattice.
    pub fn restrict(&self, m: &ZMatrix) -> Result<ZMatrix> {
        let images = m.mul(&self.basis);
        let mut cols = Vec::with_capacity(self.rank());
        for j in 0..self.rank() {
            match self.coords(&images.col(j)) {
                Some(c) => cols.push(c),
                None => return pre("endomorphism does not preserve the sublattice"),
            }
        }
        Ok(ZMatrix::from_columns(self.rank(), &cols))
    }
}

/// Class of a dual vector in `A_L`, coordinates w.r.t. the invariant factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscClass {
    pub coords: Vec<BigInt>,
    pub qvalue: BigRational,
}

#[derive(Clone, Debug)]
pub struct DiscriminantGroup {
    pub invariant_factors: Vec<BigInt>,
    /// Generators as dual vectors in lattice coordinates.
    pub generator_reps: Vec<Vec<BigRational>>,
    /// `q(g_i)` modulo 2 for even lattices.
    pub qvalues: Option<Vec<BigRational>>,
    /// `b(g_i, g_j)` modulo 1.
    pub bilinear: Vec<Vec<BigRational>>,
    class_rows: ZMatrix,
}

impl DiscriminantGroup {
    fn of(l: &IntegerLattice) -> Self {
        let s = l.gram().smith();
        let idx: Vec<usize> = (0..s.diag.len()).filter(|&i| !s.diag[i].is_one()).collect();
        let factors: Vec<BigInt> = idx.iter().map(|&i| s.diag[i].clone()).collect();
        let gens: Vec<Vec<BigRational>> = idx
            .iter()
            .map(|&i| s.v.col(i).iter().map(|x| BigRational::new(x.clone(), s.diag[i].clone())).collect())
            .collect();
        let form = |x: &[BigRational], y: &[BigRational]| -> BigRational {
            let r = l.rank();
            let mut acc = BigRational::zero();
            for a in 0..r {
                if x[a].is_zero() {
                    continue;
                }
                for b in 0..r {
                    if !y[b].is_zero() {
                        acc += &x[a] * rat(&l.gram()[(a, b)]) * &y[b];
                    }
                }
            }
            acc
        };
        let one = BigInt::one();
        let two = BigInt::from(2);
        let bilinear: Vec<Vec<BigRational>> = gens
            .iter()
            .map(|x| gens.iter().map(|y| rat_mod(&form(x, y), &one)).collect())
            .collect();
        let qvalues = l.is_even().then(|| gens.iter().map(|x| rat_mod(&form(x, x), &two)).collect());
        let rows: Vec<usize> = (0..s.u.nrows()).collect();
        let class_rows = s.u.submatrix(&idx, &rows);
        DiscriminantGroup { invariant_factors: factors, generator_reps: gens, qvalues, bilinear, class_rows }
    }

    pub fn order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty()
    }

    pub fn is_cyclic(&self) -> bool {
        self.invariant_factors.len() <= 1
    }

    /// Class of the dual vector `x` given through `y = G x` (integral).
    pub fn class_of(&self, y: &[BigInt]) -> Vec<BigInt> {
        let c = self.class_rows.mul_vec(y);
        c.iter().zip(&self.invariant_factors).map(|(a, d)| a.mod_floor(d)).collect()
    }

    /// Quadratic value of the element with coordinates `a` (even case), or
    /// the bilinear self-pairing modulo 1 (odd case).
    pub fn value(&self, a: &[BigInt]) -> BigRational {
        let k = a.len();
        let mut s = BigRational::zero();
        let even = self.qvalues.is_some();
        for i in 0..k {
            if a[i].is_zero() {
                continue;
            }
            let diag = match &self.qvalues {
                Some(q) => &q[i],
                None => &self.bilinear[i][i],
            };
            s += rat(&(&a[i] * &a[i])) * diag;
            for j in i + 1..k {
                s += rat(&(BigInt::from(2) * &a[i] * &a[j])) * &self.bilinear[i][j];
            }
        }
        rat_mod(&s, &if even { BigInt::from(2) } else { BigInt::one() })
    }

    pub fn pairing(&self, a: &[BigInt], b: &[BigInt]) -> BigRational {
        let mut s = BigRational::zero();
        for i in 0..a.len() {
            for j in 0..b.len() {
                if !a[i].is_zero() && !b[j].is_zero() {
                    s += rat(&(&a[i] * &b[j])) * &self.bilinear[i][j];
                }
            }
        }
        rat_mod(&s, &BigInt::one())
    }

    fn elements(&self) -> Vec<Vec<BigInt>> {
        let mut out: Vec<Vec<BigInt>> = vec![vec![]];
        for d in &self.invariant_factors {
            let dd = d.to_usize().expect("small group");
            out = out
                .into_iter()
                .flat_map(|v| {
                    (0..dd).map(move |a| {
                        let mut w = v.clone();
                        w.push(BigInt::from(a));
                        w
                    })
                })
                .collect();
        }
        out
    }
}

/// Rank, signature, parity and discriminant form.
#[derive(Clone, Debug)]
pub struct InvariantTriple {
    pub rank: usize,
    pub signature: (usize, usize),
    pub even: bool,
    pub group: DiscriminantGroup,
}

/// Groups above this order are compared by invariant factors only.
pub const ISOMORPHISM_SEARCH_LIMIT: u64 = 4096;

impl InvariantTriple {
    /// Equality up to an isomorphism of discriminant forms. For cyclic groups
    /// this is a unit `k` with `k^2 q = q'`; small non-cyclic groups are
    /// compared by exhaustive search. Above [`ISOMORPHISM_SEARCH_LIMIT`] only
    /// the invariant factors are compared.
    pub fn equivalent(&self, other: &InvariantTriple) -> bool {
        if self.rank != other.rank
            || self.signature != other.signature
            || self.even != other.even
            || self.group.invariant_factors != other.group.invariant_factors
        {
            return false;
        }
        let (a, b) = (&self.group, &other.group);
        if a.is_trivial() {
            return true;
        }
        if a.is_cyclic() {
            let d = &a.invariant_factors[0];
            let Some(dd) = d.to_u64().filter(|&x| x <= 1_000_000) else {
                return true;
            };
            let one = [BigInt::one()];
            let (qa, qb) = (a.value(&one), b.value(&one));
            let m = if self.even { BigInt::from(2) } else { BigInt::one() };
            return (1..=dd).any(|k| {
                let kb = BigInt::from(k);
                kb.gcd(d).is_one() && rat_mod(&(&qa * rat(&(&kb * &kb))), &m) == qb
            });
        }
        match a.order().to_u64() {
            Some(o) if o <= ISOMORPHISM_SEARCH_LIMIT => forms_isomorphic(a, b),
            _ => true,
        }
    }
}

fn forms_isomorphic(a: &DiscriminantGroup, b: &DiscriminantGroup) -> bool {
    let elems = b.elements();
    let k = a.invariant_factors.len();
    let unit = |i: usize| -> Vec<BigInt> {
        (0..k).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()
    };
    let targets: Vec<BigRational> = (0..k).map(|i| a.value(&unit(i))).collect();
    let mut chosen: Vec<Vec<BigInt>> = Vec::new();
    fn killed(x: &[BigInt], d: &BigInt, factors: &[BigInt]) -> bool {
        x.iter().zip(factors).all(|(xi, f)| (xi * d).mod_floor(f).is_zero())
    }
    fn rec(
        i: usize,
        a: &DiscriminantGroup,
        b: &DiscriminantGroup,
        elems: &[Vec<BigInt>],
        targets: &[BigRational],
        chosen: &mut Vec<Vec<BigInt>>,
    ) -> bool {
        let k = targets.len();
        if i == k {
            let mut seen = std::collections::HashSet::new();
            for e in a.elements() {
                let mut img = vec![BigInt::zero(); k];
                for (j, ej) in e.iter().enumerate() {
                    for t in 0..k {
                        img[t] += ej * &chosen[j][t];
                    }
                }
                let img: Vec<BigInt> =
                    img.iter().zip(&b.invariant_factors).map(|(x, f)| x.mod_floor(f)).collect();
                seen.insert(img);
            }
            return seen.len() == elems.len();
        }
        for x in elems {
            if !killed(x, &a.invariant_factors[i], &b.invariant_factors) {
                continue;
            }
            if b.value(x) != targets[i] {
                continue;
            }
            let ok = (0..i).all(|j| b.pairing(x, &chosen[j]) == a.bilinear[i][j]);
            if !ok {
                continue;
            }
            chosen.push(x.clone());
            if rec(i + 1, a, b, elems, targets, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    rec(0, a, b, &elems, &targets, &mut chosen)
}

/// E8 Cartan matrix: a chain of seven nodes with the eighth attached to the
/// fifth.
pub fn e8_cartan() -> ZMatrix {
    let mut m = ZMatrix::zeros(8, 8);
    let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 7)];
    for i in 0..8 {
        m[(i, i)] = BigInt::from(2);
    }
    for (a, b) in edges {
        m[(a, b)] = BigInt::from(-1);
        m[(b, a)] = BigInt::from(-1);
    }
    m
}

fn a_cartan(n: usize) -> ZMatrix {
    ZMatrix::from_fn(n, n, |i, j| {
        if i == j {
            BigInt::from(2)
        } else if i.abs_diff(j) == 1 {
            BigInt::from(-1)
        } else {
            BigInt::zero()
        }
    })
}

fn d_cartan(n: usize) -> ZMatrix {
    // chain 0..n-2, node n-1 attached to node n-3
    let mut m = a_cartan(n - 1);
    let mut out = ZMatrix::zeros(n, n);
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            out[(i, j)] = m[(i, j)].clone();
        }
    }
    out[(n - 1, n - 1)] = BigInt::from(2);
    out[(n - 1, n - 3)] = BigInt::from(-1);
    out[(n - 3, n - 1)] = BigInt::from(-1);
    m = out;
    m
}

/// Build a lattice from an expression such as `U^3 + E8(-1)^2 + <-4>`.
///
/// Summands: `U`, `E8`, `A<n>`, `D<n>`, `<k>`, each optionally rescaled by
/// `(m)` and repeated by `^k`; separated by `+` or `⊕`.
pub fn make_named(expr: &str) -> Result<IntegerLattice> {
    let cleaned: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(Error::Parse("empty lattice expression".into()));
    }
    let mut total: Option<IntegerLattice> = None;
    for term in split_terms(&cleaned) {
        let l = parse_term(&term)?;
        total = Some(match total {
            None => l,
            Some(t) => t.direct_sum(&l),
        });
    }
    let l = total.expect("nonempty expression");
    Ok(l.with_label(expr.trim()))
}

fn split_terms(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for ch in s.chars() {
        match ch {
            '(' | '<' => {
                depth += 1;
                cur.push(ch);
            }
            ')' | '>' => {
                depth -= 1;
                cur.push(ch);
            }
            '+' | '⊕' if depth == 0 => out.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    out.push(cur);
    out
}

fn parse_int(s: &str) -> Result<BigInt> {
    s.parse::<BigInt>().map_err(|_| Error::Parse(format!("expected an integer, found `{s}`")))
}

fn parse_term(term: &str) -> Result<IntegerLattice> {
    if term.is_empty() {
        return Err(Error::Parse("empty summand".into()));
    }
    let (body, power) = match term.rfind('^') {
        Some(p) if !term[p + 1..].contains(['>', ')']) => {
            let k = term[p + 1..]
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad exponent in `{term}`")))?;
            (&term[..p], k)
        }
        _ => (term, 1),
    };
    if power == 0 {
        return Err(Error::Parse(format!("zero exponent in `{term}`")));
    }
    let (atom, scale) = match body.strip_suffix(')') {
        Some(inner) => {
            let open = inner.rfind('(').ok_or_else(|| Error::Parse(format!("unbalanced `{term}`")))?;
            (&inner[..open], Some(parse_int(&inner[open + 1..])?))
        }
        None => (body, None),
    };
    let (gram, hp) = if atom == "U" {
        (ZMatrix::from_i64(&[&[0, 1], &[1, 0]]), 1)
    } else if atom == "E8" {
        (e8_cartan(), 0)
    } else if let Some(k) = atom.strip_prefix('<').and_then(|r| r.strip_suffix('>')) {
        let k = parse_int(k)?;
        if k.is_zero() {
            return pre("summand <0> is degenerate");
        }
        (ZMatrix::diagonal(&[k]), 0)
    } else if let Some(n) = atom.strip_prefix('A') {
        let n: usize = n.parse().map_err(|_| Error::Parse(format!("bad root lattice `{atom}`")))?;
        if n == 0 {
            return Err(Error::Parse("A0 is empty".into()));
        }
        (a_cartan(n), 0)
    } else if let Some(n) = atom.strip_prefix('D') {
        let n: usize = n.parse().map_err(|_| Error::Parse(format!("bad root lattice `{atom}`")))?;
        if n < 4 {
            return Err(Error::Parse("D_n needs n >= 4".into()));
        }
        (d_cartan(n), 0)
    } else {
        return Err(Error::Parse(format!("unknown lattice summand `{atom}`")));
    };
    let mut l = IntegerLattice::new(gram)?.with_hyperbolic_planes(hp);
    if let Some(m) = scale {
        l = l.rescale(&m)?;
    }
    let single = l.clone();
    for _ in 1..power {
        l = l.direct_sum(&single);
    }
    Ok(l)
}

/// Rational vector `num / den` paired with `l`: returns `x^T G y` exactly.
pub fn rational_dot(l: &IntegerLattice, x: &[BigRational], y: &[BigRational]) -> BigRational {
    let r = l.rank();
    let mut s = BigRational::zero();
    for i in 0..r {
        if x[i].is_zero() {
            continue;
        }
        for j in 0..r {
            if !y[j].is_zero() {
                s += &x[i] * rat(&l.gram()[(i, j)]) * &y[j];
            }
        }
    }
    s
}

pub fn int_dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    dot(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zmat::int_vec;

    #[test]
    fn named_lattices() {
        let u = make_named("U").unwrap();
        assert_eq!(u.gram(), &ZMatrix::from_i64(&[&[0, 1], &[1, 0]]));
        assert_eq!(u.signature(), (1, 1));
        assert!(u.discriminant_group().is_trivial());
        let e8 = make_named("E8(-1)").unwrap();
        assert_eq!(e8.signature(), (0, 8));
        assert!(e8.det().is_one());
        let k = make_named("U^3 + E8(-1)^2 + <-2>").unwrap();
        assert_eq!(k.rank(), 23);
        assert_eq!(k.det().abs(), BigInt::from(2));
        assert_eq!(k.signature(), (3, 20));
        assert_eq!(k.hyperbolic_planes(), 3);
        assert!(make_named("<0>").is_err());
        assert!(make_named("U(0)").is_err());
        assert!(matches!(make_named("Q7"), Err(Error::Parse(_))));
    }

    #[test]
    fn discriminant_examples() {
        let l = make_named("<-4>").unwrap();
        let g = l.discriminant_group();
        assert_eq!(g.invariant_factors, int_vec(&[4]));
        let l = make_named("U^3 + E8(-1)^2 + <-4>").unwrap();
        assert_eq!(l.discriminant_group().invariant_factors, int_vec(&[4]));
        let mut delta = vec![BigInt::zero(); 23];
        delta[22] = BigInt::one();
        let c = l.discriminant_class(&delta).unwrap();
        assert_eq!(c.qvalue, rat_mod(&BigRational::new(BigInt::from(-1), BigInt::from(4)), &BigInt::from(2)));
        let three: Vector = delta.iter().map(|x| x * 3).collect();
        assert!(l.discriminant_class(&three).is_err());
    }

    #[test]
    fn complements() {
        let u = make_named("U").unwrap();
        let c = u.orthogonal_complement(&[int_vec(&[1, 0])]).unwrap();
        assert_eq!(c.rank(), 1);
        assert!(c.degenerate);
        assert!(c.lattice().is_err());
    }

    #[test]
    fn triple_comparison() {
        let a = make_named("U + E8(-1)").unwrap().invariant_triple();
        let b = make_named("E8(-1) + U").unwrap().invariant_triple();
        assert!(a.equivalent(&b));
        let p = make_named("<2>").unwrap().invariant_triple();
        let m = make_named("<-2>").unwrap().invariant_triple();
        assert!(!p.equivalent(&m));
        // <-6> vs <-6> rescaled generator: unit 5 maps q to 25 q = q mod 2.
        let x = make_named("<2> + <-6>").unwrap().invariant_triple();
        let y = make_named("<-6> + <2>").unwrap().invariant_triple();
        assert!(x.equivalent(&y));
    }

    #[test]
    fn hyperbolic_plane_in_k3_type() {
        let l = make_named("U^2 + E8(-1)^2 + <-4>").unwrap();
        let (e, f) = l.find_hyperbolic_plane().unwrap();
        assert!(l.norm(&e).is_zero() && l.norm(&f).is_zero());
        assert!(l.dot(&e, &f).is_one());
        let small = make_named("U + <-6>").unwrap();
        assert!(small.find_hyperbolic_plane().is_ok());
    }
}
