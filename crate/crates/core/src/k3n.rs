//! Involutions of the K3^[n]-type lattice `U^3 + E8(-1)^2 + <2-2n>`.
//!
//! Coordinates: `U` summands at (0,1), (2,3), (4,5); the two `E8(-1)` blocks
//! at 6..14 and 14..22; the generator `g` with `g^2 = 2-2n` at 22.
//!
//! A lambda = 0 anti-symplectic involution splits the lattice into its two
//! eigenlattices, which fall into four cases. For each case an explicit
//! certificate that the action on `H^2 + H^4` has Comessatti
//! characteristic at least one is produced and re-verified.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{internal, pre, Error, Result};
use crate::exec::Exec;
use crate::hilbert::{goettsche_series, h4_pair_certificate, total, SurfaceData, SurfaceKind};
use crate::involution::{comessatti_of, is_involution, InvolutiveModule};
use crate::io;
use crate::lattice::{make_named, rational_dot, IntegerLattice, Sublattice, Vector};
use crate::zmat::ZMatrix;

pub const RANK: usize = 23;
pub const G: usize = 22;
const E8A: std::ops::Range<usize> = 6..14;
const E8B: std::ops::Range<usize> = 14..22;

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn rat(x: &BigInt) -> BigRational {
    BigRational::from_integer(x.clone())
}

fn unit(n: usize, i: usize) -> Vector {
    (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()
}

fn disc(n: usize) -> BigInt {
    big(2 * n as i64 - 2)
}

pub fn build_k3n_lattice(n: usize) -> Result<IntegerLattice> {
    if n < 2 {
        return pre("K3^[n] lattice needs n >= 2");
    }
    make_named(&format!("U^3 + E8(-1)^2 + <{}>", 2 - 2 * n as i64))
}

/// Sign by which `sigma` acts on the discriminant group. When `-1 = +1` on
/// the group (order at most 2) the value `+1` is returned.
pub fn discriminant_action(l: &IntegerLattice, sigma: &ZMatrix) -> Result<i64> {
    let a = l.discriminant_group();
    let mut plus = true;
    let mut minus = true;
    for (i, y) in a.generator_reps.iter().enumerate() {
        let sy: Vec<BigRational> =
            (0..l.rank()).map(|r| (0..l.rank()).map(|c| rat(&sigma[(r, c)]) * &y[c]).sum()).collect();
        let gy: Vec<BigInt> = (0..l.rank())
            .map(|r| {
                let v: BigRational = (0..l.rank()).map(|c| rat(&l.gram()[(r, c)]) * &sy[c]).sum();
                v.to_integer()
            })
            .collect();
        let class = a.class_of(&gy);
        for (j, (c, d)) in class.iter().zip(&a.invariant_factors).enumerate() {
            let expect = if i == j { BigInt::one() } else { BigInt::zero() };
            plus &= (c - &expect).mod_floor(d).is_zero();
            minus &= (c + &expect).mod_floor(d).is_zero();
        }
    }
    match (plus, minus) {
        (true, _) => Ok(1),
        (false, true) => Ok(-1),
        _ => pre("action on the discriminant group is not +-id; not a monodromy operator"),
    }
}

#[derive(Clone, Debug)]
pub struct MonodromyInvolution {
    pub n: usize,
    pub lattice: IntegerLattice,
    pub sigma: ZMatrix,
    pub tau: i64,
}

impl MonodromyInvolution {
    pub fn new(n: usize, sigma: ZMatrix) -> Result<Self> {
        let lattice = build_k3n_lattice(n)?;
        if sigma.nrows() != RANK || sigma.ncols() != RANK {
            return pre(format!("sigma must be {RANK}x{RANK}"));
        }
        if !is_involution(&sigma) {
            return pre("sigma is not an involution");
        }
        if &lattice.gram().congruence(&sigma) != lattice.gram() {
            return pre("sigma is not an isometry");
        }
        let tau = discriminant_action(&lattice, &sigma)?;
        Ok(MonodromyInvolution { n, lattice, sigma, tau })
    }

    pub fn module(&self) -> InvolutiveModule {
        InvolutiveModule::new(self.sigma.clone(), Some(self.lattice.clone())).expect("checked on construction")
    }

    pub fn eigen(&self, sign: i64) -> Result<Sublattice> {
        self.module().eigen_sublattice(sign)
    }

    pub fn lambda(&self) -> usize {
        self.module().comessatti()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BraneCase {
    Case1,
    Case2,
    Case3,
    Case4,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenSummary {
    pub rank: usize,
    pub signature: (usize, usize),
    #[serde(serialize_with = "io::ser_vec")]
    pub invariant_factors: Vec<BigInt>,
}

impl EigenSummary {
    fn of(l: &IntegerLattice) -> Self {
        EigenSummary {
            rank: l.rank(),
            signature: l.signature(),
            invariant_factors: l.discriminant_group().invariant_factors,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitReport {
    pub n: usize,
    pub case: BraneCase,
    /// Index of the matching line for Cases 1 and 2: the number of `E8(-1)`
    /// summands in the invariant lattice.
    pub line: Option<usize>,
    pub tau: i64,
    pub plus: EigenSummary,
    pub minus: EigenSummary,
}

/// Expected eigenlattices `(L^sigma, L^{sigma-})` on a line of Case 1 or 2.
pub fn expected_split(n: usize, case: BraneCase, line: usize) -> Result<(IntegerLattice, IntegerLattice)> {
    if line > 2 {
        return pre("line index must be 0, 1 or 2");
    }
    let g = format!("<{}>", 2 - 2 * n as i64);
    let e8 = |k: usize| if k == 0 { String::new() } else { format!(" + E8(-1)^{k}") };
    let (p, m) = match case {
        BraneCase::Case1 => (format!("U{}", e8(line)), format!("U^2{} + {g}", e8(2 - line))),
        BraneCase::Case2 => (format!("U{} + {g}", e8(line)), format!("U^2{}", e8(2 - line))),
        _ => return pre("explicit lines exist for Cases 1 and 2 only"),
    };
    Ok((make_named(&p)?, make_named(&m)?))
}

fn admissible(plus: &IntegerLattice, minus: &IntegerLattice) -> bool {
    plus.signature().0 == 1 && minus.signature().0 == 2
}

pub fn classify_split(mi: &MonodromyInvolution) -> Result<SplitReport> {
    let n = mi.n;
    if mi.lambda() != 0 {
        return pre("classification needs lambda(L, sigma) = 0");
    }
    let sp = mi.eigen(1)?;
    let sm = mi.eigen(-1)?;
    if sp.rank() == 0 || sm.rank() == 0 {
        return pre("sigma is not anti-symplectic: an eigenlattice is zero");
    }
    let plus = sp.lattice()?;
    let minus = sm.lattice()?;
    if !admissible(&plus, &minus) {
        return pre(format!(
            "sigma is not anti-symplectic: signatures {:?} and {:?}, expected (1, .) and (2, .)",
            plus.signature(),
            minus.signature()
        ));
    }
    let ap = plus.discriminant_group();
    let am = minus.discriminant_group();
    if ap.order() * am.order() != disc(n) {
        return internal("|A(L^sigma)| |A(L^sigma-)| differs from |A_L|");
    }
    let fp = &ap.invariant_factors;
    let fm = &am.invariant_factors;
    let (case, line) = if plus.is_unimodular() || minus.is_unimodular() {
        let case = if plus.is_unimodular() { BraneCase::Case1 } else { BraneCase::Case2 };
        let (tp, tm) = (plus.invariant_triple(), minus.invariant_triple());
        let mut line = None;
        for i in 0..=2 {
            let (ep, em) = expected_split(n, case, i)?;
            if ep.invariant_triple().equivalent(&tp) && em.invariant_triple().equivalent(&tm) {
                line = Some(i);
                break;
            }
        }
        if line.is_none() {
            return internal("eigenlattices match no line of the classification");
        }
        (case, line)
    } else if n >= 4 && n % 2 == 0 && *fp == [big(2)] && *fm == [big(n as i64 - 1)] {
        (BraneCase::Case3, None)
    } else if n >= 4 && n % 2 == 0 && *fp == [big(n as i64 - 1)] && *fm == [big(2)] {
        (BraneCase::Case4, None)
    } else {
        return internal(format!("no case fits: A(L^sigma) = {fp:?}, A(L^sigma-) = {fm:?}"));
    };
    Ok(SplitReport {
        n,
        case,
        line,
        tau: mi.tau,
        plus: EigenSummary::of(&plus),
        minus: EigenSummary::of(&minus),
    })
}

fn diag_sigma(plus: &[usize]) -> ZMatrix {
    let d: Vec<BigInt> = (0..RANK).map(|i| big(if plus.contains(&i) { 1 } else { -1 })).collect();
    ZMatrix::diagonal(&d)
}

/// Explicit representative of a case; `line` selects the line for Cases 1
/// and 2 and is ignored otherwise.
pub fn case_representative(n: usize, case: BraneCase, line: usize) -> Result<ZMatrix> {
    build_k3n_lattice(n)?;
    if line > 2 {
        return pre("line index must be 0, 1 or 2");
    }
    let mut plus: Vec<usize> = vec![0, 1];
    if line >= 1 {
        plus.extend(E8A);
    }
    if line == 2 {
        plus.extend(E8B);
    }
    match case {
        BraneCase::Case1 => Ok(diag_sigma(&plus)),
        BraneCase::Case2 => {
            plus.push(G);
            Ok(diag_sigma(&plus))
        }
        BraneCase::Case3 | BraneCase::Case4 => case34_representative(n, case),
    }
}

fn case34_representative(n: usize, case: BraneCase) -> Result<ZMatrix> {
    if n < 4 || n % 2 == 1 {
        return pre("Cases 3 and 4 occur only for even n >= 4");
    }
    let l = build_k3n_lattice(n)?;
    let s: i64 = if n % 4 == 0 { 2 } else { -2 };
    let m = (s + 2 * n as i64 - 2) / 8;
    // h = 2 (e1 + m f1) + g, h^2 = s, div(h) = 2
    let mut h = vec![BigInt::zero(); RANK];
    h[0] = big(2);
    h[1] = big(2 * m);
    h[G] = BigInt::one();
    if l.norm(&h) != big(s) || l.divisibility(&h)? != big(2) {
        return internal("auxiliary vector h has the wrong square or divisibility");
    }
    // On B = U1 + <g>: x -> -x + (2/s)(x.h) h fixes h and negates h^perp;
    // its negative is the reflection in h.
    let flip = case == BraneCase::Case3;
    let mut sigma = ZMatrix::zeros(RANK, RANK);
    for &j in &[0usize, 1, G] {
        let x = unit(RANK, j);
        let xh = l.dot(&x, &h);
        let coef = &xh * big(2 / s);
        for &i in &[0usize, 1, G] {
            let v = -&x[i] + &coef * &h[i];
            sigma[(i, j)] = if flip { v } else { -v };
        }
    }
    let set = |sigma: &mut ZMatrix, range: std::ops::Range<usize>, v: i64| {
        for i in range {
            sigma[(i, i)] = big(v);
        }
    };
    match (case, s) {
        (BraneCase::Case3, 2) => {
            set(&mut sigma, 2..22, -1);
        }
        (BraneCase::Case3, _) => {
            set(&mut sigma, 2..4, 1);
            set(&mut sigma, 4..22, -1);
        }
        (_, 2) => {
            set(&mut sigma, 2..4, 1);
            set(&mut sigma, 4..6, -1);
            set(&mut sigma, 6..22, 1);
        }
        _ => {
            set(&mut sigma, 2..6, -1);
            set(&mut sigma, 6..22, 1);
        }
    }
    let mi = MonodromyInvolution::new(n, sigma.clone())?;
    let plus = mi.eigen(1)?.lattice()?;
    let minus = mi.eigen(-1)?.lattice()?;
    if !admissible(&plus, &minus) {
        return internal("case 3/4 representative has inadmissible signatures");
    }
    Ok(sigma)
}

/// A random element `w` of `W(L)` with its inverse: a product of 4 to 8
/// reflections in `(-2)`-vectors and Eichler transvections supported on the
/// unimodular part.
pub fn random_weyl_element<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(ZMatrix, ZMatrix)> {
    let l = build_k3n_lattice(n)?;
    let mut w = ZMatrix::identity(RANK);
    let mut winv = ZMatrix::identity(RANK);
    let steps = rng.gen_range(4..=8);
    for _ in 0..steps {
        let (g, ginv) = if rng.gen_bool(0.5) {
            let r = random_root(&l, rng);
            let g = reflection(&l, &r);
            (g.clone(), g)
        } else {
            let (e, a) = random_transvection_data(&l, rng);
            (transvection(&l, &e, &a), transvection(&l, &e, &a.iter().map(|x| -x).collect::<Vec<_>>()))
        };
        w = g.mul(&w);
        winv = winv.mul(&ginv);
    }
    if !w.mul(&winv).is_identity() || &l.gram().congruence(&w) != l.gram() {
        return internal("random Weyl element is not an isometry with the stated inverse");
    }
    Ok((w, winv))
}

fn random_root<R: Rng + ?Sized>(l: &IntegerLattice, rng: &mut R) -> Vector {
    loop {
        let r = match rng.gen_range(0..3) {
            0 => {
                let i = 2 * rng.gen_range(0..3);
                let mut v = vec![BigInt::zero(); RANK];
                v[i] = BigInt::one();
                v[i + 1] = big(-1);
                v
            }
            1 => unit(RANK, rng.gen_range(6..22)),
            _ => {
                // e + k f + root of an E8 block, square -2 + 2k
                let i = 2 * rng.gen_range(0..3);
                let mut v = unit(RANK, rng.gen_range(6..22));
                v[i] = BigInt::one();
                v[i + 1] = BigInt::zero();
                v
            }
        };
        if l.norm(&r) == big(-2) {
            return r;
        }
    }
}

fn random_transvection_data<R: Rng + ?Sized>(l: &IntegerLattice, rng: &mut R) -> (Vector, Vector) {
    let plane = rng.gen_range(0..3);
    let (ie, if_) = if rng.gen_bool(0.5) { (2 * plane, 2 * plane + 1) } else { (2 * plane + 1, 2 * plane) };
    let e = unit(RANK, ie);
    loop {
        let mut a = vec![BigInt::zero(); RANK];
        for _ in 0..rng.gen_range(1..=3) {
            let j = rng.gen_range(0..22);
            if j / 2 == plane {
                continue;
            }
            a[j] += big(if rng.gen_bool(0.5) { 1 } else { -1 });
        }
        a[if_] = BigInt::zero();
        if !a.iter().all(|x| x.is_zero()) && l.dot(&a, &e).is_zero() {
            return (e, a);
        }
    }
}

/// `x -> x - 2 (x.r)/(r.r) r`, for `r^2 = -2` this is `x + (x.r) r`.
pub fn reflection(l: &IntegerLattice, r: &[BigInt]) -> ZMatrix {
    let rr = l.norm(r);
    let cols: Vec<Vector> = (0..l.rank())
        .map(|j| {
            let x = unit(l.rank(), j);
            let c = big(2) * l.dot(&x, r) / &rr;
            x.iter().zip(r).map(|(a, b)| a - &c * b).collect()
        })
        .collect();
    ZMatrix::from_columns(l.rank(), &cols)
}

/// Eichler transvection `x -> x - (a.x) e + (e.x) a - (a^2/2)(e.x) e` for
/// isotropic `e` and `a` orthogonal to `e`.
pub fn transvection(l: &IntegerLattice, e: &[BigInt], a: &[BigInt]) -> ZMatrix {
    let half_a2 = l.norm(a) / big(2);
    let cols: Vec<Vector> = (0..l.rank())
        .map(|j| {
            let x = unit(l.rank(), j);
            let ax = l.dot(a, &x);
            let ex = l.dot(e, &x);
            (0..l.rank()).map(|i| &x[i] - &ax * &e[i] + &ex * &a[i] - &half_a2 * &ex * &e[i]).collect()
        })
        .collect();
    ZMatrix::from_columns(l.rank(), &cols)
}

/// `w sigma w^{-1}`.
pub fn conjugate(sigma: &ZMatrix, w: &ZMatrix, winv: &ZMatrix) -> ZMatrix {
    w.mul(sigma).mul(winv)
}

#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub case: BraneCase,
    pub line: usize,
    pub sigma: ZMatrix,
}

/// A case representative conjugated by a random Weyl element.
pub fn random_admissible(n: usize, seed: u64) -> Result<RandomInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let even_big = n >= 4 && n % 2 == 0;
    let case = match rng.gen_range(0..if even_big { 4 } else { 2 }) {
        0 => BraneCase::Case1,
        1 => BraneCase::Case2,
        2 => BraneCase::Case3,
        _ => BraneCase::Case4,
    };
    let line = match case {
        BraneCase::Case1 | BraneCase::Case2 => rng.gen_range(0..3),
        _ => 0,
    };
    let rep = case_representative(n, case, line)?;
    let (w, winv) = random_weyl_element(n, &mut rng)?;
    Ok(RandomInstance { case, line, sigma: conjugate(&rep, &w, &winv) })
}

/// Orbit key `(v^2, v*)` with `v* = v / div(v)` in the discriminant group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EichlerKey {
    #[serde(serialize_with = "io::ser_int")]
    pub norm: BigInt,
    #[serde(serialize_with = "io::ser_vec")]
    pub class: Vec<BigInt>,
}

pub fn eichler_orbit_key(l: &IntegerLattice, v: &[BigInt]) -> Result<EichlerKey> {
    if !l.is_even() {
        return pre("orbit keys need an even lattice");
    }
    let c = l.discriminant_class(v)?;
    Ok(EichlerKey { norm: l.norm(v), class: c.coords })
}

pub fn eichler_equivalent(l: &IntegerLattice, v: &[BigInt], w: &[BigInt]) -> Result<bool> {
    Ok(eichler_orbit_key(l, v)? == eichler_orbit_key(l, w)?)
}

fn rat_vec(v: &[BigInt]) -> Vec<BigRational> {
    v.iter().map(rat).collect()
}

fn to_integral(v: &[BigRational]) -> Option<Vector> {
    v.iter().all(|x| x.is_integer()).then(|| v.iter().map(|x| x.to_integer()).collect())
}

/// A vector `eps` of `lp` with `eps^2 = 2-2n` and `eps / (2n-2)` in the
/// class of the dual vector `y0`, which must satisfy
/// `q(y0) = -1/(2n-2) mod 2`.
fn epsilon_from_dual(lp: &IntegerLattice, n: usize, y0: &[BigRational]) -> Result<Vector> {
    let d = disc(n);
    let (e, f) = lp.find_hyperbolic_plane()?;
    let a = rational_dot(lp, y0, &rat_vec(&f));
    let b = rational_dot(lp, y0, &rat_vec(&e));
    if !a.is_integer() || !b.is_integer() {
        return pre("y0 is not a dual vector");
    }
    let yp: Vec<BigRational> =
        (0..lp.rank()).map(|i| &y0[i] - &a * rat(&e[i]) - &b * rat(&f[i])).collect();
    let yy = rational_dot(lp, &yp, &yp);
    let nn = (yy + BigRational::new(BigInt::one(), d.clone())) / rat(&big(2));
    if !nn.is_integer() {
        return pre("q(y0) is not -1/(2n-2) mod 2");
    }
    let nn = nn.to_integer();
    let eps: Vec<BigRational> =
        (0..lp.rank()).map(|i| rat(&d) * (&yp[i] + rat(&e[i]) - rat(&nn) * rat(&f[i]))).collect();
    to_integral(&eps).ok_or_else(|| Error::Internal("epsilon is not integral".into()))
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsilonReport {
    #[serde(serialize_with = "io::ser_vec")]
    pub x: Vector,
    #[serde(serialize_with = "io::ser_vec")]
    pub epsilon: Vector,
    pub k: i64,
}

/// `eps = k x + (2n-2) w` in a lattice `lp` whose discriminant group is
/// cyclic of order `2n-2`: `x` has square `2-2n` and divisibility `2n-2`,
/// `w` lies in a hyperbolic plane orthogonal to `x` with
/// `w^2 = (k^2-1)/(2n-2)`.
pub fn construct_epsilon(lp: &IntegerLattice, n: usize, k: i64) -> Result<EpsilonReport> {
    let d = disc(n);
    if n < 2 {
        return pre("n >= 2 required");
    }
    if !big(k).gcd(&d).is_one() {
        return pre("k must be coprime to 2n-2");
    }
    let a = lp.discriminant_group();
    if a.invariant_factors != [d.clone()] {
        return pre("lattice has no element of divisibility 2n-2 with cyclic discriminant");
    }
    let q = &a.qvalues.as_ref().ok_or_else(|| Error::Precondition("lattice must be even".into()))?[0];
    let target = crate::lattice::rat_mod(&-BigRational::new(BigInt::one(), d.clone()), &big(2));
    let dd = d.to_i64().expect("small discriminant");
    let u = (1..=dd)
        .filter(|u| big(*u).gcd(&d).is_one())
        .find(|u| crate::lattice::rat_mod(&(q * rat(&big(u * u))), &big(2)) == target)
        .ok_or_else(|| Error::Precondition("no generator with q = -1/(2n-2)".into()))?;
    let y0: Vec<BigRational> = a.generator_reps[0].iter().map(|c| c * rat(&big(u))).collect();
    let x = epsilon_from_dual(lp, n, &y0)?;
    let eps = if k == 1 {
        x.clone()
    } else {
        let w2 = big(k * k - 1);
        if !(&w2 % &d).is_zero() || !(&w2 / &d).is_even() {
            return pre("(k^2 - 1)/(2n - 2) is not an even integer; invalid k");
        }
        let w2 = &w2 / &d;
        let comp = lp.orthogonal_complement(&[x.clone()])?;
        let (e, f) = comp.lattice()?.find_hyperbolic_plane()?;
        let (e, f) = (comp.to_ambient(&e), comp.to_ambient(&f));
        let half = &w2 / big(2);
        (0..lp.rank()).map(|i| big(k) * &x[i] + &d * (&e[i] + &half * &f[i])).collect()
    };
    if !lp.is_primitive(&eps)? || lp.norm(&eps) != -&d || lp.divisibility(&eps)? != d {
        return internal("epsilon fails primitivity, square or divisibility");
    }
    let ce = lp.discriminant_class(&eps)?.coords;
    let cx = lp.discriminant_class(&x)?.coords;
    if ce[0] != (big(k) * &cx[0]).mod_floor(&d) {
        return internal("epsilon* differs from k x*");
    }
    Ok(EpsilonReport { x, epsilon: eps, k })
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionCertificate {
    pub n: usize,
    pub case: BraneCase,
    pub line: Option<usize>,
    pub tau: i64,
    pub route: String,
    pub witness_labels: Vec<String>,
    #[serde(serialize_with = "io::ser_vecs")]
    pub witness_vectors: Vec<Vector>,
    #[serde(serialize_with = "io::ser_matrix")]
    pub witness_matrix: ZMatrix,
    pub lambda_witness: usize,
    pub lambda_h4: Option<usize>,
    pub lambda_q: Option<usize>,
    pub lambda_lower_bound: usize,
}

/// Classify and certify `lambda(H^2 + H^4) >= 1`.
pub fn obstruct(n: usize, sigma: ZMatrix) -> Result<ObstructionCertificate> {
    let mi = MonodromyInvolution::new(n, sigma)?;
    let split = classify_split(&mi)?;
    match split.case {
        BraneCase::Case1 | BraneCase::Case2 => obstruction_case12(&mi, &split),
        BraneCase::Case3 | BraneCase::Case4 => obstruction_case34(&mi, &split),
    }
}

pub fn obstruction_case12(mi: &MonodromyInvolution, split: &SplitReport) -> Result<ObstructionCertificate> {
    let n = mi.n;
    let l = &mi.lattice;
    let d = disc(n);
    let case1 = match split.case {
        BraneCase::Case1 => true,
        BraneCase::Case2 => false,
        _ => return pre("wrong case for this obstruction"),
    };
    // L' is the eigenlattice carrying the discriminant.
    let sub = mi.eigen(if case1 { -1 } else { 1 })?;
    let lp = sub.lattice()?;
    let g = unit(RANK, G);
    let sg = mi.sigma.mul_vec(&g);
    let sign = if case1 { big(-1) } else { BigInt::one() };
    let twice: Vector = g.iter().zip(&sg).map(|(a, b)| a + &sign * b).collect();
    if twice.iter().any(|x| x.is_odd()) {
        return internal("eigen-component of g is not integral despite lambda = 0");
    }
    let gp: Vector = twice.iter().map(|x| x / big(2)).collect();
    let gc = sub.coords(&gp).ok_or_else(|| Error::Internal("g' not in L'".into()))?;
    let y0: Vec<BigRational> = gc.iter().map(|c| BigRational::new(c.clone(), d.clone())).collect();
    let eps = sub.to_ambient(&epsilon_from_dual(&lp, n, &y0)?);
    if l.norm(&eps) != -&d || l.divisibility(&eps)? != d || !l.is_primitive(&eps)? {
        return internal("epsilon fails square, divisibility or primitivity in L");
    }
    if eichler_orbit_key(l, &eps)? != eichler_orbit_key(l, &g)? {
        return internal("epsilon is not in the Eichler orbit of the generator");
    }
    let se = mi.sigma.mul_vec(&eps);
    let expect: Vector = eps.iter().map(|x| &sign * x).collect();
    if se != expect {
        return internal("sigma does not preserve epsilon up to the expected sign");
    }
    if n >= 3 && mi.tau != if case1 { -1 } else { 1 } {
        return internal("discriminant character contradicts the sign of sigma on epsilon");
    }
    // H^2 of the surface is epsilon^perp.
    let perp = l.orthogonal_complement(&[eps.clone()])?;
    let h2 = perp.lattice()?;
    if h2.rank() != 22 || !h2.is_unimodular() {
        return internal("epsilon^perp is not unimodular of rank 22");
    }
    let sigma_s = perp.restrict(&mi.sigma)?;
    let (kind, alpha_sign, route) = if case1 {
        (SurfaceKind::AntiHolomorphic, 1, "sigma(delta) = -delta: tau = -1 branch, alpha invariant")
    } else {
        (SurfaceKind::Holomorphic, -1, "sigma(delta) = delta: tau = +1 branch, alpha anti-invariant")
    };
    let kern = sigma_s.sub(&ZMatrix::identity(22).scale(&big(alpha_sign))).kernel();
    if kern.ncols() == 0 {
        return internal("no eigenclass of the required sign in epsilon^perp");
    }
    let alpha_s = kern.col(0);
    let surface = SurfaceData::new(sigma_s, Some(h2), kind, true, true, false)?;
    let cert = h4_pair_certificate(&surface, n, &alpha_s)?;
    let alpha = perp.to_ambient(&alpha_s);
    Ok(ObstructionCertificate {
        n,
        case: split.case,
        line: split.line,
        tau: mi.tau,
        route: route.into(),
        witness_labels: vec![
            "epsilon (L coordinates)".into(),
            "alpha (L coordinates)".into(),
            "M11(alpha) (H^4 basis over epsilon^perp)".into(),
            "P2(alpha) (H^4 basis over epsilon^perp)".into(),
        ],
        witness_vectors: vec![eps, alpha, cert.u, cert.v],
        witness_matrix: ZMatrix::from_i64(&[&cert.block[0], &cert.block[1]]),
        lambda_witness: cert.lambda_block,
        lambda_h4: Some(cert.lambda_h4),
        lambda_q: None,
        lambda_lower_bound: 1,
    })
}

/// The extended lattice `Q = U + U^3 + E8(-1)^2` with `gamma = e0 + (n-1) f0`
/// and the embedding `e: L -> gamma^perp`, `g -> e0 - (n-1) f0`.
pub struct MukaiQ {
    pub lattice: IntegerLattice,
    pub gamma: Vector,
    pub embedding: ZMatrix,
}

pub fn mukai_q(n: usize) -> Result<MukaiQ> {
    let l = build_k3n_lattice(n)?;
    let idx: Vec<usize> = (0..22).collect();
    let uni = l.gram().submatrix(&idx, &idx);
    let q = IntegerLattice::new(ZMatrix::block_diag(&[ZMatrix::from_i64(&[&[0, 1], &[1, 0]]), uni]))?;
    let nm1 = big(n as i64 - 1);
    let mut gamma = vec![BigInt::zero(); 24];
    gamma[0] = BigInt::one();
    gamma[1] = nm1.clone();
    let mut e = ZMatrix::zeros(24, RANK);
    for j in 0..22 {
        e[(j + 2, j)] = BigInt::one();
    }
    e[(0, G)] = BigInt::one();
    e[(1, G)] = -nm1;
    if &q.gram().congruence(&e) != l.gram() {
        return internal("embedding of L into Q is not an isometry");
    }
    if q.norm(&gamma) != disc(n) || !q.gram().mul(&e).transpose().mul_vec(&gamma).iter().all(|x| x.is_zero()) {
        return internal("gamma has the wrong square or is not orthogonal to e(L)");
    }
    Ok(MukaiQ { lattice: q, gamma, embedding: e })
}

pub fn obstruction_case34(mi: &MonodromyInvolution, split: &SplitReport) -> Result<ObstructionCertificate> {
    let n = mi.n;
    let case3 = match split.case {
        BraneCase::Case3 => true,
        BraneCase::Case4 => false,
        _ => return pre("wrong case for this obstruction"),
    };
    if n < 4 || n % 2 == 1 {
        return pre("Cases 3 and 4 need even n >= 4");
    }
    let expected_tau = if case3 { -1 } else { 1 };
    if mi.tau != expected_tau {
        return internal("discriminant character does not match the case");
    }
    let mq = mukai_q(n)?;
    let q = &mq.lattice;
    let t = ZMatrix::from_fn(24, 24, |i, j| if j == 0 { mq.gamma[i].clone() } else { mq.embedding[(i, j - 1)].clone() });
    let tinv = t.inverse_rational().ok_or_else(|| Error::Internal("T is singular".into()))?;
    let inner = ZMatrix::block_diag(&[ZMatrix::identity(1), mi.sigma.scale(&big(mi.tau))]);
    let ti = t.mul(&inner);
    let mut sq = ZMatrix::zeros(24, 24);
    for i in 0..24 {
        for j in 0..24 {
            let v: BigRational = (0..24).map(|k| rat(&ti[(i, k)]) * &tinv[k][j]).sum();
            if !v.is_integer() {
                return internal("sigma_Q is not integral");
            }
            sq[(i, j)] = v.to_integer();
        }
    }
    if !is_involution(&sq) || &q.gram().congruence(&sq) != q.gram() {
        return internal("sigma_Q is not an isometric involution");
    }
    let d = disc(n);
    let delta: Vector = unit(RANK, G).iter().map(|x| -x).collect();
    let delta_p = mq.embedding.mul_vec(&delta);
    let w_twice: Vector = delta_p.iter().zip(&mq.gamma).map(|(a, b)| a + b).collect();
    let w: Vector = w_twice.iter().map(|x| x / &d).collect();
    if w_twice.iter().any(|x| !(x % &d).is_zero()) || w != unit(24, 1) {
        return internal("(delta' + gamma)/(2n-2) is not the expected vector");
    }
    let sw = sq.mul_vec(&w);
    let diff: Vector = w.iter().zip(&sw).map(|(a, b)| a - b).collect();
    let sd = mi.sigma.mul_vec(&delta);
    let sgn = if case3 { BigInt::one() } else { big(-1) };
    // delta = (n-1) x + 2 y (Case 3) or 2 x + (n-1) y (Case 4)
    let part: Vector = delta.iter().zip(&sd).map(|(a, b)| a + &sgn * b).collect();
    let nm1 = big(n as i64 - 1);
    let two_nm1 = &nm1 * big(2);
    if part.iter().any(|x| !(x % &two_nm1).is_zero()) {
        return internal("eigen-part of delta is not divisible by n-1");
    }
    let x: Vector = part.iter().map(|v| v / &two_nm1).collect();
    let ex = mq.embedding.mul_vec(&x);
    if diff != ex {
        return internal("w - sigma_Q(w) differs from e(x)");
    }
    if diff.iter().all(|v| v.is_even()) {
        return internal("w - sigma_Q(w) is divisible by 2");
    }
    let lambda_q = comessatti_of(&sq)?;
    if lambda_q < 1 {
        return internal("lambda(Q) = 0 despite a non-2-divisible w - sigma_Q(w)");
    }
    Ok(ObstructionCertificate {
        n,
        case: split.case,
        line: None,
        tau: mi.tau,
        route: if case3 { "delta = (n-1)x + 2y".into() } else { "delta = 2x + (n-1)y".into() },
        witness_labels: vec![
            "gamma (Q coordinates)".into(),
            "w = (delta' + gamma)/(2n-2) (Q coordinates)".into(),
            "w - sigma_Q(w) = e(x) (Q coordinates)".into(),
            "x (L coordinates)".into(),
        ],
        witness_vectors: vec![mq.gamma.clone(), w, diff, x],
        witness_matrix: sq,
        lambda_witness: lambda_q,
        lambda_h4: None,
        lambda_q: Some(lambda_q),
        lambda_lower_bound: 1,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepOutcome {
    pub seed: u64,
    pub case: BraneCase,
    pub line: usize,
    pub certified: bool,
    pub error: Option<String>,
}

/// Run the obstruction pipeline on `count` random admissible involutions.
pub fn obstruction_sweep(exec: Exec, n: usize, count: usize, seed: u64) -> Vec<SweepOutcome> {
    exec.map(count, |i| {
        let s = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64);
        match random_admissible(n, s) {
            Ok(inst) => {
                let r = obstruct(n, inst.sigma);
                let certified = matches!(&r, Ok(c) if c.lambda_lower_bound >= 1 && c.case == inst.case);
                SweepOutcome { seed: s, case: inst.case, line: inst.line, certified, error: r.err().map(|e| e.to_string()) }
            }
            Err(e) => SweepOutcome { seed: s, case: BraneCase::Case1, line: 0, certified: false, error: Some(e.to_string()) },
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SlackTarget {
    K3n(usize),
    Og6,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlackComponent {
    /// `0` for isolated points, `m >= 1` for K3^[m]-type components.
    pub m: usize,
    pub count: u64,
    pub betti_total: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlackReport {
    pub target: SlackTarget,
    /// For OG6 each entry is an alternative fixed locus.
    pub options: Vec<Vec<SlackComponent>>,
    pub fixed_total: u64,
    pub ambient_total: u64,
    pub slack: u64,
}

/// Even Betti numbers of OG6 in degrees 0, 2, .., 12.
pub const OG6_BETTI: [u64; 7] = [1, 8, 199, 1504, 199, 8, 1];

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub fn symplectic_smith_slack(target: SlackTarget) -> Result<SlackReport> {
    let k3_total = |m: usize| -> u64 {
        let s = goettsche_series(22, m);
        total(&s[m]).to_u64().expect("fits")
    };
    let (options, ambient) = match target {
        SlackTarget::K3n(n) => {
            if n == 0 {
                return pre("n >= 1 required");
            }
            let mut comps = Vec::new();
            for m in 0..=n / 2 {
                let rest = (n - 2 * m) as u64;
                let count: u64 = (0..=rest).filter(|k| (rest - k) % 2 == 0).map(|k| binom(8, k) * binom(k, (rest - k) / 2)).sum();
                if count > 0 {
                    let betti_total = if m == 0 { 1 } else { k3_total(m) };
                    comps.push(SlackComponent { m, count, betti_total });
                }
            }
            (vec![comps], k3_total(n))
        }
        SlackTarget::Og6 => {
            let k3 = k3_total(1);
            (
                vec![
                    vec![SlackComponent { m: 1, count: 16, betti_total: k3 }],
                    vec![SlackComponent { m: 0, count: 16, betti_total: 1 }],
                    vec![SlackComponent { m: 1, count: 2, betti_total: k3 }],
                ],
                OG6_BETTI.iter().sum(),
            )
        }
    };
    let fixed_total = options
        .iter()
        .map(|o| o.iter().map(|c| c.count * c.betti_total).sum::<u64>())
        .max()
        .unwrap_or(0);
    if fixed_total > ambient {
        return internal("Smith inequality violated in slack table");
    }
    Ok(SlackReport { target, options, fixed_total, ambient_total: ambient, slack: ambient - fixed_total })
}

/// Total Betti numbers of `S^[n]` for K3, convenience for reports.
pub fn k3n_betti_total(n: usize) -> BigUint {
    total(&goettsche_series(22, n)[n])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_shape() {
        for n in 2..=6 {
            let l = build_k3n_lattice(n).unwrap();
            assert_eq!(l.rank(), 23);
            assert_eq!(l.signature(), (3, 20));
            assert_eq!(l.discriminant_group().invariant_factors, vec![disc(n)]);
        }
        assert!(build_k3n_lattice(1).is_err());
    }

    #[test]
    fn tau_examples() {
        let l = build_k3n_lattice(3).unwrap();
        assert_eq!(discriminant_action(&l, &ZMatrix::identity(23)).unwrap(), 1);
        assert_eq!(discriminant_action(&l, &ZMatrix::identity(23).neg()).unwrap(), -1);
        let mut s = ZMatrix::identity(23);
        s[(G, G)] = big(-1);
        assert_eq!(discriminant_action(&l, &s).unwrap(), -1);
    }

    #[test]
    fn representatives_classify() {
        for n in [2, 3, 5] {
            for case in [BraneCase::Case1, BraneCase::Case2] {
                for line in 0..3 {
                    let s = case_representative(n, case, line).unwrap();
                    let r = classify_split(&MonodromyInvolution::new(n, s).unwrap()).unwrap();
                    assert_eq!((r.case, r.line), (case, Some(line)), "n={n}");
                }
            }
            assert!(case_representative(n, BraneCase::Case3, 0).is_err());
        }
        for case in [BraneCase::Case3, BraneCase::Case4] {
            let s = case_representative(4, case, 0).unwrap();
            let mi = MonodromyInvolution::new(4, s).unwrap();
            let r = classify_split(&mi).unwrap();
            assert_eq!(r.case, case);
        }
    }

    #[test]
    fn identity_rejected() {
        let mi = MonodromyInvolution::new(3, ZMatrix::identity(23)).unwrap();
        assert!(matches!(classify_split(&mi), Err(Error::Precondition(_))));
    }

    #[test]
    fn epsilon_examples() {
        let lp = make_named("U^2 + <-2>").unwrap();
        let r = construct_epsilon(&lp, 2, 3).unwrap();
        assert_eq!(lp.norm(&r.epsilon), big(-2));
        let lp = make_named("U^2 + <-6>").unwrap();
        let r = construct_epsilon(&lp, 4, 5).unwrap();
        assert_eq!(lp.norm(&r.epsilon), big(-6));
        let one = construct_epsilon(&lp, 4, 1).unwrap();
        assert_eq!(one.x, one.epsilon);
        assert!(construct_epsilon(&lp, 4, 3).is_err());
    }

    #[test]
    fn eichler_keys() {
        let l = build_k3n_lattice(3).unwrap();
        assert!(eichler_equivalent(&l, &unit(23, 0), &unit(23, 1)).unwrap());
        let mut r2 = unit(23, 0);
        r2[1] = big(-1);
        let mut r4 = unit(23, 0);
        r4[1] = big(-2);
        assert!(!eichler_equivalent(&l, &r2, &r4).unwrap());
    }

    #[test]
    fn obstructions_on_representatives() {
        for n in [2, 3] {
            for case in [BraneCase::Case1, BraneCase::Case2] {
                let c = obstruct(n, case_representative(n, case, 1).unwrap()).unwrap();
                assert_eq!(c.witness_matrix, ZMatrix::from_i64(&[&[1, 1], &[0, -1]]));
                assert!(c.lambda_h4.unwrap() >= 1);
            }
        }
        for n in [4, 6] {
            for case in [BraneCase::Case3, BraneCase::Case4] {
                let c = obstruct(n, case_representative(n, case, 0).unwrap()).unwrap();
                assert!(c.lambda_q.unwrap() >= 1, "n={n} {case:?}");
            }
        }
    }

    #[test]
    fn random_instances_certify() {
        for n in [2, 3, 4, 5] {
            let out = obstruction_sweep(Exec::Sequential, n, 6, 11);
            for o in out {
                assert!(o.certified, "n={n} {o:?}");
            }
        }
    }

    #[test]
    fn slack_tables() {
        let r = symplectic_smith_slack(SlackTarget::K3n(2)).unwrap();
        assert_eq!((r.fixed_total, r.ambient_total), (52, 324));
        let r = symplectic_smith_slack(SlackTarget::K3n(3)).unwrap();
        assert_eq!((r.fixed_total, r.ambient_total), (256, 3200));
        let r = symplectic_smith_slack(SlackTarget::K3n(1)).unwrap();
        assert_eq!((r.fixed_total, r.ambient_total), (8, 24));
        let r = symplectic_smith_slack(SlackTarget::Og6).unwrap();
        assert_eq!((r.fixed_total, r.ambient_total), (384, 1920));
    }
}
