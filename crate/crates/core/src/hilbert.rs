//! Cohomology of Hilbert schemes of points on a surface with `H^1(S, F2) = 0`.
//!
//! Betti numbers come from the Göttsche product formula; the census counts
//! Nakajima-style basis tuples independently so the two can be compared.
//! The induced involution is implemented on the degree 2 and degree 4
//! integral bases only.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::Value;

use crate::error::{internal, pre, Error, Result};
use crate::exec::Exec;
use crate::involution::{comessatti_of, is_involution, mod2};
use crate::io;
use crate::lattice::IntegerLattice;
use crate::zmat::{content, ZMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Holomorphic,
    AntiHolomorphic,
}

impl SurfaceKind {
    /// Sign of the action on `p_{-2}`-type classes.
    fn epsilon(self) -> i64 {
        match self {
            SurfaceKind::Holomorphic => 1,
            SurfaceKind::AntiHolomorphic => -1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SurfaceData {
    pub b2: usize,
    pub sigma_h2: ZMatrix,
    pub gram: Option<IntegerLattice>,
    pub kind: SurfaceKind,
    pub surface_maximal: bool,
    pub has_fixed_points: bool,
    pub h20_nonzero: bool,
}

impl SurfaceData {
    pub fn new(
        sigma_h2: ZMatrix,
        gram: Option<IntegerLattice>,
        kind: SurfaceKind,
        surface_maximal: bool,
        has_fixed_points: bool,
        h20_nonzero: bool,
    ) -> Result<Self> {
        if !is_involution(&sigma_h2) {
            return pre("sigma_h2 is not an involution");
        }
        if let Some(g) = &gram {
            if g.rank() != sigma_h2.nrows() || !g.is_unimodular() {
                return pre("intersection form must be unimodular of rank b2");
            }
            if &g.gram().congruence(&sigma_h2) != g.gram() {
                return pre("sigma_h2 is not an isometry of the intersection form");
            }
        }
        Ok(SurfaceData {
            b2: sigma_h2.nrows(),
            sigma_h2,
            gram,
            kind,
            surface_maximal,
            has_fixed_points,
            h20_nonzero,
        })
    }

    /// Parse `{"b2", "sigma", "kind", "maximal", "fixed_points", "h20", "gram"?}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let b2 = io::parse_usize(io::field(v, "b2")?)?;
        let sigma = if b2 == 0 { ZMatrix::zeros(0, 0) } else { io::parse_matrix(io::field(v, "sigma")?)? };
        if sigma.nrows() != b2 || sigma.ncols() != b2 {
            return pre(format!("sigma must be {b2}x{b2}"));
        }
        let kind = match io::field(v, "kind")?.as_str() {
            Some("holo") | Some("holomorphic") => SurfaceKind::Holomorphic,
            Some("antiholo") | Some("anti-holomorphic") | Some("anti_holomorphic") => SurfaceKind::AntiHolomorphic,
            _ => return Err(Error::Parse("kind must be \"holo\" or \"antiholo\"".into())),
        };
        let gram = match v.get("gram") {
            Some(g) => Some(IntegerLattice::new(io::parse_matrix(g)?)?),
            None => None,
        };
        SurfaceData::new(
            sigma,
            gram,
            kind,
            io::parse_bool(v, "maximal")?,
            io::parse_bool(v, "fixed_points")?,
            io::parse_bool(v, "h20")?,
        )
    }
}

/// Interleave zeros: half-degree coefficients to coefficients indexed by degree.
fn spread(half: &[BigUint]) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); 2 * half.len() - 1];
    for (k, c) in half.iter().enumerate() {
        out[2 * k] = c.clone();
    }
    out
}

/// Poincaré polynomials of `S^[n]` for `n = 0..=n_max`; entry `[n][d]` is
/// `b_d(S^[n])`, `d = 0..=4n`.
pub fn goettsche_series(b2: usize, n_max: usize) -> Vec<Vec<BigUint>> {
    // poly[n][k]: coefficient of q^n t^{2k}
    let mut poly: Vec<Vec<BigUint>> = (0..=n_max).map(|n| vec![BigUint::zero(); 2 * n + 1]).collect();
    poly[0][0] = BigUint::one();
    for m in 1..=n_max {
        for (half_deg, e) in [(m - 1, 1usize), (m, b2), (m + 1, 1)] {
            if e == 0 {
                continue;
            }
            // multiply by (1 - t^{2 half_deg} q^m)^{-e} = sum_j C(e+j-1, j) t^{2 half_deg j} q^{m j}
            let mut next = poly.clone();
            for n in 0..=n_max {
                for k in 0..poly[n].len() {
                    if poly[n][k].is_zero() {
                        continue;
                    }
                    let mut j = 1;
                    let mut c = BigUint::one();
                    while n + m * j <= n_max {
                        c = c * BigUint::from(e + j - 1) / BigUint::from(j);
                        next[n + m * j][k + half_deg * j] += &c * &poly[n][k];
                        j += 1;
                    }
                }
            }
            poly = next;
        }
    }
    poly.iter().map(|p| spread(p)).collect()
}

pub fn total(poly: &[BigUint]) -> BigUint {
    poly.iter().sum()
}

pub type Partition = Vec<usize>;

/// A basis tuple `(lambda, mu, nu^1..nu^b2)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionTuple {
    pub lambda: Partition,
    pub mu: Partition,
    pub nu: Vec<Partition>,
    pub degree: usize,
    /// `z_lambda = prod i^{m_i} m_i!`, carried as metadata.
    pub z_lambda: u64,
}

/// Partitions of `n` with non-increasing parts.
pub fn partitions(n: usize) -> Vec<Partition> {
    fn rec(n: usize, max: usize, cur: &mut Partition, out: &mut Vec<Partition>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=n.min(max)).rev() {
            cur.push(p);
            rec(n - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

pub fn z_factor(p: &[usize]) -> u64 {
    let mut z = 1u64;
    let mut i = 0;
    while i < p.len() {
        let mut j = i;
        while j < p.len() && p[j] == p[i] {
            j += 1;
        }
        let m = (j - i) as u64;
        z *= (p[i] as u64).pow(m as u32) * (1..=m).product::<u64>();
        i = j;
    }
    z
}

fn lambda_degree(p: &[usize]) -> usize {
    p.iter().map(|a| 2 * (a - 1)).sum()
}

fn mu_degree(p: &[usize]) -> usize {
    p.iter().map(|a| 2 * (a + 1)).sum()
}

/// Explicit list of basis tuples; intended for small `b2` and `n`.
pub fn enumerate_tuples(b2: usize, n: usize) -> Vec<PartitionTuple> {
    let parts: Vec<Vec<Partition>> = (0..=n).map(partitions).collect();
    let mut out = Vec::new();
    // distribute sizes: |lambda| + |mu| + sum |nu^i| = n
    fn sizes(k: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            if n == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for s in 0..=n {
            cur.push(s);
            sizes(k - 1, n - s, cur, out);
            cur.pop();
        }
    }
    let mut splits = Vec::new();
    sizes(b2 + 2, n, &mut Vec::new(), &mut splits);
    for split in splits {
        let mut acc: Vec<Vec<Partition>> = vec![vec![]];
        for &s in &split {
            acc = acc
                .into_iter()
                .flat_map(|prefix| {
                    parts[s].iter().map(move |p| {
                        let mut v = prefix.clone();
                        v.push(p.clone());
                        v
                    })
                })
                .collect();
        }
        for mut choice in acc {
            let nu = choice.split_off(2);
            let mu = choice.pop().expect("mu");
            let lambda = choice.pop().expect("lambda");
            let degree = lambda_degree(&lambda) + mu_degree(&mu) + nu.iter().map(|p| 2 * p.iter().sum::<usize>()).sum::<usize>();
            let z_lambda = z_factor(&lambda);
            out.push(PartitionTuple { lambda, mu, nu, degree, z_lambda });
        }
    }
    out
}

/// Number of basis tuples in each degree `d = 0..=4n`.
pub fn lqw_census(b2: usize, n: usize) -> Vec<BigUint> {
    let parts: Vec<Vec<Partition>> = (0..=n).map(partitions).collect();
    let len = 2 * n + 1;
    // per-size, per-half-degree counts for each partition role
    let table = |deg: &dyn Fn(&[usize]) -> usize| -> Vec<Vec<BigUint>> {
        (0..=n)
            .map(|s| {
                let mut row = vec![BigUint::zero(); len];
                for p in &parts[s] {
                    row[deg(p) / 2] += 1u32;
                }
                row
            })
            .collect()
    };
    let lam = table(&lambda_degree);
    let mu = table(&mu_degree);
    let nu_one = table(&|p: &[usize]| 2 * p.iter().sum::<usize>());
    // nu^1..nu^b2 by dynamic programming over labels
    let mut nu: Vec<Vec<BigUint>> = (0..=n).map(|_| vec![BigUint::zero(); len]).collect();
    nu[0][0] = BigUint::one();
    for _ in 0..b2 {
        nu = convolve(&nu, &nu_one, n, len);
    }
    let all = convolve(&convolve(&lam, &mu, n, len), &nu, n, len);
    spread(&all[n])
}

fn convolve(a: &[Vec<BigUint>], b: &[Vec<BigUint>], n: usize, len: usize) -> Vec<Vec<BigUint>> {
    let mut out: Vec<Vec<BigUint>> = (0..=n).map(|_| vec![BigUint::zero(); len]).collect();
    for s in 0..=n {
        for t in 0..=n - s {
            for i in 0..len {
                if a[s][i].is_zero() {
                    continue;
                }
                for j in 0..len - i {
                    if !b[t][j].is_zero() {
                        out[s + t][i + j] += &a[s][i] * &b[t][j];
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusCheck {
    pub b2: usize,
    pub n: usize,
    pub agrees: bool,
}

/// Compare census and Göttsche coefficients for all `b2 <= b2_max`,
/// `1 <= n <= n_max`.
pub fn census_sweep(exec: Exec, b2_max: usize, n_max: usize) -> Vec<CensusCheck> {
    let cells: Vec<(usize, usize)> = (0..=b2_max).flat_map(|b| (1..=n_max).map(move |n| (b, n))).collect();
    let series: Vec<Vec<Vec<BigUint>>> = exec.map(b2_max + 1, |b| goettsche_series(b, n_max));
    exec.map(cells.len(), |i| {
        let (b2, n) = cells[i];
        CensusCheck { b2, n, agrees: lqw_census(b2, n) == series[b2][n] }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum H4Tag {
    Pt,
    P2 { i: usize },
    P1P1 { i: usize, j: usize },
    M11 { i: usize },
    P3Unit,
    P2UnitA { i: usize },
    P2P2Unit,
}

/// The degree 4 integral basis, in the fixed order used by [`h4_induced`].
pub fn h4_basis(b2: usize, n: usize) -> Result<Vec<H4Tag>> {
    if n < 2 {
        return pre("degree 4 basis requires n >= 2");
    }
    let mut out = vec![H4Tag::Pt];
    out.extend((0..b2).map(|i| H4Tag::P2 { i }));
    for i in 0..b2 {
        out.extend((i + 1..b2).map(|j| H4Tag::P1P1 { i, j }));
    }
    out.extend((0..b2).map(|i| H4Tag::M11 { i }));
    if n >= 3 {
        out.push(H4Tag::P3Unit);
        out.extend((0..b2).map(|i| H4Tag::P2UnitA { i }));
    }
    if n >= 4 {
        out.push(H4Tag::P2P2Unit);
    }
    Ok(out)
}

/// `P1P1(a, b)` for arbitrary classes, resolved in the integral basis via
/// `P1P1(x, x) = 2 M11(x) + P2(x)`.
fn pair_image(ix: &H4Index, a: &[BigInt], b: &[BigInt]) -> Vec<(usize, BigInt)> {
    let two = BigInt::from(2);
    let mut out = Vec::new();
    for k in 0..ix.b2 {
        if a[k].is_zero() {
            continue;
        }
        for l in 0..ix.b2 {
            if b[l].is_zero() {
                continue;
            }
            let c = &a[k] * &b[l];
            if k == l {
                out.push((ix.m11(k), &two * &c));
                out.push((ix.p2(k), c));
            } else {
                out.push((ix.pair(k, l), c));
            }
        }
    }
    out
}

/// Coordinates of `M11(a)` and `P2(a)` in the degree 4 basis.
fn m11_p2_vectors(ix: &H4Index, a: &[BigInt]) -> Result<(Vec<BigInt>, Vec<BigInt>)> {
    let size = ix.size();
    let mut twice = vec![BigInt::zero(); size];
    for (r, v) in pair_image(ix, a, a) {
        twice[r] += v;
    }
    let mut p2 = vec![BigInt::zero(); size];
    for k in 0..ix.b2 {
        p2[ix.p2(k)] = a[k].clone();
        twice[ix.p2(k)] -= &a[k];
    }
    if twice.iter().any(|v| v.is_odd()) {
        return internal("M11 class has a non-integral coefficient");
    }
    Ok((twice.iter().map(|v| v / 2).collect(), p2))
}

struct H4Index {
    b2: usize,
    n: usize,
}

impl H4Index {
    fn p2(&self, i: usize) -> usize {
        1 + i
    }
    fn pair(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        1 + self.b2 + i * self.b2 - i * (i + 1) / 2 + (j - i - 1)
    }
    fn m11(&self, i: usize) -> usize {
        1 + self.b2 + self.b2 * (self.b2.saturating_sub(1)) / 2 + i
    }
    fn p3(&self) -> usize {
        self.m11(self.b2)
    }
    fn p2a(&self, i: usize) -> usize {
        self.p3() + 1 + i
    }
    fn p2p2(&self) -> usize {
        self.p2a(self.b2)
    }
    fn size(&self) -> usize {
        let mut s = self.m11(self.b2);
        if self.n >= 3 {
            s += 1 + self.b2;
        }
        if self.n >= 4 {
            s += 1;
        }
        s
    }
}

/// Involution on `H^2(S^[n]) = H^2(S) + Z delta`; delta is fixed.
pub fn h2_induced(s: &SurfaceData, n: usize) -> Result<ZMatrix> {
    if n < 2 {
        return pre("h2_induced requires n >= 2");
    }
    let m = ZMatrix::block_diag(&[s.sigma_h2.clone(), ZMatrix::identity(1)]);
    // equivariance of H^2(S) -> H^2(S^[n])
    let incl = ZMatrix::from_fn(s.b2 + 1, s.b2, |i, j| if i == j { BigInt::one() } else { BigInt::zero() });
    if m.mul(&incl) != incl.mul(&s.sigma_h2) {
        return internal("inclusion of H^2(S) is not equivariant");
    }
    Ok(m)
}

/// Involution on the degree 4 basis; column `j` is the image of basis
/// element `j`.
pub fn h4_induced(s: &SurfaceData, n: usize) -> Result<ZMatrix> {
    if n < 2 {
        return pre("h4_induced requires n >= 2");
    }
    let b2 = s.b2;
    let ix = H4Index { b2, n };
    let size = ix.size();
    let eps = BigInt::from(s.kind.epsilon());
    let sig = &s.sigma_h2;
    let mut m = ZMatrix::zeros(size, size);
    m[(0, 0)] = BigInt::one();
    let two = BigInt::from(2);
    for i in 0..b2 {
        for k in 0..b2 {
            m[(ix.p2(k), ix.p2(i))] = &eps * &sig[(k, i)];
        }
    }
    for i in 0..b2 {
        for j in i + 1..b2 {
            for (r, c) in pair_image(&ix, &sig.col(i), &sig.col(j)) {
                m[(r, ix.pair(i, j))] += c;
            }
        }
    }
    for i in 0..b2 {
        // M11(a) = (P1P1(a, a) - P2(a)) / 2 with sigma P2(a) = eps P2(sigma a)
        let c = sig.col(i);
        let mut twice = vec![BigInt::zero(); size];
        for (r, v) in pair_image(&ix, &c, &c) {
            twice[r] += v;
        }
        for k in 0..b2 {
            twice[ix.p2(k)] -= &eps * &c[k];
        }
        for (r, v) in twice.iter().enumerate() {
            if v.is_odd() {
                return internal("M11 image has a non-integral coefficient");
            }
            m[(r, ix.m11(i))] = v / &two;
        }
    }
    if n >= 3 {
        m[(ix.p3(), ix.p3())] = BigInt::one();
        for i in 0..b2 {
            for k in 0..b2 {
                m[(ix.p2a(k), ix.p2a(i))] = &eps * &sig[(k, i)];
            }
        }
    }
    if n >= 4 {
        m[(ix.p2p2(), ix.p2p2())] = BigInt::one();
    }
    let m2 = mod2(&m);
    if !is_involution(&m) || !m2.compose(&m2).images.iter().enumerate().all(|(i, v)| v.ones().eq([i])) {
        return internal("induced action on H^4 is not an involution");
    }
    Ok(m)
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// A class of `H^2(S)` whose image differs from it mod 2.
    H2Class {
        #[serde(serialize_with = "io::ser_vec")]
        class: Vec<BigInt>,
        lambda_h2: usize,
    },
    H4Pair(H4PairCertificate),
}

/// For an eigenclass `alpha` of the wrong sign, `u = M11(alpha)` and
/// `v = P2(alpha)` span a saturated invariant submodule of `H^4` on which the
/// action is `[[1,1],[0,-1]]` (rows are images: `u -> u + v`, `v -> -v`).
#[derive(Clone, Debug, Serialize)]
pub struct H4PairCertificate {
    #[serde(serialize_with = "io::ser_vec")]
    pub alpha: Vec<BigInt>,
    #[serde(serialize_with = "io::ser_vec")]
    pub u: Vec<BigInt>,
    #[serde(serialize_with = "io::ser_vec")]
    pub v: Vec<BigInt>,
    pub block: [[i64; 2]; 2],
    pub lambda_block: usize,
    pub lambda_h4: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MaximalityReport {
    pub n: usize,
    pub maximal: bool,
    pub reason: String,
    pub witness: Option<Witness>,
}

fn h2_witness(s: &SurfaceData, n: usize) -> Result<Option<Witness>> {
    let lambda_h2 = comessatti_of(&h2_induced(s, n)?)?;
    if lambda_h2 == 0 {
        return Ok(None);
    }
    let odd = mod2(&s.sigma_h2.add(&ZMatrix::identity(s.b2)));
    let j = (0..s.b2).find(|&j| !odd.images[j].is_zero()).expect("lambda >= 1");
    let class = (0..s.b2).map(|i| BigInt::from(i64::from(i == j))).collect();
    Ok(Some(Witness::H2Class { class, lambda_h2 }))
}

/// The `[[1,1],[0,-1]]` certificate for a primitive eigenclass `alpha` with
/// `sigma alpha = alpha` (anti-holomorphic) or `sigma alpha = -alpha`
/// (holomorphic).
pub fn h4_pair_certificate(s: &SurfaceData, n: usize, alpha: &[BigInt]) -> Result<H4PairCertificate> {
    if alpha.len() != s.b2 || !content(alpha).is_one() {
        return pre("alpha must be a primitive class of H^2(S)");
    }
    let m = h4_induced(s, n)?;
    let ix = H4Index { b2: s.b2, n };
    let (u, v) = m11_p2_vectors(&ix, alpha)?;
    let mu = m.mul_vec(&u);
    let mv = m.mul_vec(&v);
    let u_plus_v: Vec<BigInt> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
    let minus_v: Vec<BigInt> = v.iter().map(|x| -x).collect();
    if mu != u_plus_v || mv != minus_v {
        return internal("M11(alpha), P2(alpha) do not transform as [[1,1],[0,-1]]");
    }
    let span = ZMatrix::from_columns(ix.size(), &[u.clone(), v.clone()]);
    if !span.transpose().smith().diag.iter().all(|d| d.is_one()) {
        return internal("witness span is not saturated");
    }
    let block = [[1, 1], [0, -1]];
    let lambda_block = comessatti_of(&ZMatrix::from_i64(&[&block[0], &block[1]]))?;
    let lambda_h4 = comessatti_of(&m)?;
    if lambda_block != 1 || lambda_h4 < 1 {
        return internal("H^4 witness does not certify lambda >= 1");
    }
    Ok(H4PairCertificate { alpha: alpha.to_vec(), u, v, block, lambda_block, lambda_h4 })
}

fn eigenclass(sigma: &ZMatrix, sign: i64) -> Option<Vec<BigInt>> {
    let n = sigma.nrows();
    let k = sigma.sub(&ZMatrix::identity(n).scale(&BigInt::from(sign))).kernel();
    (k.ncols() > 0).then(|| k.col(0))
}

/// Maximality of the natural involution on `S^[n]`.
pub fn hilbert_maximality(s: &SurfaceData, n: usize) -> Result<MaximalityReport> {
    if n < 2 {
        return pre("hilbert_maximality requires n >= 2");
    }
    let b2 = s.b2;
    let is_minus_id = s.sigma_h2 == ZMatrix::identity(b2).neg();
    let is_id = s.sigma_h2.is_identity();
    if !s.has_fixed_points && s.surface_maximal {
        return pre("inconsistent flags: an involution without fixed points is not maximal");
    }
    if s.kind == SurfaceKind::AntiHolomorphic && s.h20_nonzero && is_minus_id && b2 > 0 {
        return pre("inconsistent flags: with h20 != 0 an anti-holomorphic involution cannot act as -id on H^2");
    }
    let report = |maximal: bool, reason: &str, witness: Option<Witness>| MaximalityReport {
        n,
        maximal,
        reason: reason.to_string(),
        witness,
    };
    if !s.has_fixed_points {
        if let Some(w) = h2_witness(s, n)? {
            return Ok(report(false, "free involution acting non-trivially on H^2(S, F2)", Some(w)));
        }
        if s.kind == SurfaceKind::AntiHolomorphic && b2 == 2 {
            return Ok(report(false, "free anti-holomorphic involution with b2 = 2 (residual case)", None));
        }
        return pre("inconsistent flags: a free involution must act non-trivially on H^2(S, F2) unless b2 = 2");
    }
    let (required, sign, name) = match s.kind {
        SurfaceKind::AntiHolomorphic => (is_minus_id, 1, "anti-holomorphic"),
        SurfaceKind::Holomorphic => (is_id, -1, "holomorphic"),
    };
    if required {
        return Ok(if s.surface_maximal {
            report(true, &format!("{name}, surface maximal and H^2 action as required"), None)
        } else {
            report(false, "surface involution is not maximal", None)
        });
    }
    if let Some(w) = h2_witness(s, n)? {
        return Ok(report(false, "H^2 action has lambda >= 1", Some(w)));
    }
    let Some(alpha) = eigenclass(&s.sigma_h2, sign) else {
        return internal("no eigenclass although sigma is not the required sign");
    };
    let w = h4_pair_certificate(s, n, &alpha)?;
    Ok(report(false, "eigenclass of the wrong sign gives lambda(H^4) >= 1", Some(Witness::H4Pair(w))))
}

/// Blow-up at a fixed point.
pub fn blowup_transform(s: &SurfaceData) -> Result<SurfaceData> {
    if !s.has_fixed_points {
        return pre("blow-up at a non-fixed point is unsupported");
    }
    let sign = match s.kind {
        SurfaceKind::Holomorphic => 1,
        SurfaceKind::AntiHolomorphic => -1,
    };
    let sigma = ZMatrix::block_diag(&[s.sigma_h2.clone(), ZMatrix::from_i64(&[&[sign]])]);
    let gram = match &s.gram {
        Some(g) => Some(g.direct_sum(&IntegerLattice::new(ZMatrix::from_i64(&[&[-1]]))?)),
        None => None,
    };
    SurfaceData::new(sigma, gram, s.kind, s.surface_maximal, true, s.h20_nonzero)
}

#[derive(Clone, Debug, Serialize)]
pub struct ScreenReport {
    pub excluded: bool,
    pub even: bool,
    /// The action on `H^2` forced by the Lefschetz count.
    pub forced_sigma: [[i64; 2]; 2],
    pub reasons: Vec<String>,
}

/// Screen for fixed-point-free involutions when `b2 = 2`.
pub fn free_involution_screen(lattice: &IntegerLattice, kind: SurfaceKind) -> Result<ScreenReport> {
    if lattice.rank() != 2 || !lattice.is_unimodular() {
        return pre("screen needs a rank 2 unimodular lattice");
    }
    let even = lattice.is_even();
    let mut reasons = vec!["Lefschetz: no fixed points forces sigma = -id on H^2".to_string()];
    let excluded = if !even {
        reasons.push("odd form: D.sigma(D) = -D^2 is odd for some D".into());
        true
    } else if kind == SurfaceKind::Holomorphic {
        reasons.push("holomorphic: K/2 has nonzero reduction mod 2".into());
        true
    } else {
        reasons.push("even form, anti-holomorphic: not excluded (the Hilbert scheme is still not maximal)".into());
        false
    };
    Ok(ScreenReport { excluded, even, forced_sigma: [[-1, 0], [0, -1]], reasons })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surface(sigma: ZMatrix, kind: SurfaceKind, maximal: bool, h20: bool) -> SurfaceData {
        SurfaceData::new(sigma, None, kind, maximal, true, h20).unwrap()
    }

    #[test]
    fn goettsche_k3_totals() {
        let g = goettsche_series(22, 3);
        let t: Vec<u64> = g.iter().map(|p| num_traits::ToPrimitive::to_u64(&total(p)).unwrap()).collect();
        assert_eq!(t, vec![1, 24, 324, 3200]);
        assert_eq!(g[2][4], BigUint::from(276u32));
    }

    #[test]
    fn census_small_cases() {
        let c = lqw_census(5, 1);
        assert_eq!(c, [1u32, 0, 5, 0, 1].map(BigUint::from).to_vec());
        for (b2, n) in [(0, 3), (1, 3), (2, 2), (3, 3)] {
            let explicit = enumerate_tuples(b2, n);
            let mut counts = vec![BigUint::zero(); 4 * n + 1];
            for t in &explicit {
                counts[t.degree] += 1u32;
            }
            assert_eq!(counts, lqw_census(b2, n));
            assert_eq!(counts, goettsche_series(b2, n)[n]);
        }
    }

    #[test]
    fn h4_sizes() {
        assert_eq!(h4_basis(22, 2).unwrap().len(), 276);
        assert_eq!(h4_basis(22, 3).unwrap().len(), 299);
        assert_eq!(h4_basis(22, 4).unwrap().len(), 300);
        assert_eq!(H4Index { b2: 22, n: 4 }.size(), 300);
        assert!(h4_basis(22, 1).is_err());
    }

    #[test]
    fn induced_rules() {
        let s = surface(ZMatrix::identity(3).neg(), SurfaceKind::AntiHolomorphic, true, false);
        let m = h4_induced(&s, 4).unwrap();
        assert!(m.is_identity());
        assert_eq!(comessatti_of(&h2_induced(&s, 2).unwrap()).unwrap(), 0);
        let h = surface(ZMatrix::identity(3), SurfaceKind::Holomorphic, true, false);
        assert!(h4_induced(&h, 3).unwrap().is_identity());
    }

    #[test]
    fn verdicts() {
        let p2 = surface(ZMatrix::from_i64(&[&[-1]]), SurfaceKind::AntiHolomorphic, true, false);
        for n in 2..=6 {
            assert!(hilbert_maximality(&p2, n).unwrap().maximal);
        }
        let swap = surface(ZMatrix::from_i64(&[&[0, 1], &[1, 0]]), SurfaceKind::AntiHolomorphic, true, false);
        let r = hilbert_maximality(&swap, 2).unwrap();
        assert!(matches!(r.witness, Some(Witness::H2Class { .. })));
        let mixed = surface(ZMatrix::from_i64(&[&[1, 0], &[0, -1]]), SurfaceKind::AntiHolomorphic, true, false);
        let r = hilbert_maximality(&mixed, 3).unwrap();
        assert!(!r.maximal);
        assert!(matches!(r.witness, Some(Witness::H4Pair(_))));
    }

    #[test]
    fn blowups_and_screen() {
        let p2 = surface(ZMatrix::from_i64(&[&[-1]]), SurfaceKind::AntiHolomorphic, true, false);
        let b = blowup_transform(&p2).unwrap();
        assert_eq!(b.b2, 2);
        assert_eq!(b.sigma_h2, ZMatrix::identity(2).neg());
        assert!(hilbert_maximality(&b, 2).unwrap().maximal);
        let u = crate::lattice::make_named("U").unwrap();
        let odd = IntegerLattice::new(ZMatrix::from_i64(&[&[1, 0], &[0, -1]])).unwrap();
        assert!(free_involution_screen(&odd, SurfaceKind::AntiHolomorphic).unwrap().excluded);
        assert!(free_involution_screen(&u, SurfaceKind::Holomorphic).unwrap().excluded);
        assert!(!free_involution_screen(&u, SurfaceKind::AntiHolomorphic).unwrap().excluded);
    }
}
