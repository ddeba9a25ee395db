//! Finite simplicial complexes with a simplicial involution.
//!
//! Everything is computed over F2 at chain level: homology, the fixed
//! subcomplex, Borel cohomology from the two-periodic resolution, the
//! Smith-Gysin sequence of a free action and Kalinin differentials up to d3.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{internal, pre, Result};
use crate::f2::{Bits, Echelon, F2Map};

pub type Simplex = Vec<usize>;

#[derive(Clone, Debug)]
pub struct SimplicialGComplex {
    n_vertices: usize,
    simplices: Vec<Vec<Simplex>>,
    index: Vec<HashMap<Simplex, usize>>,
    involution: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BettiVector {
    pub betti: Vec<usize>,
    pub total: usize,
}

impl BettiVector {
    fn new(betti: Vec<usize>) -> Self {
        let total = betti.iter().sum();
        BettiVector { betti, total }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub maximal: bool,
    pub fixed_total: usize,
    pub total: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BorelReport {
    pub dims: Vec<usize>,
    /// Surjectivity of `H^p_G -> H^p` for `p <= dim K`.
    pub surjective: Vec<bool>,
    pub all_surjective: bool,
    pub trivial_action: bool,
    /// `dim H^n_G = sum_{q <= n} b_q` for every computed `n`.
    pub degenerate_count: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmithGysinReport {
    pub betti_total_space: Vec<usize>,
    pub betti_quotient: Vec<usize>,
    pub rank_alpha: Vec<usize>,
    pub rank_beta: Vec<usize>,
    pub rank_gamma: Vec<usize>,
    pub invariant_dims: Vec<usize>,
    pub exact: bool,
    pub quotient_cells: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffEntries {
    pub source_degree: usize,
    pub target_degree: usize,
    pub rank: usize,
    /// Pairs (source class, target class) in homology-basis coordinates, one
    /// per basis element of the source page with nonzero image.
    pub images: Vec<(Vec<usize>, Vec<usize>)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct KalininReport {
    pub d1_rank: Vec<usize>,
    pub d2: Vec<DiffEntries>,
    pub d3: Option<Vec<DiffEntries>>,
    pub d1_zero: bool,
    pub d2_zero: bool,
    pub d3_zero: Option<bool>,
}

impl KalininReport {
    pub fn any_nonzero(&self) -> bool {
        !self.d1_zero || !self.d2_zero || self.d3_zero == Some(false)
    }
}

fn sorted(mut s: Simplex) -> Simplex {
    s.sort_unstable();
    s
}

fn faces_of(s: &[usize]) -> impl Iterator<Item = Simplex> + '_ {
    (0..s.len()).map(move |i| {
        let mut f = s.to_vec();
        f.remove(i);
        f
    })
}

impl SimplicialGComplex {
    /// Build from generating simplices (closure under faces is computed).
    pub fn new(n_vertices: usize, generators: &[Simplex], involution: Vec<usize>) -> Result<Self> {
        if involution.len() != n_vertices {
            return pre("involution length must equal the number of vertices");
        }
        for (v, &w) in involution.iter().enumerate() {
            if w >= n_vertices || involution[w] != v {
                return pre("involution is not an order-2 vertex permutation");
            }
        }
        let mut by_dim: Vec<BTreeSet<Simplex>> = Vec::new();
        for g in generators {
            if g.is_empty() {
                continue;
            }
            let s = sorted(g.clone());
            if s.windows(2).any(|w| w[0] == w[1]) {
                return pre("simplex with repeated vertex");
            }
            if s.iter().any(|&v| v >= n_vertices) {
                return pre("simplex vertex out of range");
            }
            let mut stack = vec![s];
            while let Some(t) = stack.pop() {
                let d = t.len() - 1;
                if by_dim.len() <= d {
                    by_dim.resize_with(d + 1, BTreeSet::new);
                }
                if by_dim[d].insert(t.clone()) && d > 0 {
                    stack.extend(faces_of(&t));
                }
            }
        }
        let simplices: Vec<Vec<Simplex>> = by_dim.into_iter().map(|s| s.into_iter().collect()).collect();
        let index = simplices
            .iter()
            .map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        let k = SimplicialGComplex { n_vertices, simplices, index, involution };
        for d in 0..k.simplices.len() {
            for s in &k.simplices[d] {
                if !k.index[d].contains_key(&k.image(s)) {
                    return pre("involution does not preserve the simplex set");
                }
            }
        }
        Ok(k)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn involution(&self) -> &[usize] {
        &self.involution
    }

    /// Dimension, `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        self.simplices.len().checked_sub(1)
    }

    pub fn count(&self, d: usize) -> usize {
        self.simplices.get(d).map_or(0, |l| l.len())
    }

    pub fn simplices(&self, d: usize) -> &[Simplex] {
        self.simplices.get(d).map_or(&[], |l| l.as_slice())
    }

    pub fn image(&self, s: &[usize]) -> Simplex {
        sorted(s.iter().map(|&v| self.involution[v]).collect())
    }

    fn is_invariant(&self, s: &[usize]) -> bool {
        self.image(s) == s
    }

    /// Every invariant simplex is fixed vertexwise.
    pub fn is_regular(&self) -> bool {
        self.simplices.iter().flatten().all(|s| {
            !self.is_invariant(s) || s.iter().all(|&v| self.involution[v] == v)
        })
    }

    /// No simplex is invariant.
    pub fn is_free(&self) -> bool {
        self.simplices.iter().flatten().all(|s| !self.is_invariant(s))
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices.iter().enumerate().map(|(d, l)| if d % 2 == 0 { l.len() as i64 } else { -(l.len() as i64) }).sum()
    }

    pub fn maximal_simplices(&self) -> Vec<Simplex> {
        let mut out = Vec::new();
        for d in 0..self.simplices.len() {
            for s in &self.simplices[d] {
                let covered = self.simplices.get(d + 1).is_some_and(|up| {
                    (0..self.n_vertices).any(|v| {
                        !s.contains(&v) && {
                            let mut t = s.clone();
                            t.push(v);
                            up.binary_search(&sorted(t)).is_ok()
                        }
                    })
                });
                if !covered {
                    out.push(s.clone());
                }
            }
        }
        out
    }

    /// Boundary `C_d -> C_{d-1}` over F2.
    pub fn boundary(&self, d: usize) -> F2Map {
        let rows = if d == 0 { 0 } else { self.count(d - 1) };
        let images = self
            .simplices(d)
            .iter()
            .map(|s| {
                if d == 0 {
                    Bits::zeros(0)
                } else {
                    Bits::from_indices(rows, faces_of(s).map(|f| self.index[d - 1][&f]))
                }
            })
            .collect();
        F2Map::new(rows, images)
    }

    /// The involution on `C_d`.
    pub fn sigma_chain(&self, d: usize) -> F2Map {
        let n = self.count(d);
        let images = self.simplices(d).iter().map(|s| Bits::unit(n, self.index[d][&self.image(s)])).collect();
        F2Map::new(n, images)
    }

    pub fn betti_f2(&self) -> BettiVector {
        let Some(top) = self.dim() else {
            return BettiVector::new(vec![]);
        };
        let ranks: Vec<usize> = (0..=top + 1).map(|d| if d > top { 0 } else { self.boundary(d).rank() }).collect();
        BettiVector::new((0..=top).map(|d| self.count(d) - ranks[d] - ranks[d + 1]).collect())
    }

    pub fn fixed_subcomplex(&self) -> Result<SimplicialGComplex> {
        if !self.is_regular() {
            return pre("action is not regular; apply barycentric_subdivide first");
        }
        let gens: Vec<Simplex> = self
            .simplices
            .iter()
            .flatten()
            .filter(|s| s.iter().all(|&v| self.involution[v] == v))
            .cloned()
            .collect();
        SimplicialGComplex::new(self.n_vertices, &gens, (0..self.n_vertices).collect())
    }

    pub fn barycentric_subdivide(&self) -> SimplicialGComplex {
        let mut ids: HashMap<Simplex, usize> = HashMap::new();
        for l in &self.simplices {
            for s in l {
                let k = ids.len();
                ids.insert(s.clone(), k);
            }
        }
        let mut gens = Vec::new();
        for m in self.maximal_simplices() {
            let mut perm = m.clone();
            permutations(&mut perm, 0, &mut |p| {
                let flag: Simplex = (1..=p.len()).map(|k| ids[&sorted(p[..k].to_vec())]).collect();
                gens.push(flag);
            });
        }
        let mut inv = vec![0; ids.len()];
        for (s, &i) in &ids {
            inv[i] = ids[&self.image(s)];
        }
        SimplicialGComplex::new(ids.len(), &gens, inv).expect("subdivision of a valid complex is valid")
    }

    pub fn maximality_verdict(&self) -> Result<Verdict> {
        let fixed = self.fixed_subcomplex()?;
        let fixed_total = fixed.betti_f2().total;
        let total = self.betti_f2().total;
        if fixed_total > total {
            return internal(format!("Smith inequality violated: {fixed_total} > {total}"));
        }
        Ok(Verdict { maximal: fixed_total == total, fixed_total, total })
    }

    /// Chain-level Lefschetz number with rational coefficients: the sum over
    /// invariant simplices of the sign of the induced vertex permutation.
    pub fn lefschetz_number(&self) -> i64 {
        let mut l = 0i64;
        for (d, list) in self.simplices.iter().enumerate() {
            for s in list {
                if !self.is_invariant(s) {
                    continue;
                }
                let perm: Vec<usize> =
                    s.iter().map(|&v| s.iter().position(|&w| w == self.involution[v]).expect("invariant")).collect();
                let sign = permutation_sign(&perm);
                l += if d % 2 == 0 { sign } else { -sign };
            }
        }
        l
    }

    fn chains(&self) -> Chains<'_> {
        Chains::new(self)
    }

    pub fn borel_cohomology(&self, degree_cap: usize) -> Result<BorelReport> {
        if !self.is_regular() {
            return pre("action is not regular; apply barycentric_subdivide first");
        }
        let Some(top) = self.dim() else {
            return pre("Borel cohomology of the empty complex");
        };
        let ch = self.chains();
        // Coboundary C^q -> C^{q+1} is the transpose of the boundary; over F2
        // and with the simplex basis this is the map whose image of a
        // q-simplex is the set of its cofaces.
        let cob: Vec<F2Map> = (0..=top).map(|q| transpose(&ch.boundary[q + 1], self.count(q + 1))).collect();
        let sig: Vec<F2Map> = (0..=top).map(|q| self.sigma_chain(q)).collect();
        let offsets = |n: usize| -> Vec<(usize, usize)> {
            // (q, offset) for each component C^q at p = n - q.
            let mut v = Vec::new();
            let mut off = 0;
            for q in 0..=top.min(n) {
                v.push((q, off));
                off += self.count(q);
            }
            v
        };
        let size = |n: usize| -> usize { (0..=top.min(n)).map(|q| self.count(q)).sum() };
        let total_map = |n: usize| -> F2Map {
            let src = offsets(n);
            let dst = offsets(n + 1);
            let rows = size(n + 1);
            let mut images = Vec::with_capacity(size(n));
            for &(q, _) in &src {
                let dst_same_q = dst.iter().find(|&&(qq, _)| qq == q).expect("component").1;
                let dst_next_q = dst.iter().find(|&&(qq, _)| qq == q + 1).map(|x| x.1);
                for i in 0..self.count(q) {
                    let mut img = Bits::zeros(rows);
                    // (1 + sigma) into (p + 1, q)
                    img.flip(dst_same_q + i);
                    for j in sig[q].images[i].ones() {
                        img.flip(dst_same_q + j);
                    }
                    if let Some(o) = dst_next_q {
                        for j in cob[q].images[i].ones() {
                            img.flip(o + j);
                        }
                    }
                    images.push(img);
                }
            }
            F2Map::new(rows, images)
        };
        let maps: Vec<F2Map> = (0..=degree_cap).map(total_map).collect();
        let ranks: Vec<usize> = maps.iter().map(|m| m.rank()).collect();
        let dims: Vec<usize> = (0..=degree_cap)
            .map(|n| size(n) - ranks[n] - if n > 0 { ranks[n - 1] } else { 0 })
            .collect();
        let betti = self.betti_f2().betti;
        let mut surjective = Vec::new();
        for n in 0..=top.min(degree_cap) {
            let ker = maps[n].kernel();
            let off = offsets(n).iter().find(|&&(q, _)| q == n).expect("component").1;
            let mut e = Echelon::new(self.count(n), 0);
            if n > 0 {
                for b in &cob[n - 1].images {
                    e.insert(b.clone(), Bits::zeros(0));
                }
            }
            let boundaries = e.rank();
            for k in &ker {
                let proj = Bits::from_indices(self.count(n), k.ones().filter(|&i| i >= off && i < off + self.count(n)).map(|i| i - off));
                e.insert(proj, Bits::zeros(0));
            }
            surjective.push(e.rank() - boundaries == betti[n]);
        }
        let all_surjective = surjective.iter().all(|&b| b);
        let trivial_action = (0..=top).all(|q| ch.sigma_trivial_on_homology(q));
        let degenerate_count =
            (0..=degree_cap).all(|n| dims[n] == betti.iter().take(n + 1).sum::<usize>());
        Ok(BorelReport { dims, surjective, all_surjective, trivial_action, degenerate_count })
    }

    pub fn smith_gysin(&self) -> Result<SmithGysinReport> {
        if !self.is_free() {
            return pre("Smith-Gysin sequence requires a free action");
        }
        let Some(top) = self.dim() else {
            return pre("Smith-Gysin sequence of the empty complex");
        };
        // Orbit representatives: the lexicographically smaller simplex.
        let mut orbit: Vec<Vec<usize>> = Vec::new(); // simplex index -> orbit index
        let mut reps: Vec<Vec<usize>> = Vec::new(); // orbit index -> simplex index
        for d in 0..=top {
            let mut o = vec![usize::MAX; self.count(d)];
            let mut r = Vec::new();
            for (i, s) in self.simplices[d].iter().enumerate() {
                if o[i] != usize::MAX {
                    continue;
                }
                let j = self.index[d][&self.image(s)];
                o[i] = r.len();
                o[j] = r.len();
                r.push(i);
            }
            orbit.push(o);
            reps.push(r);
        }
        let ch = self.chains();
        let nq: Vec<usize> = reps.iter().map(|r| r.len()).collect();
        let project = |d: usize, c: &Bits| -> Bits {
            let mut out = Bits::zeros(nq[d]);
            for i in c.ones() {
                out.flip(orbit[d][i]);
            }
            out
        };
        let transfer = |d: usize, c: &Bits| -> Bits {
            let mut out = Bits::zeros(self.count(d));
            for o in c.ones() {
                let i = reps[d][o];
                out.flip(i);
                out.flip(self.index[d][&self.image(&self.simplices[d][i])]);
            }
            out
        };
        // Quotient boundary.
        let qb: Vec<F2Map> = (0..=top + 1)
            .map(|d| {
                if d > top {
                    return F2Map::new(nq[top], vec![]);
                }
                let rows = if d == 0 { 0 } else { nq[d - 1] };
                let images = reps[d]
                    .iter()
                    .map(|&i| if d == 0 { Bits::zeros(0) } else { project(d - 1, &ch.boundary[d].images[i]) })
                    .collect();
                F2Map::new(rows, images)
            })
            .collect();
        let qh: Vec<Homology> = (0..=top).map(|d| Homology::new(&qb[d], &qb[d + 1])).collect();
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        let mut gamma = Vec::new();
        for d in 0..=top {
            let a = F2Map::new(
                ch.homology[d].reps.len(),
                qh[d].reps.iter().map(|z| ch.homology[d].coords(&transfer(d, z)).expect("transfer of a cycle")).collect(),
            );
            let b = F2Map::new(
                qh[d].reps.len(),
                ch.homology[d].reps.iter().map(|z| qh[d].coords(&project(d, z)).expect("projection of a cycle")).collect(),
            );
            let g = if d == 0 {
                F2Map::new(0, qh[0].reps.iter().map(|_| Bits::zeros(0)).collect())
            } else {
                let mut imgs = Vec::new();
                for z in &qh[d].reps {
                    let mut lift = Bits::zeros(self.count(d));
                    for o in z.ones() {
                        lift.flip(reps[d][o]);
                    }
                    let bd = ch.boundary[d].apply(&lift);
                    // bd = transfer(b) with b supported on the representatives.
                    let mut b = Bits::zeros(nq[d - 1]);
                    for i in bd.ones() {
                        if reps[d - 1][orbit[d - 1][i]] == i {
                            b.flip(orbit[d - 1][i]);
                        }
                    }
                    if transfer(d - 1, &b) != bd {
                        return internal("connecting map: boundary is not a transfer");
                    }
                    imgs.push(qh[d - 1].coords(&b).expect("connecting map lands in cycles"));
                }
                F2Map::new(qh[d - 1].reps.len(), imgs)
            };
            alpha.push(a);
            beta.push(b);
            gamma.push(g);
        }
        let ra: Vec<usize> = alpha.iter().map(|m| m.rank()).collect();
        let rb: Vec<usize> = beta.iter().map(|m| m.rank()).collect();
        let rg: Vec<usize> = gamma.iter().map(|m| m.rank()).collect();
        let hm: Vec<usize> = ch.homology.iter().map(|h| h.reps.len()).collect();
        let hn: Vec<usize> = qh.iter().map(|h| h.reps.len()).collect();
        let mut exact = true;
        for d in 0..=top {
            // at H_d(M): ker beta_d = im alpha_d
            exact &= hm[d] - rb[d] == ra[d];
            // at H_d(N) as target of beta: ker gamma_d = im beta_d
            exact &= hn[d] - rg[d] == rb[d];
            // at H_d(N) as source of alpha: ker alpha_d = im gamma_{d+1}
            let rg_next = if d < top { rg[d + 1] } else { 0 };
            exact &= hn[d] - ra[d] == rg_next;
        }
        let invariant_dims = (0..=top)
            .map(|d| {
                let s = ch.sigma_on_homology(d);
                let plus1 = s.add(&F2Map::identity(hm[d]));
                hm[d] - plus1.rank()
            })
            .collect();
        Ok(SmithGysinReport {
            betti_total_space: hm,
            betti_quotient: hn,
            rank_alpha: ra,
            rank_beta: rb,
            rank_gamma: rg,
            invariant_dims,
            exact,
            quotient_cells: nq,
        })
    }

    /// Kalinin differentials `d_1 .. d_up_to` (at most 3), with a second
    /// independent chain lift drawn from `seed` as a cross-check.
    pub fn kalinin_differentials(&self, up_to: usize, seed: u64) -> Result<KalininReport> {
        if !(1..=3).contains(&up_to) {
            return pre("Kalinin differentials are implemented for r = 1, 2, 3 only");
        }
        let Some(top) = self.dim() else {
            return pre("Kalinin differentials of the empty complex");
        };
        let ch = self.chains();
        let hdim: Vec<usize> = ch.homology.iter().map(|h| h.reps.len()).collect();
        if up_to == 3 && hdim.iter().enumerate().any(|(d, &b)| d % 2 == 1 && b > 0) {
            return pre("d3 is only defined here under the hypothesis H_odd = 0");
        }
        let d1: Vec<F2Map> = (0..=top).map(|d| ch.sigma_on_homology(d).add(&F2Map::identity(hdim[d]))).collect();
        let d1_rank: Vec<usize> = d1.iter().map(|m| m.rank()).collect();
        let d1_zero = d1_rank.iter().all(|&r| r == 0);
        let mut rng_a = ChaCha8Rng::seed_from_u64(seed);
        let mut rng_b = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut d2 = Vec::new();
        let mut d3 = Vec::new();
        for q in 0..=top {
            let ker = d1[q].kernel();
            if up_to >= 2 {
                let mut entries = DiffEntries { source_degree: q, target_degree: q + 1, rank: 0, images: vec![] };
                if q < top {
                    let mut values = Vec::new();
                    for x in &ker {
                        let a = ch.d2_value(q, x, &mut rng_a)?;
                        let b = ch.d2_value(q, x, &mut rng_b)?;
                        let im = d1[q + 1].images.clone();
                        if !same_modulo(&a, &b, &im) {
                            return internal("d2 depends on the chain lift");
                        }
                        if !in_span(&a, &im) {
                            entries.images.push((x.ones().collect(), a.ones().collect()));
                        }
                        values.push(a);
                    }
                    entries.rank = rank_modulo(&values, &d1[q + 1].images);
                }
                d2.push(entries);
            }
            if up_to >= 3 {
                let mut entries = DiffEntries { source_degree: q, target_degree: q + 2, rank: 0, images: vec![] };
                if q + 2 <= top && q % 2 == 0 {
                    let mut values = Vec::new();
                    for x in &ker {
                        let a = ch.d3_value(q, x, &mut rng_a)?;
                        let b = ch.d3_value(q, x, &mut rng_b)?;
                        let im = d1[q + 2].images.clone();
                        if !same_modulo(&a, &b, &im) {
                            return internal("d3 depends on the chain lift");
                        }
                        if !in_span(&a, &im) {
                            entries.images.push((x.ones().collect(), a.ones().collect()));
                        }
                        values.push(a);
                    }
                    entries.rank = rank_modulo(&values, &d1[q + 2].images);
                }
                d3.push(entries);
            }
        }
        let d2_zero = d2.iter().all(|e| e.rank == 0);
        let d3_zero = (up_to >= 3).then(|| d3.iter().all(|e| e.rank == 0));
        let report = KalininReport {
            d1_rank,
            d2,
            d3: (up_to >= 3).then_some(d3),
            d1_zero,
            d2_zero,
            d3_zero,
        };
        if self.is_regular() && report.any_nonzero() && self.maximality_verdict()?.maximal {
            return internal("nonzero Kalinin differential on a maximal involution");
        }
        Ok(report)
    }
}

fn permutations(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}

fn permutation_sign(p: &[usize]) -> i64 {
    let mut seen = vec![false; p.len()];
    let mut sign = 1;
    for i in 0..p.len() {
        if seen[i] {
            continue;
        }
        let mut j = i;
        let mut len = 0;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

fn transpose(m: &F2Map, rows_of_transpose: usize) -> F2Map {
    let mut images = vec![Bits::zeros(m.cols()); m.rows];
    for (j, col) in m.images.iter().enumerate() {
        for i in col.ones() {
            images[i].flip(j);
        }
    }
    debug_assert_eq!(m.cols(), rows_of_transpose);
    F2Map::new(m.cols(), images)
}

fn in_span(v: &Bits, span: &[Bits]) -> bool {
    let mut e = Echelon::new(v.len(), 0);
    for s in span {
        e.insert(s.clone(), Bits::zeros(0));
    }
    e.contains(v)
}

fn same_modulo(a: &Bits, b: &Bits, span: &[Bits]) -> bool {
    in_span(&a.xor(b), span)
}

fn rank_modulo(values: &[Bits], span: &[Bits]) -> usize {
    let Some(first) = values.first() else {
        return 0;
    };
    let mut e = Echelon::new(first.len(), 0);
    for s in span {
        e.insert(s.clone(), Bits::zeros(0));
    }
    let base = e.rank();
    for v in values {
        e.insert(v.clone(), Bits::zeros(0));
    }
    e.rank() - base
}

/// Homology of `C_d` given the boundaries out of and into it.
struct Homology {
    reps: Vec<Bits>,
    ech: Echelon,
    cycles: Vec<Bits>,
}

impl Homology {
    fn new(out: &F2Map, into: &F2Map) -> Self {
        let n = out.cols();
        let cycles = out.kernel();
        let mut e = Echelon::new(n, 0);
        for b in &into.images {
            e.insert(b.clone(), Bits::zeros(0));
        }
        let mut reps = Vec::new();
        for z in &cycles {
            if e.insert(z.clone(), Bits::zeros(0)).is_none() {
                reps.push(z.clone());
            }
        }
        let k = reps.len();
        let mut ech = Echelon::new(n, k);
        for b in &into.images {
            ech.insert(b.clone(), Bits::zeros(k));
        }
        for (i, z) in reps.iter().enumerate() {
            ech.insert(z.clone(), Bits::unit(k, i));
        }
        Homology { reps, ech, cycles }
    }

    /// Coordinates of the class of a cycle; `None` if not a cycle.
    fn coords(&self, z: &Bits) -> Option<Bits> {
        self.ech.express(z)
    }
}

struct Chains<'a> {
    k: &'a SimplicialGComplex,
    boundary: Vec<F2Map>,
    sigma: Vec<F2Map>,
    homology: Vec<Homology>,
    /// Echelon of `im boundary[d + 1]` tagged by (d+1)-simplices, for solving.
    solvers: Vec<Echelon>,
}

impl<'a> Chains<'a> {
    fn new(k: &'a SimplicialGComplex) -> Self {
        let top = k.dim().unwrap_or(0);
        let boundary: Vec<F2Map> = (0..=top + 1)
            .map(|d| if d > top { F2Map::new(k.count(top), vec![]) } else { k.boundary(d) })
            .collect();
        let sigma = (0..=top).map(|d| k.sigma_chain(d)).collect();
        let homology = (0..=top).map(|d| Homology::new(&boundary[d], &boundary[d + 1])).collect();
        let solvers = (0..=top)
            .map(|d| {
                let m = &boundary[d + 1];
                let mut e = Echelon::new(k.count(d), m.cols());
                for (i, v) in m.images.iter().enumerate() {
                    e.insert(v.clone(), Bits::unit(m.cols(), i));
                }
                e
            })
            .collect();
        Chains { k, boundary, sigma, homology, solvers }
    }

    fn sigma_on_homology(&self, d: usize) -> F2Map {
        let h = &self.homology[d];
        F2Map::new(
            h.reps.len(),
            h.reps.iter().map(|z| h.coords(&self.sigma[d].apply(z)).expect("image of a cycle")).collect(),
        )
    }

    fn sigma_trivial_on_homology(&self, d: usize) -> bool {
        let s = self.sigma_on_homology(d);
        s.images.iter().enumerate().all(|(i, v)| *v == Bits::unit(s.rows, i))
    }

    /// Chain in degree `d + 1` with boundary `c`, randomized by a cycle.
    fn solve<R: Rng>(&self, d: usize, c: &Bits, rng: &mut R) -> Result<Bits> {
        let Some(eta) = self.solvers[d].express(c) else {
            return internal("boundary equation has no solution");
        };
        let mut eta = eta;
        let cyc = &self.homology_cycles(d + 1);
        for z in cyc {
            if rng.gen_bool(0.5) {
                eta.xor_assign(z);
            }
        }
        Ok(eta)
    }

    fn homology_cycles(&self, d: usize) -> Vec<Bits> {
        if d < self.homology.len() {
            self.homology[d].cycles.clone()
        } else {
            vec![]
        }
    }

    /// A random cycle representative of the class with coordinates `x`.
    fn representative<R: Rng>(&self, q: usize, x: &Bits, rng: &mut R) -> Bits {
        let h = &self.homology[q];
        let mut z = Bits::zeros(self.k.count(q));
        for i in x.ones() {
            z.xor_assign(&h.reps[i]);
        }
        let mut bds: Vec<&Bits> = self.boundary[q + 1].images.iter().collect();
        bds.shuffle(rng);
        for b in bds.into_iter().take(8) {
            if rng.gen_bool(0.5) {
                z.xor_assign(b);
            }
        }
        z
    }

    fn d2_value<R: Rng>(&self, q: usize, x: &Bits, rng: &mut R) -> Result<Bits> {
        let z = self.representative(q, x, rng);
        let c = z.xor(&self.sigma[q].apply(&z));
        let eta = self.solve(q, &c, rng)?;
        let cyc = eta.xor(&self.sigma[q + 1].apply(&eta));
        self.homology[q + 1].coords(&cyc).ok_or_else(|| {
            crate::error::Error::Internal("eta + sigma eta is not a cycle".into())
        })
    }

    fn d3_value<R: Rng>(&self, q: usize, x: &Bits, rng: &mut R) -> Result<Bits> {
        let z = self.representative(q, x, rng);
        let c = z.xor(&self.sigma[q].apply(&z));
        let eta = self.solve(q, &c, rng)?;
        let c2 = eta.xor(&self.sigma[q + 1].apply(&eta));
        // H_{q+1} = 0 by hypothesis, so c2 is a boundary.
        let zeta = self.solve(q + 1, &c2, rng)?;
        let cyc = zeta.xor(&self.sigma[q + 2].apply(&zeta));
        self.homology[q + 2].coords(&cyc).ok_or_else(|| {
            crate::error::Error::Internal("zeta + sigma zeta is not a cycle".into())
        })
    }
}

/// Staircase triangulation of the product with the diagonal involution.
///
/// Vertices of each factor are ordered by `(min(v, sigma v), v)`; this order is
/// preserved by the involution on every simplex provided no simplex contains
/// a vertex together with its distinct image.
pub fn product_complex(a: &SimplicialGComplex, b: &SimplicialGComplex) -> Result<SimplicialGComplex> {
    for k in [a, b] {
        let bad = k.simplices.iter().flatten().any(|s| {
            s.iter().any(|&v| k.involution[v] != v && s.contains(&k.involution[v]))
        });
        if bad {
            return pre("product needs factors with no simplex containing a vertex and its image");
        }
    }
    let key = |k: &SimplicialGComplex, v: usize| (v.min(k.involution[v]), v);
    let nb = b.n_vertices;
    let mut gens = Vec::new();
    for s in a.maximal_simplices() {
        let mut s = s;
        s.sort_by_key(|&v| key(a, v));
        for t in b.maximal_simplices() {
            let mut t = t;
            t.sort_by_key(|&v| key(b, v));
            staircase(&s, &t, &mut |path| {
                gens.push(path.iter().map(|&(i, j)| s[i] * nb + t[j]).collect());
            });
        }
    }
    let inv = (0..a.n_vertices * nb)
        .map(|v| a.involution[v / nb] * nb + b.involution[v % nb])
        .collect();
    SimplicialGComplex::new(a.n_vertices * nb, &gens, inv)
}

fn staircase(s: &[usize], t: &[usize], f: &mut dyn FnMut(&[(usize, usize)])) {
    fn rec(i: usize, j: usize, m: usize, n: usize, path: &mut Vec<(usize, usize)>, f: &mut dyn FnMut(&[(usize, usize)])) {
        if i + 1 == m && j + 1 == n {
            f(path);
            return;
        }
        if i + 1 < m {
            path.push((i + 1, j));
            rec(i + 1, j, m, n, path, f);
            path.pop();
        }
        if j + 1 < n {
            path.push((i, j + 1));
            rec(i, j + 1, m, n, path, f);
            path.pop();
        }
    }
    let mut path = vec![(0, 0)];
    rec(0, 0, s.len(), t.len(), &mut path, f);
}

/// Sample complexes used in tests, examples and the CLI.
pub mod models {
    use super::*;

    /// Octahedral 2-sphere; vertices 0:+x 1:-x 2:+y 3:-y 4:+z 5:-z.
    fn octahedron_faces() -> Vec<Simplex> {
        let mut f = Vec::new();
        for x in [0, 1] {
            for y in [2, 3] {
                for z in [4, 5] {
                    f.push(vec![x, y, z]);
                }
            }
        }
        f
    }

    pub fn octahedron(involution: Vec<usize>) -> SimplicialGComplex {
        SimplicialGComplex::new(6, &octahedron_faces(), involution).expect("octahedron")
    }

    pub fn octahedron_antipodal() -> SimplicialGComplex {
        octahedron(vec![1, 0, 3, 2, 5, 4])
    }

    pub fn octahedron_equatorial_reflection() -> SimplicialGComplex {
        octahedron(vec![0, 1, 2, 3, 5, 4])
    }

    pub fn octahedron_identity() -> SimplicialGComplex {
        octahedron((0..6).collect())
    }

    fn hexagon(involution: Vec<usize>) -> SimplicialGComplex {
        let edges: Vec<Simplex> = (0..6).map(|i| vec![i, (i + 1) % 6]).collect();
        SimplicialGComplex::new(6, &edges, involution).expect("hexagon")
    }

    pub fn hexagon_antipodal() -> SimplicialGComplex {
        hexagon((0..6).map(|i| (i + 3) % 6).collect())
    }

    pub fn hexagon_reflection() -> SimplicialGComplex {
        hexagon((0..6).map(|i| (6 - i) % 6).collect())
    }

    pub fn hexagon_identity() -> SimplicialGComplex {
        hexagon((0..6).collect())
    }

    pub fn point() -> SimplicialGComplex {
        SimplicialGComplex::new(1, &[vec![0]], vec![0]).expect("point")
    }

    pub fn named(name: &str) -> Option<SimplicialGComplex> {
        Some(match name {
            "octahedron-antipodal" => octahedron_antipodal(),
            "octahedron-reflection" => octahedron_equatorial_reflection(),
            "octahedron-identity" => octahedron_identity(),
            "hexagon-antipodal" => hexagon_antipodal(),
            "hexagon-reflection" => hexagon_reflection(),
            "hexagon-identity" => hexagon_identity(),
            "point" => point(),
            _ => return None,
        })
    }

    pub const NAMES: [&str; 7] = [
        "octahedron-antipodal",
        "octahedron-reflection",
        "octahedron-identity",
        "hexagon-antipodal",
        "hexagon-reflection",
        "hexagon-identity",
        "point",
    ];
}

#[cfg(test)]
mod tests {
    use super::models::*;
    use super::*;

    #[test]
    fn betti_examples() {
        assert_eq!(octahedron_identity().betti_f2().betti, vec![1, 0, 1]);
        assert_eq!(hexagon_identity().betti_f2().betti, vec![1, 1]);
        assert_eq!(point().betti_f2().betti, vec![1]);
    }

    #[test]
    fn fixed_loci_and_verdicts() {
        let r = octahedron_equatorial_reflection();
        let f = r.fixed_subcomplex().unwrap();
        assert_eq!(f.count(0), 4);
        assert_eq!(f.count(1), 4);
        assert_eq!(f.betti_f2().betti, vec![1, 1]);
        assert!(r.maximality_verdict().unwrap().maximal);
        let a = octahedron_antipodal().maximality_verdict().unwrap();
        assert_eq!((a.maximal, a.fixed_total, a.total), (false, 0, 2));
        assert!(octahedron_identity().maximality_verdict().unwrap().maximal);
    }

    #[test]
    fn subdivision_sizes_and_regularity() {
        let s = octahedron_antipodal().barycentric_subdivide();
        assert_eq!(s.count(2), 48);
        assert!(s.is_regular());
        assert!(s.barycentric_subdivide().is_regular());
        let edge = SimplicialGComplex::new(2, &[vec![0, 1]], vec![1, 0]).unwrap();
        assert!(!edge.is_regular());
        assert!(edge.fixed_subcomplex().is_err());
        let sub = edge.barycentric_subdivide();
        assert!(sub.is_regular());
        assert_eq!(sub.fixed_subcomplex().unwrap().count(0), 1);
    }

    #[test]
    fn borel_examples() {
        assert_eq!(point().borel_cohomology(5).unwrap().dims, vec![1; 6]);
        assert_eq!(octahedron_antipodal().borel_cohomology(4).unwrap().dims, vec![1, 1, 1, 0, 0]);
        let id = octahedron_identity().borel_cohomology(3).unwrap();
        assert_eq!(id.dims, vec![1, 1, 2, 2]);
        assert!(id.all_surjective && id.trivial_action && id.degenerate_count);
    }

    #[test]
    fn kalinin_examples() {
        let hex = hexagon_antipodal().kalinin_differentials(2, 7).unwrap();
        assert_eq!(hex.d2[0].rank, 1);
        let oct = octahedron_antipodal().kalinin_differentials(3, 7).unwrap();
        assert!(oct.d2_zero);
        assert_eq!(oct.d3.as_ref().unwrap()[0].rank, 1);
        assert_eq!(oct.d3.as_ref().unwrap()[0].images[0].1, vec![0]);
        let id = octahedron_identity().kalinin_differentials(3, 7).unwrap();
        assert!(!id.any_nonzero());
        assert!(hexagon_antipodal().kalinin_differentials(3, 1).is_err());
    }

    #[test]
    fn smith_gysin_examples() {
        let h = hexagon_antipodal().smith_gysin().unwrap();
        assert!(h.exact);
        assert_eq!(h.betti_quotient, vec![1, 1]);
        assert_eq!(h.quotient_cells, vec![3, 3]);
        let o = octahedron_antipodal().smith_gysin().unwrap();
        assert!(o.exact);
        assert_eq!(o.betti_quotient, vec![1, 1, 1]);
        assert!(octahedron_identity().smith_gysin().is_err());
    }

    #[test]
    fn products() {
        let p = product_complex(&point(), &octahedron_identity()).unwrap();
        assert_eq!(p.betti_f2().betti, vec![1, 0, 1]);
        let t = product_complex(&hexagon_identity(), &hexagon_identity()).unwrap();
        assert_eq!(t.betti_f2().betti, vec![1, 2, 1]);
    }

    #[test]
    fn lefschetz_matches_fixed_euler_characteristic() {
        for name in models::NAMES {
            let k = models::named(name).unwrap();
            let fixed = k.barycentric_subdivide().fixed_subcomplex().unwrap();
            assert_eq!(k.lefschetz_number(), fixed.euler_characteristic(), "{name}");
        }
    }
}
