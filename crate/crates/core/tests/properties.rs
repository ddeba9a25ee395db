use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use maxbrane::chain::{models, product_complex};
use maxbrane::hilbert::{
    goettsche_series, h2_induced, h4_induced, h4_pair_certificate, hilbert_maximality, lqw_census, SurfaceData, SurfaceKind,
};
use maxbrane::involution::{comessatti_of, is_involution, sym2_matrix, InvolutiveModule};
use maxbrane::k3n::{
    build_k3n_lattice, classify_split, BraneCase, eichler_orbit_key, random_admissible, random_weyl_element, MonodromyInvolution,
};
use maxbrane::lattice::IntegerLattice;
use maxbrane::zmat::{random_unimodular, ZMatrix};

fn small_matrix(max_dim: usize) -> impl Strategy<Value = ZMatrix> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(|(r, c)| {
        prop::collection::vec(-20i64..=20, r * c)
            .prop_map(move |v| ZMatrix::from_fn(r, c, |i, j| BigInt::from(v[i * c + j])))
    })
}

/// Nondegenerate symmetric form: a diagonal form in a random basis.
fn small_lattice() -> impl Strategy<Value = IntegerLattice> {
    (prop::collection::vec(prop_oneof![-6i64..=-1, 1i64..=6], 1..=5), any::<u64>()).prop_map(|(d, seed)| {
        let diag = ZMatrix::diagonal(&d.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, _) = random_unimodular(d.len(), 6, &mut rng);
        IntegerLattice::new(diag.congruence(&p)).unwrap()
    })
}

/// Blocks `(+1)`, `(-1)` and swaps in a shuffled order: returns `(sigma, swaps)`.
fn block_involution(max_blocks: usize) -> impl Strategy<Value = (ZMatrix, usize)> {
    prop::collection::vec(0u8..3, 1..=max_blocks).prop_map(|kinds| {
        let blocks: Vec<ZMatrix> = kinds
            .iter()
            .map(|k| match k {
                0 => ZMatrix::from_i64(&[&[1]]),
                1 => ZMatrix::from_i64(&[&[-1]]),
                _ => ZMatrix::from_i64(&[&[0, 1], &[1, 0]]),
            })
            .collect();
        (ZMatrix::block_diag(&blocks), kinds.iter().filter(|&&k| k == 2).count())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smith_normal_form_is_a_valid_factorisation(a in small_matrix(5)) {
        let s = a.smith();
        prop_assert!(s.u.det().abs().is_one());
        prop_assert!(s.v.det().abs().is_one());
        let d = s.u.mul(&a).mul(&s.v);
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                let want = if i == j && i < s.diag.len() { s.diag[i].clone() } else { BigInt::zero() };
                prop_assert_eq!(&d[(i, j)], &want);
            }
        }
        for w in s.diag.windows(2) {
            prop_assert!(w[0].is_positive());
            prop_assert!(w[1].is_zero() || (&w[1] % &w[0]).is_zero());
        }
        prop_assert_eq!(s.diag.iter().filter(|x| !x.is_zero()).count(), a.rank());
    }

    #[test]
    fn signature_is_additive(a in small_lattice(), b in small_lattice()) {
        let (ap, an) = a.signature();
        let (bp, bn) = b.signature();
        prop_assert_eq!(a.direct_sum(&b).signature(), (ap + bp, an + bn));
    }

    #[test]
    fn discriminant_order_of_a_rescaling(l in small_lattice(), m in 1i64..=5) {
        let r = l.rescale(&BigInt::from(m)).unwrap();
        let expected = l.det().abs() * BigInt::from(m).pow(l.rank() as u32);
        prop_assert_eq!(r.discriminant_group().order(), expected.clone());
        prop_assert_eq!(l.discriminant_group().order(), l.det().abs());
    }

    #[test]
    fn comessatti_counts_swaps_in_any_basis((s, swaps) in block_involution(6), seed in any::<u64>()) {
        let m = InvolutiveModule::new(s.clone(), None).unwrap();
        prop_assert_eq!(m.comessatti(), swaps);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, pinv) = random_unimodular(s.nrows(), 10, &mut rng);
        prop_assert_eq!(m.change_basis(&p, &pinv).unwrap().comessatti(), swaps);
    }

    #[test]
    fn comessatti_is_additive((a, _) in block_involution(4), (b, _) in block_involution(4)) {
        let ma = InvolutiveModule::new(a, None).unwrap();
        let mb = InvolutiveModule::new(b, None).unwrap();
        prop_assert_eq!(ma.direct_sum(&mb).comessatti(), ma.comessatti() + mb.comessatti());
    }

    #[test]
    fn symmetric_square_is_a_basis_independent_involution((s, _) in block_involution(4), seed in any::<u64>()) {
        let n = s.nrows();
        let q = sym2_matrix(&s);
        prop_assert_eq!(q.nrows(), n * (n + 1) / 2);
        prop_assert!(is_involution(&q));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, pinv) = random_unimodular(n, 8, &mut rng);
        let lam = InvolutiveModule::new(q, None).unwrap().comessatti();
        let conj = InvolutiveModule::new(sym2_matrix(&pinv.mul(&s).mul(&p)), None).unwrap().comessatti();
        prop_assert_eq!(lam, conj);
    }

    #[test]
    fn census_matches_generating_function(b2 in 0usize..=40, n in 1usize..=5) {
        let g = goettsche_series(b2, n);
        prop_assert_eq!(lqw_census(b2, n), g[n].clone());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn induced_actions_are_involutions((s, _) in block_involution(4), n in 2usize..=4) {
        let data = SurfaceData::new(s, None, SurfaceKind::AntiHolomorphic, true, true, false).unwrap();
        prop_assert!(is_involution(&h2_induced(&data, n).unwrap()));
        let h4 = h4_induced(&data, n).unwrap();
        prop_assert!(is_involution(&h4));
        let g = goettsche_series(data.b2, n);
        prop_assert_eq!(BigInt::from(h4.nrows()), BigInt::from(g[n][4].clone()));
    }

    #[test]
    fn maximality_verdict_does_not_depend_on_n(
        (s, _) in block_involution(4),
        holo in any::<bool>(),
        maximal in any::<bool>(),
    ) {
        let kind = if holo { SurfaceKind::Holomorphic } else { SurfaceKind::AntiHolomorphic };
        let data = SurfaceData::new(s, None, kind, maximal, true, false).unwrap();
        let verdicts: Vec<bool> = (2..=5).map(|n| hilbert_maximality(&data, n).unwrap().maximal).collect();
        prop_assert!(verdicts.iter().all(|&v| v == verdicts[0]), "{:?}", verdicts);
    }

    #[test]
    fn smith_inequality_and_lefschetz_on_products(i in 0usize..4, j in 0usize..4) {
        let pool = [models::hexagon_antipodal, models::hexagon_reflection, models::hexagon_identity, models::point];
        let k = product_complex(&pool[i](), &pool[j]()).unwrap();
        let v = k.maximality_verdict().unwrap();
        prop_assert!(v.fixed_total <= v.total);
        prop_assert_eq!(v.fixed_total % 2, v.total % 2);
        if k.is_free() {
            prop_assert!(k.smith_gysin().unwrap().exact);
        }
        let fixed = k.barycentric_subdivide().fixed_subcomplex().unwrap();
        prop_assert_eq!(k.lefschetz_number(), fixed.euler_characteristic());
    }

    #[test]
    fn kalinin_ranks_do_not_depend_on_lifts(idx in 0usize..models::NAMES.len(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let k = models::named(models::NAMES[idx]).unwrap();
        let up_to = if k.betti_f2().betti.iter().skip(1).step_by(2).any(|&b| b > 0) { 2 } else { 3 };
        let a = k.kalinin_differentials(up_to, s1).unwrap();
        let b = k.kalinin_differentials(up_to, s2).unwrap();
        prop_assert_eq!(&a.d1_rank, &b.d1_rank);
        let ranks = |r: &maxbrane::chain::KalininReport| {
            (r.d2.iter().map(|e| e.rank).collect::<Vec<_>>(), r.d3.as_ref().map(|d| d.iter().map(|e| e.rank).collect::<Vec<_>>()))
        };
        prop_assert_eq!(ranks(&a), ranks(&b));
    }

    #[test]
    fn eichler_keys_are_weyl_invariant(n in 2usize..=6, seed in any::<u64>(), v in prop::collection::vec(-4i64..=4, 23)) {
        let l = build_k3n_lattice(n).unwrap();
        prop_assume!(v.iter().any(|&x| x != 0));
        let v: Vec<BigInt> = v.into_iter().map(BigInt::from).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, _) = random_weyl_element(n, &mut rng).unwrap();
        prop_assert_eq!(eichler_orbit_key(&l, &v).unwrap(), eichler_orbit_key(&l, &w.mul_vec(&v)).unwrap());
    }

    #[test]
    fn split_classification_is_conjugation_invariant(n in 2usize..=6, seed in any::<u64>()) {
        let inst = random_admissible(n, seed).unwrap();
        let r = classify_split(&MonodromyInvolution::new(n, inst.sigma).unwrap()).unwrap();
        prop_assert_eq!(r.case, inst.case);
        if matches!(r.case, BraneCase::Case1 | BraneCase::Case2) {
            prop_assert_eq!(r.line, Some(inst.line));
        } else {
            prop_assert_eq!(r.line, None);
        }
    }

    #[test]
    fn natural_actions_have_no_swaps(b2 in 1usize..=5, n in 2usize..=4, holo in any::<bool>()) {
        let (kind, sigma) = if holo {
            (SurfaceKind::Holomorphic, ZMatrix::identity(b2))
        } else {
            (SurfaceKind::AntiHolomorphic, ZMatrix::identity(b2).neg())
        };
        let data = SurfaceData::new(sigma, None, kind, true, true, false).unwrap();
        prop_assert_eq!(comessatti_of(&h2_induced(&data, n).unwrap()).unwrap(), 0);
        prop_assert_eq!(comessatti_of(&h4_induced(&data, n).unwrap()).unwrap(), 0);
    }

    #[test]
    fn wrong_sign_eigenclass_forces_swaps_in_h4(
        (s, _) in block_involution(4),
        n in 2usize..=4,
        holo in any::<bool>(),
        pick in any::<prop::sample::Index>(),
    ) {
        let (kind, sign) = if holo { (SurfaceKind::Holomorphic, -1) } else { (SurfaceKind::AntiHolomorphic, 1) };
        let k = s.sub(&ZMatrix::identity(s.nrows()).scale(&BigInt::from(sign))).kernel();
        prop_assume!(k.ncols() > 0);
        let alpha = k.col(pick.index(k.ncols()));
        let data = SurfaceData::new(s, None, kind, true, true, false).unwrap();
        let cert = h4_pair_certificate(&data, n, &alpha).unwrap();
        prop_assert!(cert.lambda_h4 >= 1);
        prop_assert_eq!(comessatti_of(&h4_induced(&data, n).unwrap()).unwrap(), cert.lambda_h4);
    }
}
