mod common;

use common::random_vec;
use loopfactor_core::linalg::{self, c, Mat};
use loopfactor_core::loop_algebra::*;
use loopfactor_core::sampling::{random_algebra_loop, random_gl, random_gl_algebra, random_gstar, random_sl};
use loopfactor_core::{build_cartan_weyl, AffineBasis, Error, LoopElement};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_poly(rng: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64) -> LoopElement {
    let pairs: Vec<(i64, Mat)> = (lo..=hi).map(|k| (k, random_sl(rng, n))).collect();
    LoopElement::from_pairs(n, &pairs)
}

fn cauchy(a: &LoopElement, b: &LoopElement) -> LoopElement {
    let mut pairs = Vec::new();
    for (i, x) in a.iter_modes() {
        for (j, y) in b.iter_modes() {
            pairs.push((i + j, x * y));
        }
    }
    let mut out = LoopElement::zero(a.n());
    for (k, m) in pairs {
        out = out.add(&LoopElement::monomial(m, k));
    }
    out
}

#[test]
fn samples_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = random_poly(&mut rng, 3, -3, 4);
    let m = x.check_grid();
    assert!(m.is_power_of_two() && m >= 4 * 4 + 4);
    let back = LoopElement::from_samples(&x.samples(m), x.lo());
    assert!(back.dist(&x) < 1e-12);
    let s = 0.77;
    let direct: Mat = x.iter_modes().fold(linalg::zeros(3), |acc, (k, g)| acc + g * c((k as f64 * s).cos(), (k as f64 * s).sin()));
    assert!(linalg::max_abs(&(x.eval(s) - direct)) < 1e-12);
}

#[test]
fn multiply_matches_cauchy_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_poly(&mut rng, 2, 0, 2);
    let b = random_poly(&mut rng, 2, 0, 3);
    let p = loop_multiply(&a, &b, 5).unwrap();
    assert!(p.dist(&cauchy(&a, &b)) < 1e-12);
    assert_eq!(p.cleaned().hi(), 5);
    assert!(matches!(loop_multiply(&a, &b, 3), Err(Error::TruncationOverflow { .. })));
    let id = LoopElement::identity(2);
    assert!(loop_multiply(&a, &id, 2).unwrap().dist(&a) < 1e-14);
}

#[test]
fn unitary_loop_inverse_is_adjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let k = random_gl(&mut rng, 3, 2);
    let prod = loop_multiply(&k, &k.adjoint(), 6).unwrap();
    assert!(prod.dist(&LoopElement::identity(3)) < 1e-12);
    let inv = loop_inverse(&k, 6).unwrap();
    assert!(inv.dist(&k.adjoint()) < 1e-12);
    let id = LoopElement::identity(3);
    assert!(loop_inverse(&id, 0).unwrap().dist(&id) < 1e-15);
}

#[test]
fn gstar_inverse_stays_in_gstar() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = random_gstar(&mut rng, 2, 1, 2, 0.3);
    let inv = g.inverse().unwrap();
    assert!(membership(&inv, Subgroup::GStar).member);
    assert!(g.mul(&inv).dist(&LoopElement::identity(2)) < 1e-10);
}

#[test]
fn singular_loop_is_rejected() {
    let z = LoopElement::zero(2);
    assert!(matches!(z.inverse(), Err(Error::NearSingular { .. })));
}

#[test]
fn pairing_spot_values() {
    let cw = build_cartan_weyl(3).unwrap();
    for mu in 0..cw.rank {
        let x = LoopElement::monomial(cw.h[mu].clone(), 1);
        let y = LoopElement::monomial(cw.h[mu].clone(), -1);
        assert!((pairing_loop(&x, &y) - c(1.0, 0.0)).norm() < 1e-15);
    }
    let a = cw.roots[0];
    for n in -2..=2 {
        for m in -2..=2 {
            let x = LoopElement::monomial(cw.e(a), n);
            let y = LoopElement::monomial(cw.e(a), m);
            assert!(pairing_loop(&x, &y).norm() < 1e-15);
        }
    }
}

#[test]
fn pairing_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = random_algebra_loop(&mut rng, 3, 3, 1.0);
    let y = random_algebra_loop(&mut rng, 3, 2, 1.0);
    assert!((pairing_loop(&x, &y) - pairing_quadrature(&x, &y, 64)).norm() < 1e-12);
}

#[test]
fn dual_basis_spot_values() {
    let cw = build_cartan_weyl(2).unwrap();
    let basis = AffineBasis::new(&cw, 2);
    for e in &basis.entries {
        if let BasisLabel::B(_) = e.label {
            let partner = basis.entries.iter().find(|f| f.label == BasisLabel::C(match e.label {
                BasisLabel::B(g) => g,
                _ => unreachable!(),
            })).unwrap();
            assert!((pairing_d(&e.t, &e.tl) - 1.0).abs() < 1e-14);
            assert!(pairing_d(&e.t, &partner.tl).abs() < 1e-14);
        }
    }
}

fn gram(basis: &AffineBasis, f: impl Fn(&BasisEntry) -> &LoopElement, g: impl Fn(&BasisEntry) -> &LoopElement) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in basis.entries.iter().enumerate() {
        for (j, b) in basis.entries.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((pairing_d(f(a), g(b)) - target).abs());
        }
    }
    worst
}

fn isotropy(basis: &AffineBasis, f: impl Fn(&BasisEntry) -> &LoopElement) -> f64 {
    let mut worst = 0.0f64;
    for a in &basis.entries {
        for b in &basis.entries {
            worst = worst.max(pairing_d(f(a), f(b)).abs());
        }
    }
    worst
}

#[test]
fn full_gram_matrices_are_identity_and_subalgebras_isotropic() {
    for n in [2, 3] {
        let cw = build_cartan_weyl(n).unwrap();
        let basis = AffineBasis::new(&cw, 6);
        assert!(gram(&basis, |e| &e.t, |e| &e.tl) < 1e-12);
        assert!(gram(&basis, |e| &e.t, |e| &e.tr) < 1e-12);
        assert!(isotropy(&basis, |e| &e.t) < 1e-12);
        assert!(isotropy(&basis, |e| &e.tl) < 1e-12);
        assert!(isotropy(&basis, |e| &e.tr) < 1e-12);
    }
}

#[test]
fn basis_families_live_in_their_subalgebras() {
    let cw = build_cartan_weyl(3).unwrap();
    let basis = AffineBasis::new(&cw, 3);
    // 2 Cartan + 2·(3 + 3·(6 + 2)) generators.
    assert_eq!(basis.len(), cw.rank + 2 * (3 + 3 * (6 + 2)));
    for e in &basis.entries {
        assert!(e.tl.adjoint().add(&e.tl).sup_norm() < 1e-15, "T_L anti-Hermitian");
        assert!(e.t.lo() >= 0);
        assert!(e.tr.hi() <= 0);
        let z = e.t.mode(0);
        for i in 0..3 {
            assert!(z[(i, i)].im.abs() < 1e-15);
            for j in 0..i {
                assert!(z[(i, j)].norm() < 1e-15);
            }
        }
        let r0 = e.tr.mode(0);
        assert!(linalg::max_abs(&(&r0 + r0.adjoint())) < 1e-15);
    }
}

#[test]
fn affine_positivity_order() {
    let cw = build_cartan_weyl(2).unwrap();
    let a = cw.roots[0];
    let g = |kind, mode| AffineGenerator { kind, mode };
    assert!(g(GenKind::E(a), 0).positive());
    assert!(!g(GenKind::E(a.neg()), 0).positive());
    assert!(g(GenKind::E(a.neg()), 1).positive());
    assert!(g(GenKind::H(0), 2).positive());
    assert!(!g(GenKind::H(0), 0).positive());
    assert!(!g(GenKind::E(a), -1).positive());
    assert!(positive_affine_roots(&cw, 4).iter().all(|r| r.positive()));
}

#[test]
fn kappa_spot_values() {
    let cw = build_cartan_weyl(2).unwrap();
    let e = cw.e(cw.roots[0]);
    let x = LoopElement::monomial(e.clone(), 1);
    let t = kappa_twist(&x, 2f64.ln(), 1).unwrap();
    assert!(t.dist(&LoopElement::monomial(e.clone() * c(0.5, 0.0), 1)) < 1e-15);
    let k = LoopElement::constant(e.clone());
    assert!(kappa_twist(&k, 3.0, 2).unwrap().dist(&k) < 1e-15);
    let big = LoopElement::monomial(e, -1000);
    assert!(matches!(kappa_twist(&big, 1.0, 1), Err(Error::Overflow)));
}

#[test]
fn membership_examples() {
    let cw = build_cartan_weyl(2).unwrap();
    let id = LoopElement::identity(2);
    for s in [Subgroup::GStar, Subgroup::GL, Subgroup::GR, Subgroup::D] {
        assert!(membership(&id, s).member);
    }
    // 0.6 i H cos σ, anti-Hermitian at every σ.
    let h = &cw.h[0] * c(0.0, 0.3);
    let x = LoopElement::from_pairs(2, &[(1, h.clone()), (-1, h)]);
    let g = x.exp();
    assert!(membership(&g, Subgroup::GL).member);
    assert!(!membership(&g, Subgroup::GStar).member);
    let u = LoopElement::from_pairs(2, &[(0, linalg::eye(2)), (1, cw.e(cw.roots[0]) * c(0.1, 0.0))]);
    assert!(membership(&u, Subgroup::GStar).member);
    assert!(!membership(&u, Subgroup::GR).member);
    assert!(!membership(&u, Subgroup::GL).member);
}

#[test]
fn gr_and_gstar_meet_only_at_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let id = LoopElement::identity(2);
    for _ in 0..10 {
        let d = random_vec(&mut rng, 2);
        let mut p = linalg::eye(2);
        p[(0, 1)] = c(1e-6 * d[0], 0.0);
        p[(0, 0)] = c(1.0 + 1e-6 * d[1], 0.0);
        let x = LoopElement::constant(p);
        assert!(!(membership(&x, Subgroup::GStar).member && membership(&x, Subgroup::GR).member));
    }
    assert!(membership(&id, Subgroup::GStar).member && membership(&id, Subgroup::GR).member);
}

#[test]
fn projector_examples() {
    let cw = build_cartan_weyl(2).unwrap();
    let basis = AffineBasis::new(&cw, 3);
    for e in &basis.entries {
        assert!(project(&basis, &e.t, Projector::PL).unwrap().sup_norm() < 1e-14);
        assert!(project(&basis, &e.t, Projector::PLStar).unwrap().dist(&e.t) < 1e-14);
        assert!(project(&basis, &e.tl, Projector::PL).unwrap().dist(&e.tl) < 1e-14);
        assert!(project(&basis, &e.tr, Projector::PR).unwrap().dist(&e.tr) < 1e-14);
        assert!(project(&basis, &e.tr, Projector::PRStar).unwrap().sup_norm() < 1e-14);
    }
    let far = LoopElement::monomial(cw.h[0].clone(), 4);
    assert!(matches!(project(&basis, &far, Projector::PL), Err(Error::CutoffExceeded { .. })));
}

fn seeds() -> impl Strategy<Value = (u64, usize)> {
    (any::<u64>(), 2usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projectors_are_complementary_and_idempotent((seed, n) in seeds()) {
        let cw = build_cartan_weyl(n).unwrap();
        let basis = AffineBasis::new(&cw, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_algebra_loop(&mut rng, n, 3, 1.0);
        for (p, q) in [(Projector::PL, Projector::PLStar), (Projector::PR, Projector::PRStar)] {
            let px = project(&basis, &x, p).unwrap();
            let qx = project(&basis, &x, q).unwrap();
            prop_assert!(px.add(&qx).dist(&x) < 1e-12);
            prop_assert!(project(&basis, &px, p).unwrap().dist(&px) < 1e-12);
            prop_assert!(project(&basis, &qx, q).unwrap().dist(&qx) < 1e-12);
            prop_assert!(project_exact(&x, p).dist(&px) < 1e-12);
        }
    }

    #[test]
    fn unitary_algebra_loops_are_isotropic((seed, n) in seeds()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_gl_algebra(&mut rng, n, 3, 1.0);
        let y = random_gl_algebra(&mut rng, n, 3, 1.0);
        prop_assert!(pairing_d(&x, &y).abs() < 1e-12);
    }

    #[test]
    fn kappa_is_multiplicative_and_composes((seed, eps) in (any::<u64>(), 0.05f64..1.0)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_poly(&mut rng, 2, -2, 2);
        let b = random_poly(&mut rng, 2, -2, 2);
        let ka = kappa_twist(&a, eps, 1).unwrap();
        let kb = kappa_twist(&b, eps, 1).unwrap();
        let kab = kappa_twist(&a.mul(&b), eps, 1).unwrap();
        prop_assert!(ka.mul(&kb).dist(&kab) < 1e-10 * (1.0 + kab.sup_norm()));
        let twice = kappa_twist(&ka, eps, 1).unwrap();
        prop_assert!(twice.dist(&kappa_twist(&a, 2.0 * eps, 1).unwrap()) < 1e-12 * (1.0 + twice.sup_norm()));
        // The twist is an isometry of the pairing: modes m and -m pick up inverse factors.
        prop_assert!((pairing_d(&ka, &kb) - pairing_d(&a, &b)).abs() < 1e-10);
    }

    #[test]
    fn multiply_round_trip_through_inverse((seed, n) in seeds()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_gstar(&mut rng, n, 2, 2, 0.3);
        let h = random_gl(&mut rng, n, 1);
        let p = g.mul(&h);
        prop_assert!(p.mul(&p.inverse().unwrap()).dist(&LoopElement::identity(n)) < 1e-10);
    }
}
