use loopfactor_core::brackets::{exchange_rhs, ExchangeArgs, ExchangeKind};
use loopfactor_core::dynamics::*;
use loopfactor_core::linalg::{self, c, Mat};
use loopfactor_core::rmatrix::TrigForm;
use loopfactor_core::sampling::*;
use loopfactor_core::{build_cartan_weyl, CartanWeylBasis, Error, LoopElement};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn point(rng: &mut ChaCha8Rng, cw: &CartanWeylBasis) -> ChiralPoint {
    let k = random_gr(rng, cw.n, 2, 2, 0.4);
    let phi = random_phi_plus(rng, cw, 0.3, 0.5);
    ChiralPoint::new(cw, k, phi).unwrap()
}

fn neg(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| -x).collect()
}

#[test]
fn duality_on_trivial_points() {
    let cw = build_cartan_weyl(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let phi = random_phi_plus(&mut rng, &cw, 0.3, 0.5);
    let p = ChiralPoint::new(&cw, LoopElement::identity(3), phi.clone()).unwrap();
    let d = duality_u(&cw, &p).unwrap();
    assert!(d.k().dist(&LoopElement::identity(3)) < 1e-10);
    assert_eq!(d.a().phi, neg(&phi));
    assert!(d.certificate().valid);
    let q = DualChiralPoint::new(&cw, LoopElement::identity(3), neg(&phi)).unwrap();
    let v = duality_v(&cw, &q).unwrap();
    assert!(v.k.dist(&LoopElement::identity(3)) < 1e-10);
    assert_eq!(v.a.phi, phi);
}

#[test]
fn duality_maps_are_mutually_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in [2, 3] {
        let cw = build_cartan_weyl(n).unwrap();
        for _ in 0..5 {
            let p = point(&mut rng, &cw);
            let d = duality_u(&cw, &p).unwrap();
            assert!(d.certificate().valid && d.certificate().residual < 1e-9);
            let q = duality_v(&cw, &d).unwrap();
            assert!(q.k.dist(&p.k) < 1e-9);
            assert_eq!(q.a.phi, p.a.phi);
            let d2 = duality_u(&cw, &q).unwrap();
            assert!(d2.k().dist(d.k()) < 1e-9);
        }
    }
}

#[test]
fn dual_point_outside_groupoid_is_rejected() {
    let cw = build_cartan_weyl(2).unwrap();
    // k̃ = diag(e^{iσ}, e^{-iσ}) is unitary but ã^{-1}k̃^{-1} has nonzero partial indices.
    let k = LoopElement::from_pairs(2, &[(1, linalg::unit(2, 0, 0)), (-1, linalg::unit(2, 1, 1))]);
    let p = DualChiralPoint::new(&cw, k, vec![-0.5]).unwrap();
    assert!(!p.certificate().valid);
    assert!(matches!(duality_v(&cw, &p), Err(Error::NotInDomain { .. })));
}

#[test]
fn chart_validation() {
    let cw = build_cartan_weyl(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let gl = random_gl(&mut rng, 2, 1);
    assert!(ChiralPoint::new(&cw, gl.clone(), vec![0.5]).is_err());
    assert!(ChiralPoint::new(&cw, LoopElement::identity(2), vec![-0.5]).is_err());
    assert!(DualChiralPoint::new(&cw, gl, vec![0.5]).is_err());
    let gr = random_gr(&mut rng, 2, 1, 1, 0.4);
    assert!(DualChiralPoint::new(&cw, gr, vec![-0.5]).is_err());
}

#[test]
fn infinite_evolution_is_a_rotation() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let cw = build_cartan_weyl(3).unwrap();
    let d = duality_u(&cw, &point(&mut rng, &cw)).unwrap();
    assert!(evolve_infty(&cw, &d, 0.0).unwrap().k().dist(d.k()) < 1e-15);
    assert!(evolve_infty(&cw, &d, 2.0 * PI).unwrap().k().dist(d.k()) < 1e-13);
    let a = evolve_infty(&cw, &evolve_infty(&cw, &d, 0.7).unwrap(), 1.1).unwrap();
    let b = evolve_infty(&cw, &d, 1.8).unwrap();
    assert!(a.k().dist(b.k()) < 1e-12);
    let s = 0.3;
    assert!(linalg::max_abs(&(b.k().eval(s + 1.8) - d.k().eval(s))) < 1e-12);
}

#[test]
fn evolution_keeps_certificate_and_exchange_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for n in [2, 3] {
        let cw = build_cartan_weyl(n).unwrap();
        let p = point(&mut rng, &cw);
        let d = duality_u(&cw, &p).unwrap();
        let phi = p.a.phi.clone();
        let m = 16;
        for j in 0..m {
            let tau = 2.0 * PI * j as f64 / m as f64;
            let e = evolve_infty(&cw, &d, tau).unwrap();
            assert!(e.certificate().valid);
            let at = |k: &LoopElement, s: f64, sp: f64, kind| {
                let args = ExchangeArgs { first: k.clone(), second: k.clone(), phi: phi.clone(), eps_k: None };
                exchange_rhs(&cw, kind, &args, s, sp, TrigForm::Closed).unwrap()
            };
            let ashift = ExchangeArgs { first: LoopElement::constant(p.a_mat(&cw)), second: e.k().clone(), phi: phi.clone(), eps_k: None };
            let a0 = ExchangeArgs { second: d.k().clone(), ..ashift.clone() };
            for kind in [ExchangeKind::DualKK] {
                assert!(at(d.k(), 0.4, 1.9, kind).dist(&at(e.k(), 0.4 + tau, 1.9 + tau, kind)) < 1e-10);
            }
            let x = exchange_rhs(&cw, ExchangeKind::DualAK, &a0, 0.4, 1.9, TrigForm::Closed).unwrap();
            let y = exchange_rhs(&cw, ExchangeKind::DualAK, &ashift, 0.4, 1.9 + tau, TrigForm::Closed).unwrap();
            assert!(x.dist(&y) < 1e-10);
        }
    }
}

fn monodromic(rng: &mut ChaCha8Rng, cw: &CartanWeylBasis) -> MonodromicField {
    let k = random_gl(rng, cw.n, 1);
    let a: Vec<f64> = (0..cw.rank).map(|mu| 0.1 + 0.07 * mu as f64).collect();
    MonodromicField::new(cw, k, a).unwrap()
}

#[test]
fn monodromic_examples() {
    let cw = build_cartan_weyl(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let k = random_gl(&mut rng, 2, 1);
    let m0 = MonodromicField::new(&cw, k.clone(), vec![0.0]).unwrap();
    assert!(linalg::max_abs(&(m0.eval(&cw, 0.9) - k.eval(0.9))) < 1e-15);
    assert!(linalg::max_abs(&(m0.monodromy(&cw) - linalg::eye(2))) < 1e-14);
    let a = vec![0.3];
    let m1 = MonodromicField::new(&cw, LoopElement::identity(2), a.clone()).unwrap();
    let x = &cw.h[0] * c(0.0, -0.3);
    let expected = |s: f64| linalg::expm(&(&x * c(s, 0.0)));
    assert!(linalg::max_abs(&(m1.eval(&cw, 1.3) - expected(1.3))) < 1e-13);
    assert!(linalg::max_abs(&(m1.monodromy(&cw) - expected(2.0 * PI))) < 1e-13);
    assert!(MonodromicField::new(&cw, k, vec![0.1, 0.2]).is_err());
}

#[test]
fn monodromy_invariant_and_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in [2, 3] {
        let cw = build_cartan_weyl(n).unwrap();
        let m = monodromic(&mut rng, &cw);
        assert!(m.quasi_periodicity_defect(&cw, 32).unwrap() < 1e-10);
        let back = monodromic_convert(&cw, |s| m.eval(&cw, s), &m.a, 64, 1e-10).unwrap();
        assert!(back.k.dist(&m.k) < 1e-10);
        // A periodic field with a nonzero declared monodromy is rejected.
        let bad = monodromic_convert(&cw, |s| m.k.eval(s), &m.a, 64, 1e-10);
        assert!(matches!(bad, Err(Error::MonodromyMismatch { .. })));
        assert!(monodromic_convert(&cw, |s| m.eval(&cw, s), &m.a, 48, 1e-10).is_err());
    }
}

#[test]
fn quasi_periodic_evolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let cw = build_cartan_weyl(3).unwrap();
    let m = monodromic(&mut rng, &cw);
    let e0 = evolve_q(&cw, &m, 0.0);
    assert!(e0.k.dist(&m.k) < 1e-15);
    let tau = 0.83;
    let e = evolve_q(&cw, &m, tau);
    assert!(linalg::max_abs(&(e.monodromy(&cw) - m.monodromy(&cw))) < 1e-15);
    // Monodromic form: m(σ) ↦ m(σ - τ).
    for s in [0.0, 1.0, 4.0] {
        assert!(linalg::max_abs(&(e.eval(&cw, s) - m.eval(&cw, s - tau))) < 1e-12);
    }
    let mm: Mat = m.monodromy(&cw);
    assert!(linalg::unitarity_defect(&mm) < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn quasi_periodic_group_law((seed, t1, t2) in (any::<u64>(), -4.0f64..4.0, -4.0f64..4.0)) {
        let cw = build_cartan_weyl(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = monodromic(&mut rng, &cw);
        let a = evolve_q(&cw, &evolve_q(&cw, &m, t2), t1);
        let b = evolve_q(&cw, &m, t1 + t2);
        prop_assert!(a.k.dist(&b.k) < 1e-12);
    }

    #[test]
    fn infinite_evolution_preserves_certificate((seed, tau) in (any::<u64>(), 0.0f64..(2.0 * PI))) {
        let cw = build_cartan_weyl(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = duality_u(&cw, &point(&mut rng, &cw)).unwrap();
        let e = evolve_infty(&cw, &d, tau).unwrap();
        prop_assert!(e.certificate().valid);
        let back = duality_v(&cw, &e).unwrap();
        prop_assert!(membership_gr(&back.k));
    }
}

fn membership_gr(k: &LoopElement) -> bool {
    loopfactor_core::loop_algebra::membership(k, loopfactor_core::loop_algebra::Subgroup::GR).member
}
