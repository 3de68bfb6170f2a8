use loopfactor_core::lie_core::*;
use loopfactor_core::linalg::{self, c, Mat};
use loopfactor_core::sampling::{random_sl, random_su_algebra};
use loopfactor_core::{build_cartan_weyl, TensorOperator};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn comm(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

#[test]
fn cartan_weyl_relations_hold_for_small_n() {
    for n in 2..=5 {
        let cw = build_cartan_weyl(n).unwrap();
        assert_eq!(cw.rank, n - 1);
        assert_eq!(cw.roots.len(), n * (n - 1));
        for mu in 0..cw.rank {
            for nu in 0..cw.rank {
                let t = linalg::trace(&(&cw.h[mu] * &cw.h[nu]));
                assert!((t - c(if mu == nu { 1.0 } else { 0.0 }, 0.0)).norm() < 1e-12);
            }
            assert!(linalg::max_abs(&(&cw.h[mu] - cw.h[mu].adjoint())) < 1e-15);
            assert!(linalg::trace(&cw.h[mu]).norm() < 1e-14);
        }
        for &a in &cw.roots {
            assert_eq!(a.len2(), 2.0);
            for mu in 0..cw.rank {
                let lhs = comm(&cw.h[mu], &cw.e(a));
                assert!(linalg::max_abs(&(lhs - cw.e(a) * c(cw.alpha_h(a, mu), 0.0))) < 1e-12);
            }
            assert!(linalg::max_abs(&(cw.e(a).adjoint() - cw.e(a.neg()))) < 1e-15);
            assert!(linalg::max_abs(&(comm(&cw.e(a), &cw.e(a.neg())) - cw.coroot(a))) < 1e-12);
            let p = pairing_k_mat(&cw.e(a), &cw.e(a.neg())).unwrap();
            assert!((p - c(2.0 / a.len2(), 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn su2_basis_matches_hand_values() {
    let cw = build_cartan_weyl(2).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = &cw.h[0];
    assert!((h[(0, 0)] - c(s, 0.0)).norm() < 1e-15 && (h[(1, 1)] + c(s, 0.0)).norm() < 1e-15);
    let a = cw.roots[0];
    assert_eq!((a.i, a.j), (0, 1));
    assert_eq!(cw.e(a), linalg::unit(2, 0, 1));
    assert_eq!(cw.e(a.neg()), linalg::unit(2, 1, 0));
    assert!((cw.alpha_h(a, 0) - 2f64.sqrt()).abs() < 1e-14);
    let mut d = linalg::zeros(2);
    d[(0, 0)] = c(1.0, 0.0);
    d[(1, 1)] = c(-1.0, 0.0);
    assert!(linalg::max_abs(&(cw.coroot(a) - &d)) < 1e-14);
    assert!(linalg::max_abs(&(cw.coroot(a) - h * c(2f64.sqrt(), 0.0))) < 1e-14);
}

#[test]
fn su3_has_six_long_roots() {
    let cw = build_cartan_weyl(3).unwrap();
    assert_eq!(cw.roots.len(), 6);
    assert_eq!(cw.positive_roots().count(), 3);
    for a in &cw.roots {
        let l2: f64 = (0..cw.rank).map(|mu| cw.alpha_h(*a, mu).powi(2)).sum();
        assert!((l2 - 2.0).abs() < 1e-12);
    }
}

#[test]
fn rejects_n_below_two() {
    assert!(build_cartan_weyl(0).is_err());
    assert!(build_cartan_weyl(1).is_err());
}

#[test]
fn killing_form_values() {
    let cw = build_cartan_weyl(2).unwrap();
    let h = &cw.h[0];
    let ih = h * c(0.0, 1.0);
    assert!((pairing_k_mat(h, h).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    assert!((pairing_k_mat(&ih, &ih).unwrap() + c(1.0, 0.0)).norm() < 1e-15);
    let a = LieElement::new(linalg::eye(2), AlgebraTag::Complexified);
    let b = LieElement::new(linalg::eye(3), AlgebraTag::Complexified);
    assert!(pairing_k(&a, &b).is_err());
}

#[test]
fn su2_casimir_is_swap_minus_half() {
    let cw = build_cartan_weyl(2).unwrap();
    let expect = &TensorOperator::swap_op(2) - &TensorOperator::identity(2).scale(c(0.5, 0.0));
    assert!(casimir_tensor(&cw).dist(&expect) < 1e-14);
}

#[test]
fn su2_r_tensor_matches_hand_value() {
    let cw = build_cartan_weyl(2).unwrap();
    let e12 = linalg::unit(2, 0, 1);
    let e21 = linalg::unit(2, 1, 0);
    let expect = (&TensorOperator::kron(&e21, &e12) - &TensorOperator::kron(&e12, &e21)).scale(c(0.0, 1.0));
    assert!(canonical_r_tensor(&cw).dist(&expect) < 1e-14);
}

#[test]
fn casimir_equals_brute_force_orthonormal_sum() {
    // An orthonormal basis of sl(n) for the trace form: Cartan part plus (e_ij ± e_ji) combinations.
    for n in 2..=4 {
        let cw = build_cartan_weyl(n).unwrap();
        let mut brute = TensorOperator::zeros(n);
        let mut add = |x: &Mat, y: &Mat| brute.m += linalg::kron(x, y);
        for h in &cw.h {
            add(h, h);
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..n {
            for j in (i + 1)..n {
                let x = (linalg::unit(n, i, j) + linalg::unit(n, j, i)) * c(s, 0.0);
                let y = (linalg::unit(n, i, j) - linalg::unit(n, j, i)) * c(0.0, s);
                add(&x, &x);
                add(&y, &y);
            }
        }
        assert!(casimir_tensor(&cw).dist(&brute) < 1e-13, "n={n}");
        // su(n): C = P - I/n.
        let pm = &TensorOperator::swap_op(n) - &TensorOperator::identity(n).scale(c(1.0 / n as f64, 0.0));
        assert!(casimir_tensor(&cw).dist(&pm) < 1e-13, "n={n}");
    }
}

#[test]
fn tag_defects_classify_elements() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let k = random_su_algebra(&mut rng, 3);
    assert!(LieElement::new(k.clone(), AlgebraTag::Compact).tag_defect() < 1e-14);
    assert!(LieElement::new(k * c(0.0, 1.0), AlgebraTag::Compact).tag_defect() > 1e-3);
    let mut an = linalg::zeros(3);
    an[(0, 0)] = c(0.5, 0.0);
    an[(1, 1)] = c(-0.5, 0.0);
    an[(0, 2)] = c(0.3, -0.2);
    assert!(LieElement::new(an.clone(), AlgebraTag::An).tag_defect() < 1e-15);
    assert!(LieElement::new(an.transpose(), AlgebraTag::An).tag_defect() > 0.1);
}

fn seeds() -> impl Strategy<Value = (u64, usize)> {
    (any::<u64>(), 2usize..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn casimir_is_ad_invariant((seed, n) in seeds()) {
        let cw = build_cartan_weyl(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_sl(&mut rng, n);
        let id = linalg::eye(n);
        let d = TensorOperator { n, m: linalg::kron(&x, &id) + linalg::kron(&id, &x) };
        let cc = casimir_tensor(&cw);
        let lhs = &(&cc * &d) - &(&d * &cc);
        prop_assert!(lhs.max_abs() < 1e-12 * (1.0 + d.max_abs()));
    }

    #[test]
    fn swap_symmetry_of_c_and_r(n in 2usize..=5) {
        let cw = build_cartan_weyl(n).unwrap();
        let cc = casimir_tensor(&cw);
        let r = canonical_r_tensor(&cw);
        prop_assert!(cc.swapped().dist(&cc) < 1e-14);
        prop_assert!((&r.swapped() + &r).max_abs() < 1e-14);
    }

    #[test]
    fn compact_elements_have_negative_norm((seed, n) in seeds()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_su_algebra(&mut rng, n);
        let p = pairing_k_mat(&a, &a).unwrap();
        prop_assert!(p.re < 0.0 && p.im.abs() < 1e-12);
    }
}
