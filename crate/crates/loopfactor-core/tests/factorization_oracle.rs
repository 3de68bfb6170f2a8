use loopfactor_core::factorization::*;
use loopfactor_core::linalg::{self, c, Mat};
use loopfactor_core::loop_algebra::{membership, Subgroup};
use loopfactor_core::sampling::*;
use loopfactor_core::{build_cartan_weyl, Error, LoopElement};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unipotent(n: usize, i: usize, j: usize, z: f64, mode: i64) -> LoopElement {
    LoopElement::from_pairs(n, &[(0, linalg::eye(n)), (mode, linalg::unit(n, i, j) * c(z, 0.0))])
}

fn diag(d: &[f64]) -> Mat {
    diag_mat(d)
}

#[test]
fn iwasawa_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = random_gl(&mut rng, 2, 1);
    let (k, an) = iwasawa_pointwise(&u).unwrap();
    assert!(k.dist(&u) < 1e-12 && an.dist(&LoopElement::identity(2)) < 1e-12);
    let d = LoopElement::constant(diag(&[2.0, 0.5]));
    let (k, an) = iwasawa_pointwise(&d).unwrap();
    assert!(k.dist(&LoopElement::identity(2)) < 1e-14 && an.dist(&d) < 1e-14);
    let g = LoopElement::from_pairs(2, &[(0, random_sl(&mut rng, 2)), (1, random_sl(&mut rng, 2) * c(0.2, 0.0))]);
    let (k, an) = iwasawa_pointwise(&g).unwrap();
    let m = 64;
    for (j, (ks, ans)) in k.samples(m).iter().zip(an.samples(m)).enumerate() {
        let s = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
        assert!(linalg::max_abs(&(ks * &ans - g.eval(s))) < 1e-11);
        assert!(linalg::unitarity_defect(ks) < 1e-11);
        for i in 0..2 {
            assert!(ans[(i, i)].re > 0.0 && ans[(i, i)].im.abs() < 1e-11);
        }
        assert!(ans[(1, 0)].norm() < 1e-11);
    }
}

#[test]
fn cartan_const_examples() {
    let id = cartan_const(&linalg::eye(2)).unwrap();
    assert!(linalg::max_abs(&(id.ul.clone() - linalg::eye(2))) < 1e-14);
    assert!(id.degenerate);
    let d = cartan_const(&diag(&[3.0, 1.0 / 3.0])).unwrap();
    assert!((d.a[0] - 3.0).abs() < 1e-14 && (d.a[1] - 1.0 / 3.0).abs() < 1e-14);
    assert!(linalg::max_abs(&(d.ul.clone() - linalg::eye(2))) < 1e-14);
    assert!(linalg::max_abs(&(d.ur.clone() - linalg::eye(2))) < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [2, 3, 4] {
        let g0 = random_complex_matrix(&mut rng, n);
        let g = &g0 / linalg::det(&g0).powf(1.0 / n as f64);
        let cc = cartan_const(&g).unwrap();
        let recon = &cc.ul * cc.a_mat() * cc.ur.adjoint();
        assert!(linalg::max_abs(&(recon - &g)) < 1e-12);
        let sv = g.clone().svd(false, false).singular_values;
        let mut sv: Vec<f64> = sv.iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (a, s) in cc.a.iter().zip(&sv) {
            assert!((a - s).abs() < 1e-12);
        }
        assert!((linalg::det(&cc.ur) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((linalg::det(&cc.ul) - c(1.0, 0.0)).norm() < 1e-12);
        for col in 0..n - 1 {
            let (imax, _) = (0..n).map(|i| (i, cc.ur[(i, col)].norm())).fold((0, -1.0), |b, x| if x.1 > b.1 { x } else { b });
            let z = cc.ur[(imax, col)];
            assert!(z.im.abs() < 1e-12 && z.re > 0.0);
        }
    }
}

#[test]
fn gstar_gl_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v = random_gl(&mut rng, 2, 2);
    let fp = factor_gstar_gl(&v).unwrap();
    assert!(fp.u.dist(&LoopElement::identity(2)) < 1e-10 && fp.v.dist(&v) < 1e-10);
    let u = random_gstar(&mut rng, 2, 2, 2, 0.4);
    let fp = factor_gstar_gl(&u).unwrap();
    assert!(fp.u.dist(&u) < 1e-10 && fp.v.dist(&LoopElement::identity(2)) < 1e-10);
    let u = unipotent(2, 0, 1, 0.2, 1);
    let l = u.mul(&v);
    let fp = factor_gstar_gl(&l).unwrap();
    assert!(fp.u.dist(&u) < 1e-8 && fp.v.dist(&v) < 1e-8);
    assert!(fp.residual < 1e-10);
    assert!(pair_membership(&fp, Subgroup::GL) < 1e-9);
}

#[test]
fn gr_gstar_examples() {
    let id = LoopElement::identity(2);
    let fp = factor_gr_gstar(&id).unwrap();
    assert!(fp.u.dist(&id) < 1e-12 && fp.v.dist(&id) < 1e-12);
    let vr = unipotent(2, 1, 0, 0.2, -1);
    let u = unipotent(2, 0, 1, 0.1, 1);
    let fp = factor_gr_gstar(&vr.mul(&u)).unwrap();
    assert!(fp.v.dist(&vr) < 1e-8 && fp.u.dist(&u) < 1e-8);
    // A constant SU(2) rotation by π/2.
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let rot = Mat::from_row_slice(2, 2, &[c(s, 0.0), c(-s, 0.0), c(s, 0.0), c(s, 0.0)]);
    let fp = factor_gr_gstar(&LoopElement::constant(rot.clone())).unwrap();
    assert!(fp.v.dist(&LoopElement::constant(rot)) < 1e-12);
    assert!(fp.u.dist(&id) < 1e-12);
}

#[test]
fn outside_s_infty_is_reported() {
    // diag(z, 1/z) has nontrivial partial indices and admits no G_R·G* splitting.
    let w = LoopElement::from_pairs(2, &[(1, linalg::unit(2, 0, 0)), (-1, linalg::unit(2, 1, 1))]);
    assert!(matches!(factor_gr_gstar(&w), Err(Error::NotInDomain { .. })));
    assert!(!in_s_infty(&w));
    let lx = lambda_xi(&w).unwrap();
    assert!(lx.lambda_r.is_err() && lx.xi_l.is_err());
}

#[test]
fn lambda_xi_on_gstar() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let k = random_gstar(&mut rng, 3, 1, 2, 0.3);
    let lx = lambda_xi(&k).unwrap();
    let id = LoopElement::identity(3);
    assert!(lx.lambda_l.dist(&k) < 1e-10);
    assert!(lx.xi_r.dist(&id) < 1e-10);
    assert!(lx.lambda_r.unwrap().dist(&k.inverse().unwrap()) < 1e-10);
    assert!(lx.xi_l.unwrap().dist(&id) < 1e-10);
}

#[test]
fn factorization_is_grid_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let l = random_gstar(&mut rng, 2, 1, 2, 0.3).mul(&random_gl(&mut rng, 2, 1));
    let a = factor_gstar_gl(&l).unwrap();
    let b = factor_gstar_gl(&l.clone().with_grid(4 * l.check_grid())).unwrap();
    assert!(a.u.dist(&b.u) < 1e-10 && a.v.dist(&b.v) < 1e-10);
    let k = random_gr(&mut rng, 2, 1, 2, 0.3).mul(&random_gstar(&mut rng, 2, 1, 2, 0.3));
    let a = factor_gr_gstar(&k).unwrap();
    let b = factor_gr_gstar(&k.clone().with_grid(4 * k.check_grid())).unwrap();
    assert!(a.u.dist(&b.u) < 1e-10 && a.v.dist(&b.v) < 1e-10);
}

#[test]
fn infty_cartan_examples() {
    let a = [2.0, 0.5];
    let s = LoopElement::constant(diag(&a));
    let t = infty_cartan(&s).unwrap();
    assert!((t.a[0] - 2.0).abs() < 1e-10 && (t.a[1] - 0.5).abs() < 1e-10);
    assert!(t.k_l.dist(&LoopElement::identity(2)) < 1e-9);
    assert!(t.residual < 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let k = random_gr(&mut rng, 2, 1, 2, 0.3);
    let t = infty_cartan(&k.rmul_mat(&diag(&a))).unwrap();
    assert!(t.residual <= 1e-7);
    assert!((t.a[0] - 2.0).abs() < 1e-8);
    // k_l agrees with k up to a torus element on the right, k_r is then that torus element.
    let tor = k.inverse().unwrap().mul(&t.k_l).cleaned();
    assert!(tor.degree() == 0 && membership(&tor, Subgroup::GR).member);
    let tm = tor.mode(0);
    assert!(linalg::max_abs(&(&tm - Mat::from_diagonal(&tm.diagonal()))) < 1e-8);
    assert!(t.k_r.dist(&tor) < 1e-7);
}

#[test]
fn torus_covariance_of_compose_phi() {
    let cw = build_cartan_weyl(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let kl = random_gr(&mut rng, 3, 1, 2, 0.3);
    let kr = random_gr(&mut rng, 3, 1, 2, 0.3);
    let a = random_a_plus(&mut rng, 3, 0.3, 0.5);
    let th = [0.4, -1.1];
    let tdiag: Vec<_> = cw.cartan_diag(&th).iter().map(|x| c(x.cos(), x.sin())).collect();
    let t = Mat::from_diagonal(&nalgebra::DVector::from_vec(tdiag));
    let s1 = compose_phi(&kl, &a, &kr).unwrap();
    let s2 = compose_phi(&kl.rmul_mat(&t), &a, &kr.rmul_mat(&t)).unwrap();
    assert!(s1.dist(&s2) < 1e-9);
    assert!(compose_phi(&LoopElement::identity(3), &[1.0; 3], &LoopElement::identity(3)).unwrap().dist(&LoopElement::identity(3)) < 1e-12);
}

fn triple(rng: &mut ChaCha8Rng, n: usize) -> (LoopElement, Vec<f64>, LoopElement) {
    (random_gr(rng, n, 1, 2, 0.3), random_a_plus(rng, n, 0.3, 0.5), random_gr(rng, n, 1, 2, 0.3))
}

#[test]
fn identities_for_composed_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in [2, 3] {
        let (kl, a, kr) = triple(&mut rng, n);
        let am = diag(&a);
        let s = compose_phi(&kl, &a, &kr).unwrap();
        let kla = kl.rmul_mat(&am);
        let kra = kr.rmul_mat(&am);
        let xr_kra = xi_r(&kra).unwrap();
        // Λ_L(s) = Λ_L(k_l a).
        assert!(lambda_l(&s).unwrap().dist(&lambda_l(&kla).unwrap()) < 1e-8);
        // Λ_R(s) = Ξ_R(k_r a)^{-1} a^{-1} k_r^{-1}.
        let ai = linalg::inverse(&am).unwrap();
        let lr = xr_kra.inverse().unwrap().rmul_mat(&ai).mul(&kr.inverse().unwrap());
        assert!(lambda_r(&s).unwrap().dist(&lr) < 1e-8);
        // Ξ_L(s) = k_l k_r^{-1}.
        assert!(xi_l(&s).unwrap().dist(&kl.mul(&kr.inverse().unwrap())) < 1e-8);
        // Ξ_R(s) = Ξ_R(k_r a)^{-1} Ξ_R(k_l a).
        let xr = xr_kra.inverse().unwrap().mul(&xi_r(&kla).unwrap());
        assert!(xi_r(&s).unwrap().dist(&xr) < 1e-8);
        assert!(in_s_infty(&s));
    }
}

#[test]
fn spectral_factor_reproduces_positive_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u = random_gstar(&mut rng, 3, 2, 3, 0.3);
    let p = u.mul(&u.adjoint());
    let (f, blocks) = spectral_factor(&p).unwrap();
    assert!(f.mul(&f.adjoint()).dist(&p) < 1e-10);
    assert!(f.lo() >= 0 && blocks > 0);
}

fn seeds() -> impl Strategy<Value = (u64, usize)> {
    (any::<u64>(), 2usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lambda_l_is_equivariant((seed, n) in seeds()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_gstar(&mut rng, n, 1, 2, 0.3).mul(&random_gl(&mut rng, n, 1));
        let vl = random_gl(&mut rng, n, 1);
        let u = random_gstar(&mut rng, n, 1, 1, 0.3);
        let l0 = lambda_l(&k).unwrap();
        prop_assert!(lambda_l(&k.mul(&vl)).unwrap().dist(&l0) < 1e-8);
        prop_assert!(lambda_l(&u.mul(&k)).unwrap().dist(&u.mul(&l0)) < 1e-8);
    }

    #[test]
    fn construct_then_split((seed, n) in seeds()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_gstar(&mut rng, n, 2, 2, 0.3);
        let v = random_gl(&mut rng, n, 2);
        let fp = factor_gstar_gl(&u.mul(&v)).unwrap();
        prop_assert!(fp.u.dist(&u) < 1e-8 && fp.v.dist(&v) < 1e-8 && fp.residual < 1e-8);
        let vr = random_gr(&mut rng, n, 2, 2, 0.3);
        let fp = factor_gr_gstar(&vr.mul(&u)).unwrap();
        prop_assert!(fp.u.dist(&u) < 1e-8 && fp.v.dist(&vr) < 1e-8 && fp.residual < 1e-8);
        prop_assert!(pair_membership(&fp, Subgroup::GR) < 1e-9);
    }

    #[test]
    fn infty_cartan_round_trip((seed, n) in seeds()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (kl, a, kr) = triple(&mut rng, n);
        let s = compose_phi(&kl, &a, &kr).unwrap();
        let t = infty_cartan(&s).unwrap();
        prop_assert!(t.residual <= 1e-7);
        for (x, y) in t.a.iter().zip(&a) {
            prop_assert!((x - y).abs() < 1e-7);
        }
        prop_assert!(!t.degenerate);
    }
}
