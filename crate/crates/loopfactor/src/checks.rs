//! Named invariant checks run by the `suite` command.
//!
//! Each check measures one deviation. Its tolerance is the configured tolerance of its
//! class scaled by a per-check factor, and it passes iff deviation < tolerance.

use crate::config::RunConfig;
use loopfactor_core::brackets::*;
use loopfactor_core::dynamics::*;
use loopfactor_core::factorization::*;
use loopfactor_core::lie_core::{canonical_r_tensor, casimir_tensor, pairing_k_mat};
use loopfactor_core::linalg::{self, c, Mat};
use loopfactor_core::loop_algebra::{kappa_twist, pairing_d, project, BasisEntry, Projector, Subgroup};
use loopfactor_core::rmatrix::*;
use loopfactor_core::sampling::*;
use loopfactor_core::{build_cartan_weyl, AffineBasis, CartanWeylBasis, LoopElement, TensorOperator, C};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    /// Exact algebra up to rounding.
    Alg,
    /// Finite-difference derivatives involved.
    Fd,
}

pub enum Outcome {
    Measured(f64),
    Skipped(String),
    Error(String),
}

pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub cw: CartanWeylBasis,
    pub rng: ChaCha8Rng,
}

type Run = fn(&mut Ctx) -> Outcome;

pub struct Check {
    pub name: &'static str,
    pub class: Class,
    pub factor: f64,
    pub run: Run,
}

impl Check {
    pub fn tolerance(&self, cfg: &RunConfig) -> f64 {
        self.factor
            * match self.class {
                Class::Alg => cfg.tol_alg,
                Class::Fd => cfg.tol_fd,
            }
    }
}

/// FNV-1a, so each check draws from its own stream regardless of scheduling.
pub fn check_seed(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325 ^ seed;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub fn context<'a>(cfg: &'a RunConfig, name: &str) -> Result<Ctx<'a>, String> {
    let cw = build_cartan_weyl(cfg.group_n).map_err(|e| e.to_string())?;
    Ok(Ctx { cfg, cw, rng: ChaCha8Rng::seed_from_u64(check_seed(cfg.seed, name)) })
}

macro_rules! tryo {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return Outcome::Error(format!("{e}")),
        }
    };
}

/// Desk-scale bound for the bracket and form checks.
const HEAVY_MAX_N: usize = 3;

fn heavy(ctx: &Ctx) -> Option<Outcome> {
    (ctx.cw.n > HEAVY_MAX_N).then(|| Outcome::Skipped(format!("bracket and form checks limited to n <= {HEAVY_MAX_N}")))
}

fn rel(a: &Field2, b: &Field2, w: i64) -> f64 {
    window_deviation(a, b, w, 1.0).rel
}

fn comm(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

fn random_lie_gr(rng: &mut ChaCha8Rng, basis: &AffineBasis, deg: i64, amp: f64) -> LoopElement {
    let mut x = LoopElement::zero(basis.n());
    for e in basis.entries.iter().filter(|e| e.label.mode() <= deg) {
        x = x.add(&e.tr.scale_re(amp * (rng.gen::<f64>() - 0.5)));
    }
    x
}

fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen::<f64>() - 0.5).collect()
}

fn r_plus_ic(cw: &CartanWeylBasis) -> TensorOperator {
    &canonical_r_tensor(cw) + &casimir_tensor(cw).scale(c(0.0, 1.0))
}

// ---- lie_core ----

fn lie_cartan_weyl(ctx: &mut Ctx) -> Outcome {
    let cw = &ctx.cw;
    let mut worst = 0.0f64;
    for mu in 0..cw.rank {
        for nu in 0..cw.rank {
            let t = linalg::trace(&(&cw.h[mu] * &cw.h[nu]));
            worst = worst.max((t - c(if mu == nu { 1.0 } else { 0.0 }, 0.0)).norm());
        }
    }
    for &a in &cw.roots {
        for mu in 0..cw.rank {
            let d = comm(&cw.h[mu], &cw.e(a)) - cw.e(a) * c(cw.alpha_h(a, mu), 0.0);
            worst = worst.max(linalg::max_abs(&d));
        }
        worst = worst.max(linalg::max_abs(&(comm(&cw.e(a), &cw.e(a.neg())) - cw.coroot(a))));
    }
    Outcome::Measured(worst)
}

fn lie_killing(ctx: &mut Ctx) -> Outcome {
    let cw = &ctx.cw;
    let mut worst = 0.0f64;
    for &a in &cw.roots {
        let p = tryo!(pairing_k_mat(&cw.e(a), &cw.e(a.neg())));
        worst = worst.max((p - c(2.0 / a.len2(), 0.0)).norm());
    }
    Outcome::Measured(worst)
}

fn lie_casimir(ctx: &mut Ctx) -> Outcome {
    let n = ctx.cw.n;
    let target = &TensorOperator::swap_op(n) - &TensorOperator::identity(n).scale(c(1.0 / n as f64, 0.0));
    Outcome::Measured(casimir_tensor(&ctx.cw).dist(&target))
}

// ---- loop_algebra ----

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

fn loop_gram_tl(ctx: &mut Ctx) -> Outcome {
    let basis = AffineBasis::new(&ctx.cw, ctx.cfg.cutoff);
    Outcome::Measured(gram(&basis, |e| &e.t, |e| &e.tl))
}

fn loop_gram_tr(ctx: &mut Ctx) -> Outcome {
    let basis = AffineBasis::new(&ctx.cw, ctx.cfg.cutoff);
    Outcome::Measured(gram(&basis, |e| &e.t, |e| &e.tr))
}

fn loop_isotropy(ctx: &mut Ctx) -> Outcome {
    let basis = AffineBasis::new(&ctx.cw, ctx.cfg.cutoff);
    let w = isotropy(&basis, |e| &e.t).max(isotropy(&basis, |e| &e.tl)).max(isotropy(&basis, |e| &e.tr));
    Outcome::Measured(w)
}

fn loop_projectors(ctx: &mut Ctx) -> Outcome {
    let n = ctx.cw.n;
    let basis = AffineBasis::new(&ctx.cw, ctx.cfg.cutoff.min(3));
    let x = random_algebra_loop(&mut ctx.rng, n, 2, 0.5);
    let mut worst = 0.0f64;
    for (p, q) in [(Projector::PL, Projector::PLStar), (Projector::PR, Projector::PRStar)] {
        let px = tryo!(project(&basis, &x, p));
        let qx = tryo!(project(&basis, &x, q));
        worst = worst.max(tryo!(project(&basis, &px, p)).dist(&px));
        worst = worst.max(px.add(&qx).dist(&x));
    }
    Outcome::Measured(worst / x.sup_norm().max(1.0))
}

fn loop_kappa(ctx: &mut Ctx) -> Outcome {
    let n = ctx.cw.n;
    let eps = 0.4;
    let a = random_algebra_loop(&mut ctx.rng, n, 2, 1.0);
    let b = random_algebra_loop(&mut ctx.rng, n, 2, 1.0);
    let ka = tryo!(kappa_twist(&a, eps, 1));
    let kb = tryo!(kappa_twist(&b, eps, 1));
    let kab = tryo!(kappa_twist(&a.mul(&b), eps, 1));
    let mult = ka.mul(&kb).dist(&kab) / (1.0 + kab.sup_norm());
    let iso = (pairing_d(&ka, &kb) - pairing_d(&a, &b)).abs();
    Outcome::Measured(mult.max(iso))
}

fn loop_inverse(ctx: &mut Ctx) -> Outcome {
    let n = ctx.cw.n;
    let u = random_gstar(&mut ctx.rng, n, 2, 2, 0.3).with_grid(ctx.cfg.grid);
    let ui = tryo!(u.inverse());
    Outcome::Measured(u.mul(&ui).dist(&LoopElement::identity(n)))
}

// ---- factorization ----

fn fact_gstar_gl(ctx: &mut Ctx) -> Outcome {
    let n = ctx.cw.n;
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let u = random_gstar(&mut ctx.rng, n, 2, 2, 0.3);
        let v = random_gl(&mut ctx.rng, n, 2);
        let fp = tryo!(factor_gstar_gl(&u.mul(&v).with_grid(ctx.cfg.grid)));
        worst = worst.max(fp.u.dist(&u)).max(fp.v.dist(&v)).max(fp.residual).max(pair_membership(&fp, Subgroup::GL));
    }
    Outcome::Measured(worst)
}

fn fact_gr_gstar(ctx: &mut Ctx) -> Outcome {
    let n = ctx.cw.n;
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let u = random_gstar(&mut ctx.rng, n, 2, 2, 0.3);
        let v = random_gr(&mut ctx.rng, n, 2, 2, 0.3);
        let fp = tryo!(factor_gr_gstar(&v.mul(&u).with_grid(ctx.cfg.grid)));
        worst = worst.max(fp.u.dist(&u)).max(fp.v.dist(&v)).max(fp.residual).max(pair_membership(&fp, Subgroup::GR));
    }
    Outcome::Measured(worst)
}

fn fact_grid_uniqueness(ctx: &mut Ctx) -> Outcome {
    let n = ctx.cw.n;
    let l = random_gstar(&mut ctx.rng, n, 1, 2, 0.3).mul(&random_gl(&mut ctx.rng, n, 1));
    let a = tryo!(factor_gstar_gl(&l));
    let b = tryo!(factor_gstar_gl(&l.clone().with_grid(4 * l.check_grid())));
    let k = random_gr(&mut ctx.rng, n, 1, 2, 0.3).mul(&random_gstar(&mut ctx.rng, n, 1, 2, 0.3));
    let x = tryo!(factor_gr_gstar(&k));
    let y = tryo!(factor_gr_gstar(&k.clone().with_grid(4 * k.check_grid())));
    Outcome::Measured(a.u.dist(&b.u).max(a.v.dist(&b.v)).max(x.u.dist(&y.u)).max(x.v.dist(&y.v)))
}

fn triple(rng: &mut ChaCha8Rng, n: usize) -> (LoopElement, Vec<f64>, LoopElement) {
    (random_gr(rng, n, 1, 2, 0.3), random_a_plus(rng, n, 0.3, 0.5), random_gr(rng, n, 1, 2, 0.3))
}

fn fact_infty_cartan(ctx: &mut Ctx) -> Outcome {
    let n = ctx.cw.n;
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let (kl, a, kr) = triple(&mut ctx.rng, n);
        let s = tryo!(compose_phi(&kl, &a, &kr));
        let t = tryo!(infty_cartan(&s));
        worst = worst.max(t.residual);
        for (x, y) in t.a.iter().zip(&a) {
            worst = worst.max((x - y).abs());
        }
    }
    Outcome::Measured(worst)
}

fn fact_lambda_composed(ctx: &mut Ctx) -> Outcome {
    let n = ctx.cw.n;
    let (kl, a, kr) = triple(&mut ctx.rng, n);
    let am = diag_mat(&a);
    let s = tryo!(compose_phi(&kl, &a, &kr));
    let kla = kl.rmul_mat(&am);
    let kra = kr.rmul_mat(&am);
    let xr_kra_inv = tryo!(tryo!(xi_r(&kra)).inverse());
    let d1 = tryo!(lambda_l(&s)).dist(&tryo!(lambda_l(&kla)));
    let ai = linalg::inverse(&am).expect("a invertible");
    let lr = xr_kra_inv.rmul_mat(&ai).mul(&tryo!(kr.inverse()));
    let d2 = tryo!(lambda_r(&s)).dist(&lr);
    Outcome::Measured(d1.max(d2))
}

fn fact_xi_composed(ctx: &mut Ctx) -> Outcome {
    let n = ctx.cw.n;
    let (kl, a, kr) = triple(&mut ctx.rng, n);
    let am = diag_mat(&a);
    let s = tryo!(compose_phi(&kl, &a, &kr));
    let xr_kra_inv = tryo!(tryo!(xi_r(&kr.rmul_mat(&am))).inverse());
    let d1 = tryo!(xi_l(&s)).dist(&kl.mul(&tryo!(kr.inverse())));
    let d2 = tryo!(xi_r(&s)).dist(&xr_kra_inv.mul(&tryo!(xi_r(&kl.rmul_mat(&am)))));
    Outcome::Measured(d1.max(d2))
}

fn fact_spectral(ctx: &mut Ctx) -> Outcome {
    let n = ctx.cw.n;
    let u = random_gstar(&mut ctx.rng, n, 2, 3, 0.3);
    let p = u.mul(&u.adjoint());
    let (f, _) = tryo!(spectral_factor(&p));
    if f.lo() < 0 {
        return Outcome::Error("spectral factor has negative modes".into());
    }
    Outcome::Measured(f.mul(&f.adjoint()).dist(&p))
}

fn fact_iwasawa(ctx: &mut Ctx) -> Outcome {
    let n = ctx.cw.n;
    let g = random_gstar(&mut ctx.rng, n, 1, 1, 0.3).mul(&random_gl(&mut ctx.rng, n, 1));
    let (k, an) = tryo!(iwasawa_pointwise(&g));
    let mut worst = 0.0f64;
    for j in 0..16 {
        let s = 2.0 * PI * (j as f64 + 0.37) / 16.0;
        let (kk, aa) = (k.eval(s), an.eval(s));
        worst = worst.max(linalg::max_abs(&(&kk * &aa - g.eval(s)))).max(linalg::unitarity_defect(&kk));
    }
    Outcome::Measured(worst)
}

// ---- rmatrix ----

fn rm_swap(ctx: &mut Ctx) -> Outcome {
    let cw = &ctx.cw;
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let phi = random_phi_plus(&mut ctx.rng, cw, 0.2, 0.8);
        let rd = tryo!(r_dynamical(cw, &phi));
        worst = worst.max((&rd.swapped() + &rd).max_abs());
        let s = 0.1 + 6.0 * ctx.rng.gen::<f64>();
        let a = tryo!(r_trig(cw, s, TrigForm::Closed));
        let b = tryo!(r_trig(cw, -s, TrigForm::Closed));
        worst = worst.max((&a.swapped() + &b).max_abs() / (1.0 + a.max_abs()));
    }
    let r = canonical_r_tensor(cw);
    worst = worst.max((&r.swapped() + &r).max_abs());
    let cc = casimir_tensor(cw);
    Outcome::Measured(worst.max(cc.swapped().dist(&cc)))
}

fn rm_cybe(ctx: &mut Ctx) -> Outcome {
    Outcome::Measured(tryo!(cybe_trig(&ctx.cw, 0.3, 1.4, -2.2)))
}

fn rm_elliptic(_: &mut Ctx) -> Outcome {
    let tau = c(0.0, 50.0);
    let (z, y) = (c(0.3, 0.0), c(0.2, 0.0));
    let cot = |x: C| (x * PI).cos() / (x * PI).sin();
    let a = (tryo!(elliptic_sigma(y, z, tau)) - (cot(z) + cot(y)) * PI).norm();
    let b = (tryo!(elliptic_rho(z, tau)) - cot(z) * PI).norm();
    Outcome::Measured(a.max(b))
}

fn rm_series_constant(ctx: &mut Ctx) -> Outcome {
    let s0 = tryo!(r_trig(&ctx.cw, 0.7, TrigForm::Series(0)));
    Outcome::Measured(s0.dist(&r_plus_ic(&ctx.cw)))
}

fn rm_felder(ctx: &mut Ctx) -> Outcome {
    let phi = random_phi_plus(&mut ctx.rng, &ctx.cw, 0.3, 0.5);
    let eps = [-2.0, -4.0, -6.0, -8.0, -10.0, -12.0];
    let mut dev = Vec::new();
    for e in eps {
        dev.push(tryo!(limit_deviation(&ctx.cw, &phi, 1.1, e, 1)));
    }
    if !dev.windows(2).all(|w| w[1] < w[0]) {
        return Outcome::Error(format!("deviation not strictly decreasing: {dev:?}"));
    }
    if decay_rate(&eps, &dev) <= 0.0 {
        return Outcome::Error("fitted decay rate not positive".into());
    }
    Outcome::Measured(dev[5])
}

// ---- brackets ----

fn bracket_pistar(ctx: &mut Ctx) -> Outcome {
    if let Some(s) = heavy(ctx) {
        return s;
    }
    let (n, nc) = (ctx.cw.n, ctx.cfg.cutoff.min(4));
    let basis = AffineBasis::new(&ctx.cw, nc);
    let g = random_gstar(&mut ctx.rng, n, 1, 2, 0.4);
    let dag = tryo!(g.adjoint().inverse()).cleaned();
    let mut worst = 0.0f64;
    for v in [PiStarVariant::Star, PiStarVariant::Op, PiStarVariant::L, PiStarVariant::R] {
        for (pair, f, h) in [
            (PairKind::UU, Shape::Upsilon, Shape::Upsilon),
            (PairKind::DD, Shape::UpsilonDagInv, Shape::UpsilonDagInv),
            (PairKind::DU, Shape::UpsilonDagInv, Shape::Upsilon),
        ] {
            let pick = |s| if s == Shape::Upsilon { g.clone() } else { dag.clone() };
            let b = tryo!(pistar_bracket(&basis, v, f, h, &g, None));
            let args = ExchangeArgs { first: pick(f), second: pick(h), phi: vec![], eps_k: None };
            let cl = tryo!(exchange_field(&ctx.cw, ExchangeKind::PiStar(v, pair), &args, nc));
            worst = worst.max(rel(&b, &cl, nc - 2));
        }
    }
    Outcome::Measured(worst)
}

fn bracket_groupoid(ctx: &mut Ctx) -> Outcome {
    if let Some(s) = heavy(ctx) {
        return s;
    }
    let (n, nc) = (ctx.cw.n, ctx.cfg.cutoff.min(3));
    let basis = AffineBasis::new(&ctx.cw, nc);
    let g = random_gstar(&mut ctx.rng, n, 1, 1, 0.4);
    let a = tryo!(pistar_bracket(&basis, PiStarVariant::Star, Shape::Upsilon, Shape::Upsilon, &g, None));
    let b = tryo!(pistar_bracket_via_groupoid(&basis, PiStarVariant::Star, Shape::Upsilon, Shape::Upsilon, &g, Fd::default(), None));
    Outcome::Measured(rel(&b, &a, nc - 1))
}

fn current(ctx: &mut Ctx, obs: MatrixObservable, kind: ExchangeKind) -> Outcome {
    if let Some(s) = heavy(ctx) {
        return s;
    }
    let (n, nc) = (ctx.cw.n, ctx.cfg.cutoff.min(4));
    let basis = AffineBasis::new(&ctx.cw, nc);
    let k = random_gr(&mut ctx.rng, n, 1, 1, 0.3).mul(&random_gstar(&mut ctx.rng, n, 1, 1, 0.3));
    let b = tryo!(bivector_bracket(&BivectorSpec::pi_d_infty(nc), &basis, &obs, &obs, &k, DerivativePolicy::default(), None));
    let x = tryo!(obs.eval(&k)).cleaned();
    let args = ExchangeArgs { first: x.clone(), second: x, phi: vec![], eps_k: None };
    let cl = tryo!(exchange_field(&ctx.cw, kind, &args, nc));
    Outcome::Measured(rel(&b, &cl, nc - 2))
}

fn bracket_current_left(ctx: &mut Ctx) -> Outcome {
    current(ctx, MatrixObservable::left_current(), ExchangeKind::CurrentL)
}

fn bracket_current_right(ctx: &mut Ctx) -> Outcome {
    current(ctx, MatrixObservable::right_current(), ExchangeKind::CurrentR)
}

fn chiral(ctx: &mut Ctx, f: ChiralObs, g: ChiralObs, kind: ExchangeKind) -> Outcome {
    if let Some(s) = heavy(ctx) {
        return s;
    }
    let (n, nc) = (ctx.cw.n, ctx.cfg.cutoff.min(3));
    let basis = AffineBasis::new(&ctx.cw, nc);
    let k = random_gr(&mut ctx.rng, n, 1, 1, 0.3);
    let phi = random_phi_plus(&mut ctx.rng, &ctx.cw, 0.3, 0.5);
    let a = a_matrix(&ctx.cw, &phi);
    let b = tryo!(chiral_bracket(&basis, f, g, &k, &phi, true, Fd::default(), None));
    let args = ExchangeArgs { first: tryo!(f.eval(&k, &a)).cleaned(), second: tryo!(g.eval(&k, &a)).cleaned(), phi, eps_k: None };
    let cl = tryo!(exchange_field(&ctx.cw, kind, &args, nc));
    let d = window_deviation(&b, &cl, nc - 1, 1.0);
    // A vanishing reference reports the absolute deviation.
    Outcome::Measured(if cl.max_abs() == 0.0 { d.abs } else { d.rel })
}

fn chiral_a_ka(ctx: &mut Ctx) -> Outcome {
    chiral(ctx, ChiralObs::A, ChiralObs::KA, ExchangeKind::ChiralAKa)
}
fn chiral_ka_ka(ctx: &mut Ctx) -> Outcome {
    chiral(ctx, ChiralObs::KA, ChiralObs::KA, ExchangeKind::ChiralKaKa)
}
fn chiral_dd(ctx: &mut Ctx) -> Outcome {
    chiral(ctx, ChiralObs::KADagInv, ChiralObs::KADagInv, ExchangeKind::ChiralDD)
}
fn chiral_ka_d(ctx: &mut Ctx) -> Outcome {
    chiral(ctx, ChiralObs::KA, ChiralObs::KADagInv, ExchangeKind::ChiralKaD)
}
fn chiral_k_lambda(ctx: &mut Ctx) -> Outcome {
    chiral(ctx, ChiralObs::K, ChiralObs::LambdaL, ExchangeKind::KLambda)
}
fn chiral_a_lambda(ctx: &mut Ctx) -> Outcome {
    chiral(ctx, ChiralObs::A, ChiralObs::LambdaL, ExchangeKind::ALambda)
}
fn chiral_lambda_lambda(ctx: &mut Ctx) -> Outcome {
    chiral(ctx, ChiralObs::LambdaL, ChiralObs::LambdaL, ExchangeKind::LambdaLambda)
}

fn bracket_leibniz(ctx: &mut Ctx) -> Outcome {
    // Brackets of products of constant matrices against the direct product rule.
    let n = ctx.cw.n;
    let m: Vec<Mat> = (0..4).map(|_| random_complex_matrix(&mut ctx.rng, n)).collect();
    let t: Vec<TensorOperator> = (0..4).map(|_| TensorOperator { n, m: random_complex_matrix(&mut ctx.rng, n * n) }).collect();
    let br = PairBrackets { bc: t[0].clone(), bd: t[1].clone(), ac: t[2].clone(), ad: t[3].clone() };
    let got = tryo!(leibniz_combine(&br, &m[0], &m[1], &m[2], &m[3]));
    let (a, b, cm, d) = (&m[0], &m[1], &m[2], &m[3]);
    let e = linalg::eye(n);
    let k = |x: &Mat, y: &Mat| TensorOperator::kron(x, y);
    let want = &(&(&(&(&k(a, &e) * &br.bc) * &k(&e, d)) + &(&(&k(a, cm) * &br.bd) * &k(&e, &e)))
        + &(&(&k(&e, &e) * &br.ac) * &k(b, d)))
        + &(&(&k(&e, cm) * &br.ad) * &k(b, &e));
    Outcome::Measured(got.dist(&want) / want.max_abs().max(1.0))
}

// ---- forms ----

fn double_curve(
    cw: &CartanWeylBasis,
    kl: &LoopElement,
    phi: &[f64],
    kr: &LoopElement,
    zl: &LoopElement,
    zr: &LoopElement,
    dp: &[f64],
) -> DoubleCurve<'static> {
    let (cw, kl, phi, kr, zl, zr, dp) = (cw.clone(), kl.clone(), phi.to_vec(), kr.clone(), zl.clone(), zr.clone(), dp.to_vec());
    Box::new(move |h| {
        let p: Vec<f64> = phi.iter().zip(&dp).map(|(a, b)| a + h * b).collect();
        compose_phi(&kl.mul(&loop_exp(&zl, h)), &a_from_phi(&cw, &p), &kr.mul(&loop_exp(&zr, h)))
    })
}

/// |φ^*ω_S - (Ω_∞(k_l, a) - Ω_∞(k_r, a))| at (k_l, a, k_r) for one random tangent pair.
pub fn chiral_split_defect(
    cw: &CartanWeylBasis,
    kl: &LoopElement,
    phi: &[f64],
    kr: &LoopElement,
    rng: &mut ChaCha8Rng,
) -> loopfactor_core::Result<f64> {
    let basis = AffineBasis::new(cw, 2);
    let mut tangent = || (random_lie_gr(rng, &basis, 1, 1.0), random_lie_gr(rng, &basis, 1, 1.0), random_vec(rng, cw.rank));
    let (zl1, zr1, d1) = tangent();
    let (zl2, zr2, d2) = tangent();
    let fd = Fd::default();
    let ws = omega_s_eval(&double_curve(cw, kl, phi, kr, &zl1, &zr1, &d1), &double_curve(cw, kl, phi, kr, &zl2, &zr2, &d2), fd)?;
    let ol = omega_infty_eval(cw, &chiral_curve(kl, phi, &zl1, &d1), &chiral_curve(kl, phi, &zl2, &d2), fd)?;
    let or = omega_infty_eval(cw, &chiral_curve(kr, phi, &zr1, &d1), &chiral_curve(kr, phi, &zr2, &d2), fd)?;
    Ok((ws - (ol - or)).abs())
}

/// |U^*Ω̃_∞ + Ω_∞| at (k, a) for one random tangent pair.
pub fn duality_form_defect(cw: &CartanWeylBasis, k: &LoopElement, phi: &[f64], rng: &mut ChaCha8Rng) -> loopfactor_core::Result<f64> {
    let basis = AffineBasis::new(cw, 2);
    let pushed = |z: &LoopElement, dp: &[f64]| -> ChiralCurve<'static> {
        let (z, dp, k, phi, cw) = (z.clone(), dp.to_vec(), k.clone(), phi.to_vec(), cw.clone());
        Box::new(move |h| {
            let p: Vec<f64> = phi.iter().zip(&dp).map(|(a, b)| a + h * b).collect();
            let ka = k.mul(&loop_exp(&z, h)).rmul_mat(&a_matrix(&cw, &p));
            Ok((xi_r(&ka)?.inverse()?, p.iter().map(|x| -x).collect()))
        })
    };
    let (z1, z2) = (random_lie_gr(rng, &basis, 1, 1.0), random_lie_gr(rng, &basis, 1, 1.0));
    let (d1, d2) = (random_vec(rng, cw.rank), random_vec(rng, cw.rank));
    let fd = Fd::default();
    let o = omega_infty_eval(cw, &chiral_curve(k, phi, &z1, &d1), &chiral_curve(k, phi, &z2, &d2), fd)?;
    let od = omega_dual_eval(cw, &pushed(&z1, &d1), &pushed(&z2, &d2), fd)?;
    Ok((od + o).abs())
}

fn forms_split(ctx: &mut Ctx) -> Outcome {
    if let Some(s) = heavy(ctx) {
        return s;
    }
    let n = ctx.cw.n;
    let kl = random_gr(&mut ctx.rng, n, 1, 1, 0.3);
    let kr = random_gr(&mut ctx.rng, n, 1, 1, 0.3);
    let phi = random_phi_plus(&mut ctx.rng, &ctx.cw, 0.3, 0.5);
    Outcome::Measured(tryo!(chiral_split_defect(&ctx.cw, &kl, &phi, &kr, &mut ctx.rng)))
}

fn forms_duality(ctx: &mut Ctx) -> Outcome {
    if let Some(s) = heavy(ctx) {
        return s;
    }
    let k = random_gr(&mut ctx.rng, ctx.cw.n, 1, 1, 0.3);
    let phi = random_phi_plus(&mut ctx.rng, &ctx.cw, 0.3, 0.5);
    Outcome::Measured(tryo!(duality_form_defect(&ctx.cw, &k, &phi, &mut ctx.rng)))
}

fn forms_contraction(ctx: &mut Ctx) -> Outcome {
    if let Some(s) = heavy(ctx) {
        return s;
    }
    let cw = &ctx.cw;
    let basis = AffineBasis::new(cw, 2);
    let k = random_gr(&mut ctx.rng, cw.n, 1, 1, 0.3);
    let phi = random_phi_plus(&mut ctx.rng, cw, 0.3, 0.5);
    let z = random_lie_gr(&mut ctx.rng, &basis, 1, 1.0);
    let dp = random_vec(&mut ctx.rng, cw.rank);
    let zero = vec![0.0; cw.rank];
    let mut worst = 0.0f64;
    for mu in 0..cw.rank {
        let t = LoopElement::constant(&cw.h[mu] * c(0.0, 1.0));
        let o = tryo!(omega_infty_eval(cw, &chiral_curve(&k, &phi, &z, &dp), &chiral_curve(&k, &phi, &t, &zero), Fd::default()));
        worst = worst.max((o - dp[mu]).abs());
    }
    Outcome::Measured(worst)
}

fn forms_symplectic(ctx: &mut Ctx) -> Outcome {
    let basis = AffineBasis::new(&ctx.cw, ctx.cfg.cutoff);
    let phi = random_phi_plus(&mut ctx.rng, &ctx.cw, 0.2, 0.6);
    let p = tryo!(pi_infty_matrix(&basis, &phi));
    let w = tryo!(omega_infty_matrix(&basis, &phi));
    Outcome::Measured(linalg::max_abs(&(&p * &w - linalg::eye(p.nrows()))))
}

fn moment_point(ctx: &mut Ctx) -> (AffineBasis, LoopElement) {
    let n = ctx.cw.n;
    let basis = AffineBasis::new(&ctx.cw, ctx.cfg.cutoff.min(3));
    let k = random_gr(&mut ctx.rng, n, 1, 1, 0.3).mul(&random_gstar(&mut ctx.rng, n, 1, 1, 0.3));
    (basis, k)
}

fn forms_moment_left(ctx: &mut Ctx) -> Outcome {
    if let Some(s) = heavy(ctx) {
        return s;
    }
    let (basis, k) = moment_point(ctx);
    let f = tryo!(moment_field_left(&basis, &k, Fd::default()));
    Outcome::Measured(f.deviation / f.scale.max(1.0))
}

fn forms_moment_right(ctx: &mut Ctx) -> Outcome {
    if let Some(s) = heavy(ctx) {
        return s;
    }
    let (basis, k) = moment_point(ctx);
    let f = tryo!(moment_field_right(&basis, &k, Fd::default(), basis.cutoff - 1));
    Outcome::Measured(f.deviation / f.scale.max(1.0))
}

// ---- dynamics ----

fn chiral_point(ctx: &mut Ctx) -> loopfactor_core::Result<ChiralPoint> {
    let k = random_gr(&mut ctx.rng, ctx.cw.n, 2, 2, 0.4);
    let phi = random_phi_plus(&mut ctx.rng, &ctx.cw, 0.3, 0.5);
    ChiralPoint::new(&ctx.cw, k, phi)
}

fn dyn_duality(ctx: &mut Ctx) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let p = tryo!(chiral_point(ctx));
        let d = tryo!(duality_u(&ctx.cw, &p));
        let q = tryo!(duality_v(&ctx.cw, &d));
        let d2 = tryo!(duality_u(&ctx.cw, &q));
        worst = worst.max(q.k.dist(&p.k)).max(d2.k().dist(d.k()));
    }
    Outcome::Measured(worst)
}

fn dyn_group_law(ctx: &mut Ctx) -> Outcome {
    let p = tryo!(chiral_point(ctx));
    let d = tryo!(duality_u(&ctx.cw, &p));
    let a = tryo!(evolve_infty(&ctx.cw, &tryo!(evolve_infty(&ctx.cw, &d, 0.7)), 1.1));
    let b = tryo!(evolve_infty(&ctx.cw, &d, 1.8));
    let full = tryo!(evolve_infty(&ctx.cw, &d, 2.0 * PI));
    let m = MonodromicField { k: random_gl(&mut ctx.rng, ctx.cw.n, 1), a: vec![0.1; ctx.cw.rank] };
    let x = evolve_q(&ctx.cw, &evolve_q(&ctx.cw, &m, 0.4), -1.3);
    let y = evolve_q(&ctx.cw, &m, -0.9);
    Outcome::Measured(a.k().dist(b.k()).max(full.k().dist(d.k())).max(x.k.dist(&y.k)))
}

fn dyn_certificate(ctx: &mut Ctx) -> Outcome {
    let p = tryo!(chiral_point(ctx));
    let d = tryo!(duality_u(&ctx.cw, &p));
    let mut worst = 0.0f64;
    for j in 0..16 {
        let e = tryo!(evolve_infty(&ctx.cw, &d, 2.0 * PI * j as f64 / 16.0));
        let cert = e.certificate();
        if !cert.valid {
            return Outcome::Error(format!("certificate lost at step {j}"));
        }
        worst = worst.max(cert.residual);
    }
    Outcome::Measured(worst)
}

fn dyn_exchange_invariance(ctx: &mut Ctx) -> Outcome {
    let cw = ctx.cw.clone();
    let p = tryo!(chiral_point(ctx));
    let d = tryo!(duality_u(&cw, &p));
    let phi = p.a.phi.clone();
    let kk = |k: &LoopElement, s: f64, sp: f64| {
        let args = ExchangeArgs { first: k.clone(), second: k.clone(), phi: phi.clone(), eps_k: None };
        exchange_rhs(&cw, ExchangeKind::DualKK, &args, s, sp, TrigForm::Closed)
    };
    let ak = |k: &LoopElement, s: f64, sp: f64| {
        let args = ExchangeArgs { first: LoopElement::constant(p.a_mat(&cw)), second: k.clone(), phi: phi.clone(), eps_k: None };
        exchange_rhs(&cw, ExchangeKind::DualAK, &args, s, sp, TrigForm::Closed)
    };
    let mut worst = 0.0f64;
    for j in 0..8 {
        let tau = 2.0 * PI * j as f64 / 8.0;
        let e = tryo!(evolve_infty(&cw, &d, tau));
        worst = worst.max(tryo!(kk(d.k(), 0.4, 1.9)).dist(&tryo!(kk(e.k(), 0.4 + tau, 1.9 + tau))));
        worst = worst.max(tryo!(ak(d.k(), 0.4, 1.9)).dist(&tryo!(ak(e.k(), 0.4, 1.9 + tau))));
    }
    Outcome::Measured(worst)
}

fn monodromic(ctx: &mut Ctx) -> loopfactor_core::Result<MonodromicField> {
    let k = random_gl(&mut ctx.rng, ctx.cw.n, 1);
    let a: Vec<f64> = (0..ctx.cw.rank).map(|mu| 0.1 + 0.07 * mu as f64).collect();
    MonodromicField::new(&ctx.cw, k, a)
}

fn dyn_monodromic(ctx: &mut Ctx) -> Outcome {
    let m = tryo!(monodromic(ctx));
    let cw = ctx.cw.clone();
    let back = tryo!(monodromic_convert(&cw, |s| m.eval(&cw, s), &m.a, 64, ctx.cfg.tol_trunc.max(1e-12)));
    Outcome::Measured(back.k.dist(&m.k))
}

fn dyn_quasi_periodic(ctx: &mut Ctx) -> Outcome {
    let m = tryo!(monodromic(ctx));
    let e = evolve_q(&ctx.cw, &m, 0.83);
    let mut worst = tryo!(m.quasi_periodicity_defect(&ctx.cw, 32));
    for s in [0.0, 1.0, 4.0] {
        worst = worst.max(linalg::max_abs(&(e.eval(&ctx.cw, s) - m.eval(&ctx.cw, s - 0.83))));
    }
    Outcome::Measured(worst)
}

fn dyn_finite_q(ctx: &mut Ctx) -> Outcome {
    let cw = &ctx.cw;
    let k = random_gl(&mut ctx.rng, cw.n, 1);
    let phi = random_phi_plus(&mut ctx.rng, cw, 0.3, 0.5);
    let eps = -12.0;
    let args = |e| ExchangeArgs { first: k.clone(), second: k.clone(), phi: phi.clone(), eps_k: e };
    let dual = tryo!(exchange_rhs(cw, ExchangeKind::DualKK, &args(None), 0.4, 1.9, TrigForm::Closed));
    let fin = tryo!(exchange_rhs(cw, ExchangeKind::FiniteKK, &args(Some((eps, 1))), 0.4, 1.9, TrigForm::Closed));
    Outcome::Measured(fin.scale(c(1.0 / eps, 0.0)).dist(&dual))
}

/// The suite, sorted by name.
pub fn registry() -> Vec<Check> {
    use Class::*;
    let mut v = vec![
        Check { name: "brackets.current_left", class: Fd, factor: 1.0, run: bracket_current_left },
        Check { name: "brackets.current_right", class: Fd, factor: 1.0, run: bracket_current_right },
        Check { name: "brackets.chiral_a_ka", class: Fd, factor: 1.0, run: chiral_a_ka },
        Check { name: "brackets.chiral_a_lambda", class: Fd, factor: 1.0, run: chiral_a_lambda },
        Check { name: "brackets.chiral_ka_d", class: Fd, factor: 1.0, run: chiral_ka_d },
        Check { name: "brackets.chiral_ka_ka", class: Fd, factor: 1.0, run: chiral_ka_ka },
        Check { name: "brackets.chiral_d_d", class: Fd, factor: 1.0, run: chiral_dd },
        Check { name: "brackets.chiral_k_lambda", class: Fd, factor: 1.0, run: chiral_k_lambda },
        Check { name: "brackets.chiral_lambda_lambda", class: Fd, factor: 1.0, run: chiral_lambda_lambda },
        Check { name: "brackets.groupoid_route", class: Fd, factor: 1.0, run: bracket_groupoid },
        Check { name: "brackets.leibniz", class: Alg, factor: 0.01, run: bracket_leibniz },
        Check { name: "brackets.pistar_closed_forms", class: Alg, factor: 10.0, run: bracket_pistar },
        Check { name: "dynamics.certificate_along_flow", class: Alg, factor: 10.0, run: dyn_certificate },
        Check { name: "dynamics.duality_round_trip", class: Alg, factor: 10.0, run: dyn_duality },
        Check { name: "dynamics.exchange_invariance", class: Alg, factor: 1.0, run: dyn_exchange_invariance },
        Check { name: "dynamics.finite_q_limit", class: Alg, factor: 1e5, run: dyn_finite_q },
        Check { name: "dynamics.group_law", class: Alg, factor: 0.01, run: dyn_group_law },
        Check { name: "dynamics.monodromic_round_trip", class: Alg, factor: 1.0, run: dyn_monodromic },
        Check { name: "dynamics.quasi_periodicity", class: Alg, factor: 1.0, run: dyn_quasi_periodic },
        Check { name: "factorization.grid_uniqueness", class: Alg, factor: 1.0, run: fact_grid_uniqueness },
        Check { name: "factorization.gr_gstar_round_trip", class: Alg, factor: 100.0, run: fact_gr_gstar },
        Check { name: "factorization.gstar_gl_round_trip", class: Alg, factor: 100.0, run: fact_gstar_gl },
        Check { name: "factorization.infty_cartan_round_trip", class: Alg, factor: 1000.0, run: fact_infty_cartan },
        Check { name: "factorization.iwasawa", class: Alg, factor: 0.1, run: fact_iwasawa },
        Check { name: "factorization.lambda_of_composed", class: Alg, factor: 100.0, run: fact_lambda_composed },
        Check { name: "factorization.spectral_factor", class: Alg, factor: 1.0, run: fact_spectral },
        Check { name: "factorization.xi_of_composed", class: Alg, factor: 100.0, run: fact_xi_composed },
        Check { name: "forms.chiral_split", class: Fd, factor: 1.0, run: forms_split },
        Check { name: "forms.contraction_dphi", class: Fd, factor: 1.0, run: forms_contraction },
        Check { name: "forms.duality_reverses", class: Fd, factor: 1.0, run: forms_duality },
        Check { name: "forms.moment_field_left", class: Fd, factor: 10.0, run: forms_moment_left },
        Check { name: "forms.moment_field_right", class: Fd, factor: 10.0, run: forms_moment_right },
        Check { name: "forms.symplectic_inverse", class: Alg, factor: 0.01, run: forms_symplectic },
        Check { name: "lie_core.cartan_weyl", class: Alg, factor: 0.01, run: lie_cartan_weyl },
        Check { name: "lie_core.casimir_projection", class: Alg, factor: 0.01, run: lie_casimir },
        Check { name: "lie_core.killing_root_pairing", class: Alg, factor: 0.01, run: lie_killing },
        Check { name: "loop_algebra.gram_t_tl", class: Alg, factor: 0.01, run: loop_gram_tl },
        Check { name: "loop_algebra.gram_t_tr", class: Alg, factor: 0.01, run: loop_gram_tr },
        Check { name: "loop_algebra.inverse_round_trip", class: Alg, factor: 1.0, run: loop_inverse },
        Check { name: "loop_algebra.isotropy", class: Alg, factor: 0.01, run: loop_isotropy },
        Check { name: "loop_algebra.kappa_multiplicative", class: Alg, factor: 1.0, run: loop_kappa },
        Check { name: "loop_algebra.projectors", class: Alg, factor: 0.1, run: loop_projectors },
        Check { name: "rmatrix.cybe_trig", class: Alg, factor: 0.01, run: rm_cybe },
        Check { name: "rmatrix.elliptic_degeneration", class: Alg, factor: 0.001, run: rm_elliptic },
        Check { name: "rmatrix.felder_limit", class: Alg, factor: 1e4, run: rm_felder },
        Check { name: "rmatrix.series_constant_term", class: Alg, factor: 0.01, run: rm_series_constant },
        Check { name: "rmatrix.swap_antisymmetry", class: Alg, factor: 0.01, run: rm_swap },
    ];
    v.sort_by_key(|c| c.name);
    v
}
