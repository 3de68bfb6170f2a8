//! Seeded random group and algebra elements for tests and the verification suite.

use crate::factorization::diag_mat;
use crate::lie_core::CartanWeylBasis;
use crate::linalg::{self, c, Mat};
use crate::loop_algebra::LoopElement;
use alloc::vec::Vec;
use rand::Rng;

fn u<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen::<f64>() * 2.0 - 1.0
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    Mat::from_fn(n, n, |_, _| c(u(rng), u(rng)))
}

/// Random traceless matrix in sl(n, C).
pub fn random_sl<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    let mut m = random_complex_matrix(rng, n);
    let tr = m.trace() / n as f64;
    for i in 0..n {
        m[(i, i)] -= tr;
    }
    m
}

/// Random element of su(n).
pub fn random_su_algebra<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    let m = random_sl(rng, n);
    (&m - m.adjoint()) * c(0.5, 0.0)
}

/// Random element of SU(n).
pub fn random_su<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    let (mut q, _) = linalg::qr_positive(&random_complex_matrix(rng, n));
    let ph = linalg::det(&q).arg();
    for i in 0..n {
        q[(i, 0)] *= c(libm::cos(ph), -libm::sin(ph));
    }
    q
}

/// Random upper-triangular matrix with positive diagonal and det 1.
pub fn random_an<R: Rng + ?Sized>(rng: &mut R, n: usize, amp: f64) -> Mat {
    let mut m = linalg::zeros(n);
    let mut logs: Vec<f64> = (0..n).map(|_| amp * u(rng)).collect();
    let mean = logs.iter().sum::<f64>() / n as f64;
    for l in logs.iter_mut() {
        *l -= mean;
    }
    for i in 0..n {
        m[(i, i)] = c(libm::exp(logs[i]), 0.0);
        for j in (i + 1)..n {
            m[(i, j)] = c(amp * u(rng), amp * u(rng));
        }
    }
    m
}

/// I + x E_ij z^m with i ≠ j: det 1 and polynomial inverse I - x E_ij z^{-m}... z^m.
fn unipotent(n: usize, i: usize, j: usize, x: crate::linalg::C, m: i64) -> LoopElement {
    let mut e = linalg::zeros(n);
    e[(i, j)] = x;
    LoopElement::constant(linalg::eye(n)).add(&LoopElement::monomial(e, m))
}

fn random_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (usize, usize) {
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// Random G* element: constant AN part times `factors` unipotent factors with modes in 1..=deg.
pub fn random_gstar<R: Rng + ?Sized>(rng: &mut R, n: usize, deg: i64, factors: usize, amp: f64) -> LoopElement {
    let mut g = LoopElement::constant(random_an(rng, n, amp));
    for _ in 0..factors {
        let (i, j) = random_pair(rng, n);
        let m = rng.gen_range(1..=deg.max(1));
        g = g.mul(&unipotent(n, i, j, c(amp * u(rng), amp * u(rng)), m));
    }
    g
}

/// Random G_R element: constant SU(n) times unipotent factors with modes in -deg..=-1.
pub fn random_gr<R: Rng + ?Sized>(rng: &mut R, n: usize, deg: i64, factors: usize, amp: f64) -> LoopElement {
    let mut g = LoopElement::constant(random_su(rng, n));
    for _ in 0..factors {
        let (i, j) = random_pair(rng, n);
        let m = rng.gen_range(1..=deg.max(1));
        g = g.mul(&unipotent(n, i, j, c(amp * u(rng), amp * u(rng)), -m));
    }
    g
}

/// Random polynomial unitary loop: SU(n) constant times factors (P z + 1 - P)(Q z^{-1} + 1 - Q)
/// with rank-one projections P, Q.
pub fn random_gl<R: Rng + ?Sized>(rng: &mut R, n: usize, factors: usize) -> LoopElement {
    let mut g = LoopElement::constant(random_su(rng, n));
    for _ in 0..factors {
        let p = random_projection(rng, n);
        let q = random_projection(rng, n);
        let one = linalg::eye(n);
        let fp = LoopElement::from_pairs(n, &[(1, p.clone()), (0, &one - &p)]);
        let fq = LoopElement::from_pairs(n, &[(-1, q.clone()), (0, &one - &q)]);
        g = g.mul(&fp).mul(&fq);
    }
    g
}

pub fn random_projection<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    let v = Mat::from_fn(n, 1, |_, _| c(u(rng), u(rng)));
    let nv = linalg::fro(&v);
    let v = v / c(nv, 0.0);
    &v * v.adjoint()
}

/// Random diagonal a ∈ A_+ (det 1) with consecutive log-gaps in [gap, gap + spread].
pub fn random_a_plus<R: Rng + ?Sized>(rng: &mut R, n: usize, gap: f64, spread: f64) -> Vec<f64> {
    let mut logs = Vec::with_capacity(n);
    let mut x = 0.0;
    for _ in 0..n {
        logs.push(x);
        x -= gap + spread * rng.gen::<f64>();
    }
    let mean = logs.iter().sum::<f64>() / n as f64;
    logs.iter().map(|l| libm::exp(l - mean)).collect()
}

/// Cartan coordinates φ of a random point of A_+.
pub fn random_phi_plus<R: Rng + ?Sized>(rng: &mut R, cw: &CartanWeylBasis, gap: f64, spread: f64) -> Vec<f64> {
    let a = random_a_plus(rng, cw.n, gap, spread);
    let logs: Vec<f64> = a.iter().map(|x| libm::log(*x)).collect();
    cw.cartan_coords(&logs)
}

pub fn a_from_phi(cw: &CartanWeylBasis, phi: &[f64]) -> Vec<f64> {
    cw.cartan_diag(phi).iter().map(|x| libm::exp(*x)).collect()
}

pub fn a_matrix(cw: &CartanWeylBasis, phi: &[f64]) -> Mat {
    diag_mat(&a_from_phi(cw, phi))
}

/// Random loop in Lie(D) with |modes| ≤ deg.
pub fn random_algebra_loop<R: Rng + ?Sized>(rng: &mut R, n: usize, deg: i64, amp: f64) -> LoopElement {
    let pairs: Vec<(i64, Mat)> = (-deg..=deg).map(|k| (k, random_sl(rng, n) * c(amp, 0.0))).collect();
    LoopElement::from_pairs(n, &pairs)
}

/// Random loop in Lie(L_pol K) with |modes| ≤ deg.
pub fn random_gl_algebra<R: Rng + ?Sized>(rng: &mut R, n: usize, deg: i64, amp: f64) -> LoopElement {
    let x = random_algebra_loop(rng, n, deg, amp);
    x.sub(&x.adjoint()).scale_re(0.5)
}
