#![allow(dead_code)]

use loopfactor_core::brackets::{window_deviation, Field2};
use loopfactor_core::lie_core::{canonical_r_tensor, casimir_tensor};
use loopfactor_core::{AffineBasis, CartanWeylBasis, LoopElement, TensorOperator, C};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rel(a: &Field2, b: &Field2, w: i64) -> f64 {
    window_deviation(a, b, w, 1.0).rel
}

pub fn r_plus_ic(cw: &CartanWeylBasis) -> TensorOperator {
    &canonical_r_tensor(cw) + &casimir_tensor(cw).scale(C::new(0.0, 1.0))
}

/// Random element of Lie(G_R) spanned by the truncated T_R family up to mode `deg`.
pub fn random_lie_gr(rng: &mut ChaCha8Rng, basis: &AffineBasis, deg: i64, amp: f64) -> LoopElement {
    let mut x = LoopElement::zero(basis.n());
    for e in basis.entries.iter().filter(|e| e.label.mode() <= deg) {
        x = x.add(&e.tr.scale_re(amp * (rng.gen::<f64>() - 0.5)));
    }
    x
}

/// Random element of Lie(G_L) spanned by the truncated T_L family up to mode `deg`.
pub fn random_lie_gl(rng: &mut ChaCha8Rng, basis: &AffineBasis, deg: i64, amp: f64) -> LoopElement {
    let mut x = LoopElement::zero(basis.n());
    for e in basis.entries.iter().filter(|e| e.label.mode() <= deg) {
        x = x.add(&e.tl.scale_re(amp * (rng.gen::<f64>() - 0.5)));
    }
    x
}

pub fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen::<f64>() - 0.5).collect()
}
