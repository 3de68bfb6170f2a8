//! Cartan–Weyl data of su(n) in the defining representation.

use crate::error::{Error, Result};
use crate::linalg::{self, c, Mat, C};
use crate::tensor::TensorOperator;
use alloc::vec::Vec;

/// Root e_i - e_j. Positive iff i < j.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Root {
    pub i: usize,
    pub j: usize,
}

impl Root {
    pub fn is_positive(&self) -> bool {
        self.i < self.j
    }

    pub fn neg(&self) -> Root {
        Root { i: self.j, j: self.i }
    }

    /// |α|², always 2 for su(n) with the trace form.
    pub fn len2(&self) -> f64 {
        2.0
    }
}

#[derive(Clone, Debug)]
pub struct CartanWeylBasis {
    pub n: usize,
    pub rank: usize,
    /// Orthonormal Hermitian Cartan basis, Tr(H^μ H^ν) = δ.
    pub h: Vec<Mat>,
    /// All roots, positive ones first in lexicographic order, then their negatives.
    pub roots: Vec<Root>,
}

pub fn build_cartan_weyl(n: usize) -> Result<CartanWeylBasis> {
    if n < 2 {
        return Err(Error::GroupRank(n));
    }
    let mut h = Vec::with_capacity(n - 1);
    for mu in 1..n {
        let norm = libm::sqrt((mu * (mu + 1)) as f64);
        let mut m = linalg::zeros(n);
        for d in 0..mu {
            m[(d, d)] = c(1.0 / norm, 0.0);
        }
        m[(mu, mu)] = c(-(mu as f64) / norm, 0.0);
        h.push(m);
    }
    let mut pos = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pos.push(Root { i, j });
        }
    }
    let mut roots = pos.clone();
    roots.extend(pos.iter().map(|r| r.neg()));
    Ok(CartanWeylBasis { n, rank: n - 1, h, roots })
}

impl CartanWeylBasis {
    pub fn positive_roots(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(|r| r.is_positive())
    }

    /// Step matrix E^α = e_ij.
    pub fn e(&self, r: Root) -> Mat {
        linalg::unit(self.n, r.i, r.j)
    }

    /// Coroot α∨ = [E^α, E^{-α}] = e_ii - e_jj.
    pub fn coroot(&self, r: Root) -> Mat {
        let mut m = linalg::zeros(self.n);
        m[(r.i, r.i)] = c(1.0, 0.0);
        m[(r.j, r.j)] = c(-1.0, 0.0);
        m
    }

    /// α(H^μ).
    pub fn alpha_h(&self, r: Root, mu: usize) -> f64 {
        self.h[mu][(r.i, r.i)].re - self.h[mu][(r.j, r.j)].re
    }

    /// α(Σ φ^μ H^μ).
    pub fn alpha_phi(&self, r: Root, phi: &[f64]) -> f64 {
        (0..self.rank).map(|mu| phi[mu] * self.alpha_h(r, mu)).sum()
    }

    /// Σ φ^μ H^μ.
    pub fn cartan_element(&self, phi: &[f64]) -> Mat {
        let mut m = linalg::zeros(self.n);
        for mu in 0..self.rank {
            m += &self.h[mu] * c(phi[mu], 0.0);
        }
        m
    }

    /// Diagonal entries of Σ φ^μ H^μ.
    pub fn cartan_diag(&self, phi: &[f64]) -> Vec<f64> {
        let m = self.cartan_element(phi);
        (0..self.n).map(|d| m[(d, d)].re).collect()
    }

    /// φ^μ = Tr(H^μ D) for a real traceless diagonal D.
    pub fn cartan_coords(&self, diag: &[f64]) -> Vec<f64> {
        (0..self.rank)
            .map(|mu| (0..self.n).map(|d| self.h[mu][(d, d)].re * diag[d]).sum())
            .collect()
    }
}

/// Algebra a LieElement is declared to live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraTag {
    Compact,
    Complexified,
    An,
    Cartan,
}

#[derive(Clone, Debug)]
pub struct LieElement {
    pub mat: Mat,
    pub tag: AlgebraTag,
}

impl LieElement {
    pub fn new(mat: Mat, tag: AlgebraTag) -> Self {
        LieElement { mat, tag }
    }

    /// Largest violation of the invariants implied by the tag.
    pub fn tag_defect(&self) -> f64 {
        let m = &self.mat;
        let n = m.nrows();
        let tr = linalg::trace(m).norm();
        match self.tag {
            AlgebraTag::Complexified => tr,
            AlgebraTag::Compact => tr.max(linalg::max_abs(&(m + m.adjoint()))),
            AlgebraTag::An => {
                let mut d = tr;
                for i in 0..n {
                    d = d.max(m[(i, i)].im.abs());
                    for j in 0..i {
                        d = d.max(m[(i, j)].norm());
                    }
                }
                d
            }
            AlgebraTag::Cartan => {
                let mut d = tr.max(linalg::max_abs(&(m - m.adjoint())));
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            d = d.max(m[(i, j)].norm());
                        }
                    }
                }
                d
            }
        }
    }
}

/// (A, B)_K = Tr(AB) in the defining representation.
pub fn pairing_k(a: &LieElement, b: &LieElement) -> Result<C> {
    pairing_k_mat(&a.mat, &b.mat)
}

pub fn pairing_k_mat(a: &Mat, b: &Mat) -> Result<C> {
    if a.nrows() != b.nrows() {
        return Err(Error::InvalidDimension { expected: a.nrows(), found: b.nrows() });
    }
    Ok(linalg::trace(&(a * b)))
}

/// C = Σ H^μ⊗H^μ + Σ_{α>0} (|α|²/2)(E^{-α}⊗E^α + E^α⊗E^{-α}).
pub fn casimir_tensor(b: &CartanWeylBasis) -> TensorOperator {
    let mut t = TensorOperator::zeros(b.n);
    for h in &b.h {
        t.m += linalg::kron(h, h);
    }
    for r in b.positive_roots() {
        let e = b.e(*r);
        let f = b.e(r.neg());
        let w = c(r.len2() / 2.0, 0.0);
        t.m += (linalg::kron(&f, &e) + linalg::kron(&e, &f)) * w;
    }
    t
}

/// r = Σ_{α>0} (i|α|²/2)(E^{-α}⊗E^α - E^α⊗E^{-α}).
pub fn canonical_r_tensor(b: &CartanWeylBasis) -> TensorOperator {
    let mut t = TensorOperator::zeros(b.n);
    for r in b.positive_roots() {
        let e = b.e(*r);
        let f = b.e(r.neg());
        let w = c(0.0, r.len2() / 2.0);
        t.m += (linalg::kron(&f, &e) - linalg::kron(&e, &f)) * w;
    }
    t
}
