//! Chiral phase spaces M_∞ = G_R × A_+ and its dual, the duality pair U/V, the time
//! evolutions and the monodromic representation of the dual chiral field.

use crate::error::{Error, Result};
use crate::factorization::{factor_gr_gstar, xi_l, xi_r};
use crate::lie_core::CartanWeylBasis;
use crate::linalg::{self, c, Mat};
use crate::loop_algebra::{membership, LoopElement, Subgroup};
use crate::rmatrix::{CartanPoint, Chamber};
use crate::sampling::a_matrix;
use alloc::vec::Vec;

/// (k, a) ∈ G_R × A_+.
#[derive(Clone, Debug)]
pub struct ChiralPoint {
    pub k: LoopElement,
    pub a: CartanPoint,
}

impl ChiralPoint {
    pub fn new(cw: &CartanWeylBasis, k: LoopElement, phi: Vec<f64>) -> Result<Self> {
        if k.n() != cw.n {
            return Err(Error::InvalidDimension { expected: cw.n, found: k.n() });
        }
        if !membership(&k, Subgroup::GR).member {
            return Err(Error::InvalidInput("k is not in G_R"));
        }
        let a = CartanPoint::new(cw, phi, Chamber::APlus)?;
        Ok(ChiralPoint { k, a })
    }

    pub fn a_mat(&self, cw: &CartanWeylBasis) -> Mat {
        a_matrix(cw, &self.a.phi)
    }

    /// k(σ)a.
    pub fn ka(&self, cw: &CartanWeylBasis) -> LoopElement {
        self.k.rmul_mat(&self.a_mat(cw))
    }
}

/// Verdict that ã^{-1} k̃^{-1} lies in S_∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainCertificate {
    pub valid: bool,
    /// Reconstruction residual of the G_R·G* splitting (∞ if it failed).
    pub residual: f64,
}

/// (k̃, ã) ∈ G_L × A_- with ã^{-1} k̃^{-1} ∈ S_∞.
#[derive(Clone, Debug)]
pub struct DualChiralPoint {
    k: LoopElement,
    a: CartanPoint,
    certificate: DomainCertificate,
}

impl DualChiralPoint {
    /// Validates k̃ ∈ G_L and ã ∈ A_- and computes the certificate. A point outside M̃_∞ is
    /// still returned, with an invalid certificate.
    pub fn new(cw: &CartanWeylBasis, k: LoopElement, phi: Vec<f64>) -> Result<Self> {
        if k.n() != cw.n {
            return Err(Error::InvalidDimension { expected: cw.n, found: k.n() });
        }
        if !membership(&k, Subgroup::GL).member {
            return Err(Error::InvalidInput("k~ is not in G_L"));
        }
        let a = CartanPoint::new(cw, phi, Chamber::AMinus)?;
        let certificate = certify(cw, &k, &a.phi);
        Ok(DualChiralPoint { k, a, certificate })
    }

    pub fn k(&self) -> &LoopElement {
        &self.k
    }

    pub fn a(&self) -> &CartanPoint {
        &self.a
    }

    pub fn certificate(&self) -> DomainCertificate {
        self.certificate
    }

    /// ã^{-1} k̃^{-1}.
    pub fn groupoid_point(&self, cw: &CartanWeylBasis) -> Result<LoopElement> {
        groupoid_point(cw, &self.k, &self.a.phi)
    }
}

fn groupoid_point(cw: &CartanWeylBasis, k: &LoopElement, phi: &[f64]) -> Result<LoopElement> {
    let ai = linalg::inverse(&a_matrix(cw, phi)).ok_or(Error::NearSingular { min_det: 0.0 })?;
    Ok(k.inverse()?.lmul_mat(&ai))
}

fn certify(cw: &CartanWeylBasis, k: &LoopElement, phi: &[f64]) -> DomainCertificate {
    match groupoid_point(cw, k, phi).and_then(|s| factor_gr_gstar(&s)) {
        Ok(fp) => DomainCertificate { valid: true, residual: fp.residual },
        Err(_) => DomainCertificate { valid: false, residual: f64::INFINITY },
    }
}

/// U(k, a) = (Ξ_R(ka)^{-1}, a^{-1}).
pub fn duality_u(cw: &CartanWeylBasis, p: &ChiralPoint) -> Result<DualChiralPoint> {
    let kt = xi_r(&p.ka(cw))?.inverse()?.cleaned();
    let phi: Vec<f64> = p.a.phi.iter().map(|x| -x).collect();
    DualChiralPoint::new(cw, kt, phi)
}

/// V(k̃, ã) = (Ξ_L(ã^{-1}k̃^{-1})^{-1}, ã^{-1}).
pub fn duality_v(cw: &CartanWeylBasis, p: &DualChiralPoint) -> Result<ChiralPoint> {
    if !p.certificate.valid {
        let s = p.groupoid_point(cw)?;
        let residual = factor_gr_gstar(&s).map(|f| f.residual).unwrap_or(f64::INFINITY);
        return Err(Error::NotInDomain { sigma_ratio: 0.0, residual });
    }
    let k = xi_l(&p.groupoid_point(cw)?)?.inverse()?.cleaned();
    let phi: Vec<f64> = p.a.phi.iter().map(|x| -x).collect();
    ChiralPoint::new(cw, k, phi)
}

/// E_∞(τ): k̃(σ) → k̃(σ - τ), ã fixed; the certificate is recomputed.
pub fn evolve_infty(cw: &CartanWeylBasis, p: &DualChiralPoint, tau: f64) -> Result<DualChiralPoint> {
    let k = p.k.rotated(tau);
    let certificate = certify(cw, &k, &p.a.phi);
    Ok(DualChiralPoint { k, a: p.a.clone(), certificate })
}

/// m(σ) = k̃(σ) exp(-i a^μ H^μ σ), quasi-periodic with monodromy M = exp(-2πi a^μ H^μ).
#[derive(Clone, Debug)]
pub struct MonodromicField {
    pub k: LoopElement,
    /// Alcove coordinates a^μ.
    pub a: Vec<f64>,
}

impl MonodromicField {
    pub fn new(cw: &CartanWeylBasis, k: LoopElement, a: Vec<f64>) -> Result<Self> {
        if a.len() != cw.rank {
            return Err(Error::InvalidDimension { expected: cw.rank, found: a.len() });
        }
        Ok(MonodromicField { k, a })
    }

    fn twist(&self, cw: &CartanWeylBasis, sigma: f64) -> Mat {
        let d = cw.cartan_diag(&self.a);
        let v: Vec<_> = d.iter().map(|x| c(libm::cos(x * sigma), -libm::sin(x * sigma))).collect();
        Mat::from_diagonal(&nalgebra::DVector::from_vec(v))
    }

    /// m(σ) for any real σ.
    pub fn eval(&self, cw: &CartanWeylBasis, sigma: f64) -> Mat {
        self.k.eval(sigma) * self.twist(cw, sigma)
    }

    pub fn monodromy(&self, cw: &CartanWeylBasis) -> Mat {
        self.twist(cw, 2.0 * core::f64::consts::PI)
    }

    /// max_σ |m(σ)^{-1} m(σ + 2π) - M| over `grid` points of one period.
    pub fn quasi_periodicity_defect(&self, cw: &CartanWeylBasis, grid: usize) -> Result<f64> {
        let mm = self.monodromy(cw);
        let tp = 2.0 * core::f64::consts::PI;
        let mut worst = 0.0f64;
        for j in 0..grid {
            let s = tp * j as f64 / grid as f64;
            let mi = linalg::inverse(&self.eval(cw, s)).ok_or(Error::NearSingular { min_det: 0.0 })?;
            worst = worst.max(linalg::max_abs(&(mi * self.eval(cw, s + tp) - &mm)));
        }
        Ok(worst)
    }
}

/// E_q(τ): k̃(σ) → k̃(σ - τ) exp(i a^μ H^μ τ); in monodromic form m(σ) → m(σ - τ).
pub fn evolve_q(cw: &CartanWeylBasis, m: &MonodromicField, tau: f64) -> MonodromicField {
    let d = cw.cartan_diag(&m.a);
    let v: Vec<_> = d.iter().map(|x| c(libm::cos(x * tau), libm::sin(x * tau))).collect();
    let e = Mat::from_diagonal(&nalgebra::DVector::from_vec(v));
    MonodromicField { k: m.k.rotated(tau).rmul_mat(&e), a: m.a.clone() }
}

/// Recovers k̃(σ) = m(σ) exp(i a^μ H^μ σ) from a quasi-periodic field given pointwise, on a
/// grid of `grid` points (a power of two). Fails with `MonodromyMismatch` when
/// m(σ)^{-1} m(σ + 2π) differs from exp(-2πi a^μ H^μ) by more than `tol` on the grid.
pub fn monodromic_convert<F>(cw: &CartanWeylBasis, m: F, a: &[f64], grid: usize, tol: f64) -> Result<MonodromicField>
where
    F: Fn(f64) -> Mat,
{
    if !grid.is_power_of_two() {
        return Err(Error::InvalidInput("grid must be a power of two"));
    }
    let probe = MonodromicField::new(cw, LoopElement::identity(cw.n), a.to_vec())?;
    let mm = probe.monodromy(cw);
    let tp = 2.0 * core::f64::consts::PI;
    let mut samples = Vec::with_capacity(grid);
    let mut defect = 0.0f64;
    for j in 0..grid {
        let s = tp * j as f64 / grid as f64;
        let ms = m(s);
        let mi = linalg::inverse(&ms).ok_or(Error::NearSingular { min_det: 0.0 })?;
        defect = defect.max(linalg::max_abs(&(mi * m(s + tp) - &mm)));
        let tw = linalg::inverse(&probe.twist(cw, s)).ok_or(Error::NearSingular { min_det: 0.0 })?;
        samples.push(ms * tw);
    }
    if defect > tol {
        return Err(Error::MonodromyMismatch { defect });
    }
    let k = LoopElement::from_samples(&samples, -(grid as i64 / 2)).cleaned();
    MonodromicField::new(cw, k, a.to_vec())
}
