//! Trigonometric, dynamical and elliptic dynamical r-matrices.

use crate::error::{Error, Result};
use crate::lie_core::{canonical_r_tensor, casimir_tensor, CartanWeylBasis};
use crate::linalg::{self, c, C};
pub use crate::tensor::TensorOperator;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Guard radius around walls and cot poles.
pub const GUARD: f64 = 1e-8;
const SERIES_TOL: f64 = 1e-15;
const SERIES_MAX_TERMS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chamber {
    APlus,
    AMinus,
}

/// a = exp(φ^μ H^μ).
#[derive(Clone, Debug, PartialEq)]
pub struct CartanPoint {
    pub phi: Vec<f64>,
    pub chamber: Chamber,
}

impl CartanPoint {
    pub fn new(cw: &CartanWeylBasis, phi: Vec<f64>, chamber: Chamber) -> Result<Self> {
        if phi.len() != cw.rank {
            return Err(Error::InvalidDimension { expected: cw.rank, found: phi.len() });
        }
        let p = CartanPoint { phi, chamber };
        if !p.chamber_ok(cw) {
            return Err(Error::InvalidInput("Cartan point outside its declared chamber"));
        }
        Ok(p)
    }

    /// Simple roots e_i - e_{i+1} all positive (A_+) or all negative (A_-) on φ.
    pub fn chamber_ok(&self, cw: &CartanWeylBasis) -> bool {
        (0..cw.n - 1).all(|i| {
            let v = cw.alpha_phi(crate::lie_core::Root { i, j: i + 1 }, &self.phi);
            match self.chamber {
                Chamber::APlus => v > 0.0,
                Chamber::AMinus => v < 0.0,
            }
        })
    }

    /// Finite-q chart: φ^μ = -k ε' a^μ.
    pub fn from_alcove(cw: &CartanWeylBasis, a_alc: &[f64], eps: f64, k: i64) -> Result<Self> {
        let phi = a_alc.iter().map(|x| -(k as f64) * eps * x).collect();
        Self::new(cw, phi, Chamber::APlus)
    }

    pub fn alcove(&self, eps: f64, k: i64) -> Vec<f64> {
        self.phi.iter().map(|p| -p / (k as f64 * eps)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrigForm {
    Closed,
    /// Partial sum with Fourier modes up to N.
    Series(i64),
}

/// r(σ) = r + C cot(σ/2) (closed) or its mode-truncated Fourier series
/// i ΣH⊗H (1 + 2Σ_{n=1}^N e^{-inσ}) + i Σ_{α>0} |α|² E^{-α}⊗E^α + i Σ_α |α|² E^{-α}⊗E^α Σ_{n=1}^N e^{-inσ},
/// which is Σ_i T_L^i(σ)⊗t_i(0) over the truncated dual bases and Abel-sums to the closed form.
pub fn r_trig(cw: &CartanWeylBasis, sigma: f64, form: TrigForm) -> Result<TensorOperator> {
    match form {
        TrigForm::Closed => {
            let s = libm::sin(sigma / 2.0);
            if s.abs() < GUARD {
                return Err(Error::CoincidentPoints);
            }
            let cot = libm::cos(sigma / 2.0) / s;
            let r = canonical_r_tensor(cw);
            let cc = casimir_tensor(cw);
            Ok(&r + &cc.scale(c(cot, 0.0)))
        }
        TrigForm::Series(nmax) => {
            let mut geo = C::new(0.0, 0.0);
            for n in 1..=nmax {
                let a = -(n as f64) * sigma;
                geo += c(libm::cos(a), libm::sin(a));
            }
            let i = c(0.0, 1.0);
            let mut t = TensorOperator::zeros(cw.n);
            let hh = i * (c(1.0, 0.0) + geo * 2.0);
            for h in &cw.h {
                t.m += linalg::kron(h, h) * hh;
            }
            for r in &cw.roots {
                let w = i * r.len2();
                let e = cw.e(*r);
                let f = cw.e(r.neg());
                let mut coef = w * geo;
                if r.is_positive() {
                    coef += w;
                }
                t.m += linalg::kron(&f, &e) * coef;
            }
            Ok(t)
        }
    }
}

/// Cesàro mean of the first `nmax` partial sums of the series form.
pub fn r_trig_cesaro(cw: &CartanWeylBasis, sigma: f64, nmax: i64) -> TensorOperator {
    let mut acc = TensorOperator::zeros(cw.n);
    for n in 0..nmax {
        acc = &acc + &r_trig(cw, sigma, TrigForm::Series(n)).unwrap();
    }
    acc.scale(c(1.0 / nmax as f64, 0.0))
}

/// r(a) = Σ_α (i|α|²/2) (a^α + a^{-α})/(a^α - a^{-α}) E^{-α}⊗E^α, summed over all roots.
pub fn r_dynamical(cw: &CartanWeylBasis, phi: &[f64]) -> Result<TensorOperator> {
    let mut t = TensorOperator::zeros(cw.n);
    for r in &cw.roots {
        let x = cw.alpha_phi(*r, phi);
        if x.abs() < GUARD {
            return Err(Error::WallSingularity { root: (r.i, r.j) });
        }
        let coth = 1.0 / libm::tanh(x);
        let w = c(0.0, r.len2() / 2.0 * coth);
        t.m += linalg::kron(&cw.e(r.neg()), &cw.e(*r)) * w;
    }
    Ok(t)
}

fn cot_pi(z: C) -> Result<C> {
    let s = (z * PI).sin();
    if s.norm() < GUARD {
        return Err(Error::PoleProximity);
    }
    Ok((z * PI).cos() / s)
}

fn check_tau(tau: C) -> Result<()> {
    if tau.im <= 0.0 {
        return Err(Error::InvalidInput("Im tau must be positive"));
    }
    Ok(())
}

/// σ_{-y}(z, τ) = π(cot πz + cot πy) + 4π Σ_{m,n>0} e^{2πiτmn} sin 2π(mz + ny).
pub fn elliptic_sigma(y: C, z: C, tau: C) -> Result<C> {
    check_tau(tau)?;
    let lead = (cot_pi(z)? + cot_pi(y)?) * PI;
    let q = (c(0.0, 2.0 * PI) * tau).exp();
    let mut acc = C::new(0.0, 0.0);
    let mut terms = 0usize;
    let mut prev_band = f64::INFINITY;
    let mut growing = 0;
    for s in 2usize.. {
        let mut band = C::new(0.0, 0.0);
        let mut band_max: f64 = 0.0;
        for m in 1..s {
            let nn = s - m;
            let arg = (z * m as f64 + y * nn as f64) * (2.0 * PI);
            let qmn = q.powf((m * nn) as f64);
            band += qmn * arg.sin();
            // |sin w| ≤ cosh(Im w); a vanishing sine must not end the summation.
            band_max = band_max.max(qmn.norm() * libm::cosh(arg.im));
            terms += 1;
        }
        acc += band;
        let scale = acc.norm().max(1.0);
        if band_max * 4.0 * PI < SERIES_TOL * scale {
            break;
        }
        if band_max > prev_band {
            growing += 1;
            if growing > 50 {
                return Err(Error::SeriesNotConverged { terms });
            }
        }
        prev_band = band_max;
        if terms > SERIES_MAX_TERMS || !band_max.is_finite() {
            return Err(Error::SeriesNotConverged { terms });
        }
    }
    Ok(lead + acc * (4.0 * PI))
}

/// ρ(z, τ) = π cot πz + 4π Σ_{n>0} e^{2πinτ} sin 2πnz / (1 - e^{2πinτ}).
pub fn elliptic_rho(z: C, tau: C) -> Result<C> {
    check_tau(tau)?;
    let lead = cot_pi(z)? * PI;
    let q = (c(0.0, 2.0 * PI) * tau).exp();
    let mut acc = C::new(0.0, 0.0);
    for n in 1..=SERIES_MAX_TERMS {
        let qn = q.powf(n as f64);
        let arg = z * (2.0 * PI * n as f64);
        let den = c(1.0, 0.0) - qn;
        acc += qn * arg.sin() / den;
        let bound = qn.norm() * libm::cosh(arg.im) / den.norm();
        if bound * 4.0 * PI < SERIES_TOL * acc.norm().max(1.0) {
            return Ok(lead + acc * (4.0 * PI));
        }
        if !bound.is_finite() {
            break;
        }
    }
    Err(Error::SeriesNotConverged { terms: SERIES_MAX_TERMS })
}

/// Argument y_α of σ_{-y} in the elliptic r-matrix: y_α = ε' k a^μ α(H^μ)/(πi).
/// With φ^μ = -kε'a^μ this is y_α = i α(φ)/π, the value for which the ε' → -∞ limit
/// reproduces r(e^{φH}).
pub fn felder_y(cw: &CartanWeylBasis, r: crate::lie_core::Root, a_alc: &[f64], eps: f64, k: i64) -> C {
    let x = cw.alpha_phi(r, a_alc) * eps * k as f64;
    c(x, 0.0) / c(0.0, PI)
}

/// r̂_{ε'}(ã, σ) = (ε'/π) ρ(σ/2π, τ) H^μ⊗H^μ + (ε'/π) Σ_α (|α|²/2) σ_{-y_α}(σ/2π, τ) E^α⊗E^{-α},
/// τ = -ikε'/π.
pub fn felder_r(cw: &CartanWeylBasis, a_alc: &[f64], sigma: f64, eps: f64, k: i64) -> Result<TensorOperator> {
    if eps >= 0.0 {
        return Err(Error::InvalidInput("felder_r requires eps < 0"));
    }
    let tau = c(0.0, -(k as f64) * eps / PI);
    let z = c(sigma / (2.0 * PI), 0.0);
    let pre = eps / PI;
    let mut t = TensorOperator::zeros(cw.n);
    let rho = elliptic_rho(z, tau)?;
    for h in &cw.h {
        t.m += linalg::kron(h, h) * (rho * pre);
    }
    for r in &cw.roots {
        let y = felder_y(cw, *r, a_alc, eps, k);
        let s = elliptic_sigma(y, z, tau)?;
        t.m += linalg::kron(&cw.e(*r), &cw.e(r.neg())) * (s * pre * (r.len2() / 2.0));
    }
    Ok(t)
}

/// ‖(1/ε') r̂_{ε'}(ã, σ) - (r(e^{φH}) + C cot(σ/2))‖_sup with a^μ = -φ^μ/(kε').
pub fn limit_deviation(cw: &CartanWeylBasis, phi: &[f64], sigma: f64, eps: f64, k: i64) -> Result<f64> {
    let a_alc: Vec<f64> = phi.iter().map(|p| -p / (k as f64 * eps)).collect();
    let fr = felder_r(cw, &a_alc, sigma, eps, k)?.scale(c(1.0 / eps, 0.0));
    let cot = r_trig(cw, sigma, TrigForm::Closed)?;
    let target = &(&r_dynamical(cw, phi)? + &cot) - &canonical_r_tensor(cw);
    Ok(fr.dist(&target))
}

/// Least-squares slope of ln(d) against |ε'|; negative slope means exponential decay
/// with rate c = -slope.
pub fn decay_rate(eps: &[f64], dev: &[f64]) -> f64 {
    let xs: Vec<f64> = eps.iter().map(|e| e.abs()).collect();
    let ys: Vec<f64> = dev.iter().map(|d| libm::log(*d)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys.iter()).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    -sxy / sxx
}

/// [X_12, Y_13] + [X_12, Z_23] + [Y_13, Z_23] for operators on V⊗V⊗V.
pub fn cybe_residual(x12: &TensorOperator, y13: &TensorOperator, z23: &TensorOperator) -> f64 {
    let n = x12.n;
    let id = linalg::eye(n);
    let a12 = linalg::kron(&x12.m, &id);
    let c23 = linalg::kron(&id, &z23.m);
    let p23 = linalg::kron(&id, &TensorOperator::swap_op(n).m);
    let b13 = &p23 * linalg::kron(&y13.m, &id) * &p23;
    let comm = |p: &crate::linalg::Mat, q: &crate::linalg::Mat| p * q - q * p;
    linalg::max_abs(&(comm(&a12, &b13) + comm(&a12, &c23) + comm(&b13, &c23)))
}

/// Exploratory CYBE check for r(σ) = r + C cot(σ/2) at three points.
pub fn cybe_trig(cw: &CartanWeylBasis, s1: f64, s2: f64, s3: f64) -> Result<f64> {
    let r12 = r_trig(cw, s1 - s2, TrigForm::Closed)?;
    let r13 = r_trig(cw, s1 - s3, TrigForm::Closed)?;
    let r23 = r_trig(cw, s2 - s3, TrigForm::Closed)?;
    Ok(cybe_residual(&r12, &r13, &r23))
}
