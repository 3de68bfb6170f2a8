//! Bivector brackets evaluated from finite differences and dual-basis sums, closed-form
//! exchange right-hand sides, the chart matrices of Ω_∞ and Π^∞, and the 2-forms Ω_∞,
//! Ω̃_∞ and ω_S evaluated on curves.
//!
//! Brackets {F(σ) ⊗ G(σ')} of loop-valued observables are kept as double Fourier tables
//! ([`Field2`]). A bracket summed over the truncated basis and a closed form built with the
//! truncated series r_N then agree exactly on the low-mode window |m|, |m'| ≤ W whenever W
//! plus the degree of the observables stays within the cutoff.

use crate::error::{Error, Result};
use crate::factorization::{factor_gstar_gl, lambda_l, lambda_r, xi_l, xi_r};
use crate::lie_core::{canonical_r_tensor, casimir_tensor, CartanWeylBasis};
use crate::linalg::{self, c, Mat, C};
use crate::loop_algebra::{pairing_d, project_exact, AffineBasis, BasisLabel, LoopElement, Projector};
use crate::rmatrix::{felder_r, r_dynamical, r_trig, TrigForm};
use crate::sampling::a_matrix;
use crate::tensor::TensorOperator;
use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

// ---------------------------------------------------------------------------------------
// Double Fourier tables

/// T(σ, σ') = Σ T_{m,m'} e^{i(mσ + m'σ')} with T_{m,m'} ∈ End(V⊗V).
#[derive(Clone, Debug)]
pub struct Field2 {
    pub n: usize,
    pub coef: BTreeMap<(i64, i64), Mat>,
}

impl Field2 {
    pub fn zero(n: usize) -> Self {
        Field2 { n, coef: BTreeMap::new() }
    }

    /// σ-independent tensor.
    pub fn constant(t: &TensorOperator) -> Self {
        let mut f = Self::zero(t.n);
        f.coef.insert((0, 0), t.m.clone());
        f
    }

    /// a(σ) ⊗ b(σ').
    pub fn sep(a: &LoopElement, b: &LoopElement) -> Self {
        let mut f = Self::zero(a.n());
        f.add_sep(a, b, c(1.0, 0.0), None);
        f
    }

    /// Adds s·a(σ)⊗b(σ'), keeping only modes inside the window if one is given.
    pub fn add_sep(&mut self, a: &LoopElement, b: &LoopElement, s: C, window: Option<i64>) {
        let inside = |m: i64| window.map_or(true, |w| m.abs() <= w);
        for (ma, am) in a.iter_modes() {
            if !inside(ma) || linalg::max_abs(am) == 0.0 {
                continue;
            }
            for (mb, bm) in b.iter_modes() {
                if !inside(mb) || linalg::max_abs(bm) == 0.0 {
                    continue;
                }
                let k = linalg::kron(am, bm) * s;
                self.add_at(ma, mb, &k);
            }
        }
    }

    fn add_at(&mut self, m: i64, mp: i64, x: &Mat) {
        match self.coef.get_mut(&(m, mp)) {
            Some(v) => *v += x,
            None => {
                self.coef.insert((m, mp), x.clone());
            }
        }
    }

    /// Σ_n R_n e^{-in(σ-σ')}, the truncated kernel r_N(σ - σ') as a double table.
    pub fn r_series(cw: &CartanWeylBasis, cutoff: i64) -> Self {
        let i = c(0.0, 1.0);
        let mut f = Self::zero(cw.n);
        let mut hh = linalg::zeros(cw.n * cw.n);
        for h in &cw.h {
            hh += linalg::kron(h, h);
        }
        let mut pos = linalg::zeros(cw.n * cw.n);
        let mut all = linalg::zeros(cw.n * cw.n);
        for r in &cw.roots {
            let k = linalg::kron(&cw.e(r.neg()), &cw.e(*r)) * (i * r.len2());
            if r.is_positive() {
                pos += &k;
            }
            all += k;
        }
        f.coef.insert((0, 0), &hh * i + pos);
        let rn = &hh * (i * 2.0) + all;
        for n in 1..=cutoff {
            f.coef.insert((-n, n), rn.clone());
        }
        f
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut f = self.clone();
        for (k, v) in &o.coef {
            f.add_at(k.0, k.1, v);
        }
        f
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(c(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C) -> Self {
        let mut f = self.clone();
        for v in f.coef.values_mut() {
            *v *= s;
        }
        f
    }

    /// Pointwise operator product, a double convolution of the tables.
    pub fn mul(&self, o: &Self) -> Self {
        let mut f = Self::zero(self.n);
        for (ka, a) in &self.coef {
            for (kb, b) in &o.coef {
                f.add_at(ka.0 + kb.0, ka.1 + kb.1, &(a * b));
            }
        }
        f
    }

    pub fn eval(&self, s: f64, sp: f64) -> TensorOperator {
        let mut t = TensorOperator::zeros(self.n);
        for (k, v) in &self.coef {
            let ph = k.0 as f64 * s + k.1 as f64 * sp;
            t.m += v * c(libm::cos(ph), libm::sin(ph));
        }
        t
    }

    pub fn window(&self, w: i64) -> Self {
        let mut f = Self::zero(self.n);
        for (k, v) in &self.coef {
            if k.0.abs() <= w && k.1.abs() <= w {
                f.coef.insert(*k, v.clone());
            }
        }
        f
    }

    pub fn max_abs(&self) -> f64 {
        self.coef.values().map(linalg::max_abs).fold(0.0, f64::max)
    }

    /// Tensor-factor swap together with σ ↔ σ'.
    pub fn swapped(&self) -> Self {
        let p = TensorOperator::swap_op(self.n).m;
        let mut f = Self::zero(self.n);
        for (k, v) in &self.coef {
            f.coef.insert((k.1, k.0), &p * v * &p);
        }
        f
    }
}

/// Deviation of two fields restricted to a window.
#[derive(Clone, Copy, Debug)]
pub struct Deviation {
    pub abs: f64,
    /// abs / max(largest reference coefficient, floor).
    pub rel: f64,
}

/// max |a - b| over the window, relative to the reference `b` (or `floor` if larger).
pub fn window_deviation(a: &Field2, b: &Field2, w: i64, floor: f64) -> Deviation {
    let d = a.window(w).sub(&b.window(w)).max_abs();
    let s = b.window(w).max_abs().max(floor).max(1e-300);
    Deviation { abs: d, rel: d / s }
}

// ---------------------------------------------------------------------------------------
// Finite differences

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fd {
    pub h: f64,
    pub richardson: bool,
}

impl Default for Fd {
    fn default() -> Self {
        Fd { h: 1e-4, richardson: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Closed,
    FiniteDifference(Fd),
}

/// d/dh f(h) at 0 by central differences, optionally Richardson-extrapolated over (h, h/2).
pub fn fd_derivative<F>(f: F, fd: Fd) -> Result<LoopElement>
where
    F: Fn(f64) -> Result<LoopElement>,
{
    if !(fd.h > 0.0) {
        return Err(Error::InvalidInput("fd step must be positive"));
    }
    let central = |h: f64| -> Result<LoopElement> { Ok(f(h)?.sub(&f(-h)?).scale_re(0.5 / h)) };
    let d1 = central(fd.h)?;
    if !fd.richardson {
        return Ok(d1);
    }
    let d2 = central(fd.h / 2.0)?;
    Ok(d2.scale_re(4.0 / 3.0).sub(&d1.scale_re(1.0 / 3.0)))
}

/// Scalar version of [`fd_derivative`].
pub fn fd_scalar<F>(f: F, fd: Fd) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let central = |h: f64| -> Result<f64> { Ok((f(h)? - f(-h)?) * 0.5 / h) };
    let d1 = central(fd.h)?;
    if !fd.richardson {
        return Ok(d1);
    }
    Ok((4.0 * central(fd.h / 2.0)? - d1) / 3.0)
}

// ---------------------------------------------------------------------------------------
// Observables on the double

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// K → K e^{hX}.
    Left,
    /// K → e^{hX} K.
    Right,
}

/// Matrix function applied to the (pulled-back) loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// Υ_σ.
    Upsilon,
    /// Υ_σ^{†-1}.
    UpsilonDagInv,
    /// Υ_σ Υ_σ^†.
    UUdag,
    /// Υ_σ^† Υ_σ.
    UdagU,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pullback {
    Id,
    LambdaL,
    LambdaR,
    XiL,
    XiR,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatrixObservable {
    pub shape: Shape,
    pub pullback: Pullback,
}

impl MatrixObservable {
    pub const fn new(shape: Shape, pullback: Pullback) -> Self {
        MatrixObservable { shape, pullback }
    }

    /// L(σ) = Λ_L^*(Υ_σ Υ_σ^†).
    pub const fn left_current() -> Self {
        Self::new(Shape::UUdag, Pullback::LambdaL)
    }

    /// R(σ) = Λ_R^*(Υ_σ^† Υ_σ).
    pub const fn right_current() -> Self {
        Self::new(Shape::UdagU, Pullback::LambdaR)
    }

    /// The observable as a loop in σ.
    pub fn eval(&self, k: &LoopElement) -> Result<LoopElement> {
        let base = match self.pullback {
            Pullback::Id => k.clone(),
            Pullback::LambdaL => lambda_l(k)?,
            Pullback::LambdaR => lambda_r(k)?,
            Pullback::XiL => xi_l(k)?,
            Pullback::XiR => xi_r(k)?,
        };
        apply_shape(self.shape, &base)
    }
}

fn apply_shape(s: Shape, g: &LoopElement) -> Result<LoopElement> {
    Ok(match s {
        Shape::Upsilon => g.clone(),
        Shape::UpsilonDagInv => g.adjoint().inverse()?,
        Shape::UUdag => g.mul(&g.adjoint()),
        Shape::UdagU => g.adjoint().mul(g),
    })
}

/// e^{hX} as a loop.
pub fn loop_exp(x: &LoopElement, h: f64) -> LoopElement {
    x.scale_re(h).exp().cleaned()
}

fn translate(k: &LoopElement, x: &LoopElement, side: Side, h: f64) -> LoopElement {
    let e = loop_exp(x, h);
    match side {
        Side::Left => k.mul(&e),
        Side::Right => e.mul(k),
    }
}

/// ⟨L_*X, dF⟩ or ⟨R_*X, dF⟩ at K.
pub fn directional_derivative(
    f: &MatrixObservable,
    k: &LoopElement,
    x: &LoopElement,
    side: Side,
    method: Method,
) -> Result<LoopElement> {
    match method {
        Method::Closed => {
            if f.pullback != Pullback::Id {
                return Err(Error::InvalidInput("closed derivative only for Υ-type observables"));
            }
            closed_derivative(f.shape, k, x, side)
        }
        Method::FiniteDifference(fd) => fd_derivative(|h| f.eval(&translate(k, x, side, h)), fd),
    }
}

fn closed_derivative(shape: Shape, k: &LoopElement, x: &LoopElement, side: Side) -> Result<LoopElement> {
    let xd = x.adjoint();
    Ok(match (shape, side) {
        (Shape::Upsilon, Side::Left) => k.mul(x),
        (Shape::Upsilon, Side::Right) => x.mul(k),
        (Shape::UpsilonDagInv, Side::Left) => k.adjoint().inverse()?.mul(&xd).neg(),
        (Shape::UpsilonDagInv, Side::Right) => xd.mul(&k.adjoint().inverse()?).neg(),
        (Shape::UUdag, Side::Left) => k.mul(&x.add(&xd)).mul(&k.adjoint()),
        (Shape::UUdag, Side::Right) => {
            let kk = k.mul(&k.adjoint());
            x.mul(&kk).add(&kk.mul(&xd))
        }
        (Shape::UdagU, Side::Left) => {
            let kk = k.adjoint().mul(k);
            kk.mul(x).add(&xd.mul(&kk))
        }
        (Shape::UdagU, Side::Right) => k.adjoint().mul(&x.add(&xd)).mul(k),
    })
}

// ---------------------------------------------------------------------------------------
// Bivectors on the double

/// Which dual-basis family a tensor slot runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// T_L^i.
    TL,
    /// t_i.
    T,
    /// T_R^i.
    TR,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BivectorTerm {
    pub side: Side,
    pub sign: f64,
    pub first: Family,
    pub second: Family,
    /// κ_*⊗κ_* applied to the pair, as (ε, k).
    pub twist: Option<(f64, i64)>,
}

/// Σ_terms sign · trans_*(X_i) ⊗ trans_*(Y_i), summed over the truncated basis.
#[derive(Clone, Debug)]
pub struct BivectorSpec {
    pub name: &'static str,
    pub terms: Vec<BivectorTerm>,
    pub cutoff: i64,
}

impl BivectorSpec {
    /// Π_D^∞ = L_*(T_L^i ⊗ t_i) - R_*(t_i ⊗ T_R^i).
    pub fn pi_d_infty(cutoff: i64) -> Self {
        BivectorSpec {
            name: "pi_d_infty",
            terms: vec![
                BivectorTerm { side: Side::Left, sign: 1.0, first: Family::TL, second: Family::T, twist: None },
                BivectorTerm { side: Side::Right, sign: -1.0, first: Family::T, second: Family::TR, twist: None },
            ],
            cutoff,
        }
    }

    /// Π_D^κ = L_*(T_L^i ⊗ t_i) - R_*κ_*(t_i ⊗ T_L^i).
    pub fn pi_d_kappa(cutoff: i64, eps: f64, k: i64) -> Self {
        BivectorSpec {
            name: "pi_d_kappa",
            terms: vec![
                BivectorTerm { side: Side::Left, sign: 1.0, first: Family::TL, second: Family::T, twist: None },
                BivectorTerm { side: Side::Right, sign: -1.0, first: Family::T, second: Family::TL, twist: Some((eps, k)) },
            ],
            cutoff,
        }
    }

    /// ½L_*(P_L - P_L^*) + ½R_*(P_R - P_R^*) with P_L = Σ T_L^i ⊗ t_i, P_R = Σ T_R^i ⊗ t_i.
    pub fn pi_d_antisymmetric(cutoff: i64) -> Self {
        let t = |side, sign, first, second| BivectorTerm { side, sign, first, second, twist: None };
        BivectorSpec {
            name: "pi_d_antisymmetric",
            terms: vec![
                t(Side::Left, 0.5, Family::TL, Family::T),
                t(Side::Left, -0.5, Family::T, Family::TL),
                t(Side::Right, 0.5, Family::TR, Family::T),
                t(Side::Right, -0.5, Family::T, Family::TR),
            ],
            cutoff,
        }
    }

    pub fn empty(cutoff: i64) -> Self {
        BivectorSpec { name: "empty", terms: Vec::new(), cutoff }
    }
}

fn family_elem<'a>(e: &'a crate::loop_algebra::BasisEntry, f: Family) -> &'a LoopElement {
    match f {
        Family::TL => &e.tl,
        Family::T => &e.t,
        Family::TR => &e.tr,
    }
}

/// Which derivative route to use per observable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivativePolicy {
    /// Used for observables without pullback.
    pub direct: Method,
    /// Used for pullbacks through Λ/Ξ (always finite differences).
    pub fd: Fd,
}

impl Default for DerivativePolicy {
    fn default() -> Self {
        DerivativePolicy { direct: Method::Closed, fd: Fd::default() }
    }
}

impl DerivativePolicy {
    fn for_obs(&self, f: &MatrixObservable) -> Method {
        if f.pullback == Pullback::Id {
            self.direct
        } else {
            Method::FiniteDifference(self.fd)
        }
    }
}

/// {F(σ) ⊗ G(σ')} at K for a bivector given by `spec`, as a double Fourier table
/// (restricted to the window if one is given).
pub fn bivector_bracket(
    spec: &BivectorSpec,
    basis: &AffineBasis,
    f: &MatrixObservable,
    g: &MatrixObservable,
    k: &LoopElement,
    policy: DerivativePolicy,
    window: Option<i64>,
) -> Result<Field2> {
    if spec.cutoff > basis.cutoff {
        return Err(Error::CutoffExceeded { cutoff: basis.cutoff, mode: spec.cutoff });
    }
    let mut out = Field2::zero(basis.n());
    let mf = policy.for_obs(f);
    let mg = policy.for_obs(g);
    for term in &spec.terms {
        for e in basis.entries.iter().filter(|e| e.label.mode() <= spec.cutoff) {
            let (mut x, mut y) = (family_elem(e, term.first).clone(), family_elem(e, term.second).clone());
            if let Some((eps, kk)) = term.twist {
                x = crate::loop_algebra::kappa_twist(&x, eps, kk)?;
                y = crate::loop_algebra::kappa_twist(&y, eps, kk)?;
            }
            let df = directional_derivative(f, k, &x, term.side, mf)?;
            let dg = directional_derivative(g, k, &y, term.side, mg)?;
            out.add_sep(&df, &dg, c(term.sign, 0.0), window);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------------------
// Affine Poisson structures on G*

/// Π^*, Π^*_op and the associated Poisson-Lie structures Π^*_L, Π^*_R.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PiStarVariant {
    Star,
    Op,
    L,
    R,
}

impl PiStarVariant {
    fn data(self) -> (Family, Projector) {
        match self {
            PiStarVariant::Star => (Family::TL, Projector::PR),
            PiStarVariant::Op => (Family::TR, Projector::PL),
            PiStarVariant::L => (Family::TL, Projector::PL),
            PiStarVariant::R => (Family::TR, Projector::PR),
        }
    }
}

/// Right-trivialized coefficients Π^{ij}(g) = -(Ad_{g^{-1}} X^i, p_Y Ad_{g^{-1}} X^j)_D over
/// the truncated basis.
pub fn pistar_matrix(basis: &AffineBasis, variant: PiStarVariant, g: &LoopElement) -> Result<Vec<Vec<f64>>> {
    let (fam, proj) = variant.data();
    let gi = g.inverse()?;
    let ad: Vec<LoopElement> = basis.entries.iter().map(|e| gi.mul(family_elem(e, fam)).mul(g)).collect();
    let pad: Vec<LoopElement> = ad.iter().map(|x| project_exact(x, proj)).collect();
    Ok(ad.iter().map(|x| pad.iter().map(|y| -pairing_d(x, y)).collect()).collect())
}

/// {F ⊗ G} on G* from the explicit bivector: Σ_ij Π^{ij} (R_{t_i}F) ⊗ (R_{t_j}G), with F, G
/// of Υ type (closed derivatives).
pub fn pistar_bracket(
    basis: &AffineBasis,
    variant: PiStarVariant,
    f: Shape,
    g: Shape,
    point: &LoopElement,
    window: Option<i64>,
) -> Result<Field2> {
    let pm = pistar_matrix(basis, variant, point)?;
    let df: Vec<LoopElement> =
        basis.entries.iter().map(|e| closed_derivative(f, point, &e.t, Side::Right)).collect::<Result<_>>()?;
    let dg: Vec<LoopElement> =
        basis.entries.iter().map(|e| closed_derivative(g, point, &e.t, Side::Right)).collect::<Result<_>>()?;
    let mut out = Field2::zero(basis.n());
    for (i, row) in pm.iter().enumerate() {
        let mut acc = LoopElement::zero(basis.n());
        for (j, p) in row.iter().enumerate() {
            if *p != 0.0 {
                acc = acc.add(&dg[j].scale_re(*p));
            }
        }
        out.add_sep(&df[i], &acc, c(1.0, 0.0), window);
    }
    Ok(out)
}

/// The same bracket through the groupoid: Λ_R is Poisson onto (G*, Π^*) at K = g^{-1},
/// Λ_L onto (G*, Π^*_op) at K = g. Only these two variants have this route.
pub fn pistar_bracket_via_groupoid(
    basis: &AffineBasis,
    variant: PiStarVariant,
    f: Shape,
    g: Shape,
    point: &LoopElement,
    fd: Fd,
    window: Option<i64>,
) -> Result<Field2> {
    let (pb, k) = match variant {
        PiStarVariant::Star => (Pullback::LambdaR, point.inverse()?),
        PiStarVariant::Op => (Pullback::LambdaL, point.clone()),
        _ => return Err(Error::InvalidInput("no groupoid route for the left/right Poisson-Lie structures")),
    };
    bivector_bracket(
        &BivectorSpec::pi_d_infty(basis.cutoff),
        basis,
        &MatrixObservable::new(f, pb),
        &MatrixObservable::new(g, pb),
        &k,
        DerivativePolicy { direct: Method::FiniteDifference(fd), fd },
        window,
    )
}

// ---------------------------------------------------------------------------------------
// Chiral phase space M_∞ = G_R × A_+

/// Functions of (k, a) ∈ G_R × A_+.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChiralObs {
    /// a (constant loop).
    A,
    K,
    /// k(σ)a.
    KA,
    /// (k(σ)a)^{†-1}.
    KADagInv,
    /// Λ_L(ka).
    LambdaL,
    /// k̃ = Ξ_R^{-1}(ka).
    DualK,
    /// ã = a^{-1}.
    DualA,
}

impl ChiralObs {
    pub fn eval(&self, k: &LoopElement, a: &Mat) -> Result<LoopElement> {
        Ok(match self {
            ChiralObs::A => LoopElement::constant(a.clone()),
            ChiralObs::K => k.clone(),
            ChiralObs::KA => k.rmul_mat(a),
            ChiralObs::KADagInv => k.rmul_mat(a).adjoint().inverse()?,
            ChiralObs::LambdaL => lambda_l(&k.rmul_mat(a))?,
            ChiralObs::DualK => xi_r(&k.rmul_mat(a))?.inverse()?,
            ChiralObs::DualA => LoopElement::constant(linalg::inverse(a).ok_or(Error::NearSingular { min_det: 0.0 })?),
        })
    }

    fn has_closed(&self) -> bool {
        !matches!(self, ChiralObs::LambdaL | ChiralObs::DualK)
    }
}

/// Tangent direction at (k, a).
#[derive(Clone, Debug)]
pub enum ChiralDir {
    /// k → k e^{hT}.
    Left(LoopElement),
    /// k → e^{hT} k.
    Right(LoopElement),
    /// φ^μ → φ^μ + h.
    Phi(usize),
}

fn chiral_move(cw: &CartanWeylBasis, k: &LoopElement, phi: &[f64], dir: &ChiralDir, h: f64) -> (LoopElement, Mat) {
    match dir {
        ChiralDir::Left(t) => (k.mul(&loop_exp(t, h)), a_matrix(cw, phi)),
        ChiralDir::Right(t) => (loop_exp(t, h).mul(k), a_matrix(cw, phi)),
        ChiralDir::Phi(mu) => {
            let mut p = phi.to_vec();
            p[*mu] += h;
            (k.clone(), a_matrix(cw, &p))
        }
    }
}

/// Derivative of a chiral observable along a direction; closed formulas where the observable
/// is explicit and `closed` is set, finite differences otherwise.
pub fn chiral_derivative(
    cw: &CartanWeylBasis,
    f: ChiralObs,
    k: &LoopElement,
    phi: &[f64],
    dir: &ChiralDir,
    closed: bool,
    fd: Fd,
) -> Result<LoopElement> {
    if !(closed && f.has_closed()) {
        return fd_derivative(
            |h| {
                let (kk, aa) = chiral_move(cw, k, phi, dir, h);
                f.eval(&kk, &aa)
            },
            fd,
        );
    }
    let a = a_matrix(cw, phi);
    let n = cw.n;
    let zero = LoopElement::zero(n);
    Ok(match (f, dir) {
        (ChiralObs::A, ChiralDir::Phi(mu)) => LoopElement::constant(&a * &cw.h[*mu]),
        (ChiralObs::DualA, ChiralDir::Phi(mu)) => {
            LoopElement::constant(-(linalg::inverse(&a).unwrap() * &cw.h[*mu]))
        }
        (ChiralObs::A | ChiralObs::DualA, _) => zero,
        (ChiralObs::K, ChiralDir::Left(t)) => k.mul(t),
        (ChiralObs::K, ChiralDir::Right(t)) => t.mul(k),
        (ChiralObs::K, ChiralDir::Phi(_)) => zero,
        (ChiralObs::KA, ChiralDir::Left(t)) => k.mul(t).rmul_mat(&a),
        (ChiralObs::KA, ChiralDir::Right(t)) => t.mul(k).rmul_mat(&a),
        (ChiralObs::KA, ChiralDir::Phi(mu)) => k.rmul_mat(&(&a * &cw.h[*mu])),
        (ChiralObs::KADagInv, d) => {
            let di = k.rmul_mat(&a).adjoint().inverse()?;
            match d {
                ChiralDir::Left(t) => {
                    let ai = linalg::inverse(&a).unwrap();
                    k.adjoint().inverse()?.mul(&t.adjoint()).rmul_mat(&ai).neg()
                }
                ChiralDir::Right(t) => t.adjoint().mul(&di).neg(),
                ChiralDir::Phi(mu) => di.rmul_mat(&cw.h[*mu]).neg(),
            }
        }
        _ => unreachable!(),
    })
}

/// Π_R^{ij}(k) = -(Ad_{k^{-1}} t_i, p_R^* Ad_{k^{-1}} t_j)_D.
pub fn pi_r_matrix(basis: &AffineBasis, k: &LoopElement) -> Result<Vec<Vec<f64>>> {
    let ki = k.inverse()?;
    let ad: Vec<LoopElement> = basis.entries.iter().map(|e| ki.mul(&e.t).mul(k)).collect();
    let pad: Vec<LoopElement> = ad.iter().map(|x| project_exact(x, Projector::PRStar)).collect();
    Ok(ad.iter().map(|x| pad.iter().map(|y| -pairing_d(x, y)).collect()).collect())
}

/// Weight w_α̂(a) of L_*(B_R^α̂ ∧ C_R^α̂) in Π^∞ (entered with a minus sign).
pub fn pi_infty_weight(cw: &CartanWeylBasis, label: &BasisLabel, phi: &[f64]) -> Result<f64> {
    let g = match label {
        BasisLabel::B(g) | BasisLabel::C(g) => g,
        BasisLabel::Cartan(_) => return Err(Error::InvalidInput("Cartan label has no B/C weight")),
    };
    let a2 = match g.kind {
        crate::loop_algebra::GenKind::E(r) => libm::exp(2.0 * cw.alpha_phi(r, phi)),
        crate::loop_algebra::GenKind::H(_) => 1.0,
    };
    if g.mode > 0 {
        Ok(g.len2() / a2)
    } else {
        let d = a2 - 1.0;
        if d.abs() < crate::rmatrix::GUARD {
            if let crate::loop_algebra::GenKind::E(r) = g.kind {
                return Err(Error::WallSingularity { root: (r.i, r.j) });
            }
        }
        Ok(g.len2() / d)
    }
}

/// {f ⊗ g}_∞ at (k, a = e^{φH}) for the bivector
/// Π^∞ = -Π_R + L_*T^μ ∧ ∂_φ^μ - Σ_α̂ w_α̂(a) L_*(B_R^α̂ ∧ C_R^α̂).
pub fn chiral_bracket(
    basis: &AffineBasis,
    f: ChiralObs,
    g: ChiralObs,
    k: &LoopElement,
    phi: &[f64],
    closed: bool,
    fd: Fd,
    window: Option<i64>,
) -> Result<Field2> {
    let cw = &basis.cw;
    let n = cw.n;
    let d = |o: ChiralObs, dir: &ChiralDir| chiral_derivative(cw, o, k, phi, dir, closed, fd);
    let mut out = Field2::zero(n);
    let one = c(1.0, 0.0);
    // -Π_R
    let pr = pi_r_matrix(basis, k)?;
    let rf: Vec<LoopElement> =
        basis.entries.iter().map(|e| d(f, &ChiralDir::Right(e.tr.clone()))).collect::<Result<_>>()?;
    let rg: Vec<LoopElement> =
        basis.entries.iter().map(|e| d(g, &ChiralDir::Right(e.tr.clone()))).collect::<Result<_>>()?;
    for (i, row) in pr.iter().enumerate() {
        let mut acc = LoopElement::zero(n);
        for (j, p) in row.iter().enumerate() {
            if *p != 0.0 {
                acc = acc.add(&rg[j].scale_re(-*p));
            }
        }
        out.add_sep(&rf[i], &acc, one, window);
    }
    // L_*T^μ ∧ ∂_φ^μ
    for mu in 0..cw.rank {
        let t = LoopElement::constant(&cw.h[mu] * c(0.0, 1.0));
        let lf = d(f, &ChiralDir::Left(t.clone()))?;
        let lg = d(g, &ChiralDir::Left(t))?;
        let pf = d(f, &ChiralDir::Phi(mu))?;
        let pg = d(g, &ChiralDir::Phi(mu))?;
        out.add_sep(&lf, &pg, one, window);
        out.add_sep(&pf, &lg, -one, window);
    }
    // -Σ w L_*(B ∧ C)
    let mut it = basis.entries.iter().filter(|e| !matches!(e.label, BasisLabel::Cartan(_)));
    while let (Some(b), Some(cc)) = (it.next(), it.next()) {
        let w = pi_infty_weight(cw, &b.label, phi)?;
        let lbf = d(f, &ChiralDir::Left(b.tr.clone()))?;
        let lbg = d(g, &ChiralDir::Left(b.tr.clone()))?;
        let lcf = d(f, &ChiralDir::Left(cc.tr.clone()))?;
        let lcg = d(g, &ChiralDir::Left(cc.tr.clone()))?;
        out.add_sep(&lbf, &lcg, c(-w, 0.0), window);
        out.add_sep(&lcf, &lbg, c(w, 0.0), window);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------------------
// Closed-form exchange right-hand sides

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairKind {
    /// Υ ⊗ Υ.
    UU,
    /// Υ^{†-1} ⊗ Υ^{†-1}.
    DD,
    /// Υ^{†-1} ⊗ Υ.
    DU,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExchangeKind {
    /// Affine brackets on G* for the four structures.
    PiStar(PiStarVariant, PairKind),
    /// Left current algebra {L ⊗ L'}.
    CurrentL,
    /// Right current algebra {R ⊗ R'}.
    CurrentR,
    /// {a ⊗ ka}.
    ChiralAKa,
    /// {ka ⊗ k'a}.
    ChiralKaKa,
    /// {(ka)^{†-1} ⊗ (k'a)^{†-1}}.
    ChiralDD,
    /// {ka ⊗ (k'a)^{†-1}}.
    ChiralKaD,
    /// {Λ_L(ka) ⊗ Λ_L(k'a)}.
    LambdaLambda,
    /// {k ⊗ Λ_L(k'a)}.
    KLambda,
    /// {a ⊗ Λ_L(ka)}.
    ALambda,
    /// {ã ⊗ k̃}.
    DualAK,
    /// {k̃ ⊗ k̃'}.
    DualKK,
    /// Finite-q {ã ⊗ k̃}.
    FiniteAK,
    /// Finite-q {k̃ ⊗ k̃'}.
    FiniteKK,
}

/// Inputs of a right-hand side: the two fields (as loops; constants as constant loops),
/// φ with a = e^{φH} (ã = e^{-φH} for the dual kinds), and (ε', k) for finite q.
#[derive(Clone, Debug)]
pub struct ExchangeArgs {
    pub first: LoopElement,
    pub second: LoopElement,
    pub phi: Vec<f64>,
    pub eps_k: Option<(f64, i64)>,
}

/// Arithmetic in which a right-hand side is assembled.
trait Ctx {
    type T: Clone;
    fn sep(&self, a: &LoopElement, b: &LoopElement) -> Self::T;
    fn konst(&self, t: &TensorOperator) -> Self::T;
    /// r + C cot((σ-σ')/2), in the context's truncation.
    fn kernel(&self) -> Result<Self::T>;
    /// -P r(σ'-σ) P: the same kernel truncated from the other side. Off the diagonal it
    /// equals `kernel`; the difference 2iC·D_N(σ-σ') is a contact term.
    fn kernel_reflected(&self) -> Result<Self::T>;
    fn felder(&self, a_alc: &[f64], eps: f64, k: i64) -> Result<Self::T>;
    fn mul(&self, a: &Self::T, b: &Self::T) -> Self::T;
    fn add(&self, a: &Self::T, b: &Self::T) -> Self::T;
    fn scale(&self, a: &Self::T, s: C) -> Self::T;
    fn zero(&self) -> Self::T;
}

struct Pointwise<'a> {
    cw: &'a CartanWeylBasis,
    s: f64,
    sp: f64,
    form: TrigForm,
}

impl Ctx for Pointwise<'_> {
    type T = TensorOperator;
    fn sep(&self, a: &LoopElement, b: &LoopElement) -> TensorOperator {
        TensorOperator::kron(&a.eval(self.s), &b.eval(self.sp))
    }
    fn konst(&self, t: &TensorOperator) -> TensorOperator {
        t.clone()
    }
    fn kernel(&self) -> Result<TensorOperator> {
        r_trig(self.cw, self.s - self.sp, self.form)
    }
    fn kernel_reflected(&self) -> Result<TensorOperator> {
        match self.form {
            TrigForm::Closed => self.kernel(),
            TrigForm::Series(_) => Ok(r_trig(self.cw, self.sp - self.s, self.form)?.swapped().scale(c(-1.0, 0.0))),
        }
    }
    fn felder(&self, a_alc: &[f64], eps: f64, k: i64) -> Result<TensorOperator> {
        felder_r(self.cw, a_alc, self.s - self.sp, eps, k)
    }
    fn mul(&self, a: &TensorOperator, b: &TensorOperator) -> TensorOperator {
        a * b
    }
    fn add(&self, a: &TensorOperator, b: &TensorOperator) -> TensorOperator {
        a + b
    }
    fn scale(&self, a: &TensorOperator, s: C) -> TensorOperator {
        a.scale(s)
    }
    fn zero(&self) -> TensorOperator {
        TensorOperator::zeros(self.cw.n)
    }
}

struct Modes<'a> {
    cw: &'a CartanWeylBasis,
    cutoff: i64,
}

impl Ctx for Modes<'_> {
    type T = Field2;
    fn sep(&self, a: &LoopElement, b: &LoopElement) -> Field2 {
        Field2::sep(a, b)
    }
    fn konst(&self, t: &TensorOperator) -> Field2 {
        Field2::constant(t)
    }
    fn kernel(&self) -> Result<Field2> {
        Ok(Field2::r_series(self.cw, self.cutoff))
    }
    fn kernel_reflected(&self) -> Result<Field2> {
        Ok(Field2::r_series(self.cw, self.cutoff).swapped().scale(c(-1.0, 0.0)))
    }
    fn felder(&self, _: &[f64], _: f64, _: i64) -> Result<Field2> {
        Err(Error::InvalidInput("elliptic kernel has no finite mode table"))
    }
    fn mul(&self, a: &Field2, b: &Field2) -> Field2 {
        a.mul(b)
    }
    fn add(&self, a: &Field2, b: &Field2) -> Field2 {
        a.add(b)
    }
    fn scale(&self, a: &Field2, s: C) -> Field2 {
        a.scale(s)
    }
    fn zero(&self) -> Field2 {
        Field2::zero(self.cw.n)
    }
}

fn cartan_casimir(cw: &CartanWeylBasis) -> TensorOperator {
    let mut t = TensorOperator::zeros(cw.n);
    for h in &cw.h {
        t.m += linalg::kron(h, h);
    }
    t
}

fn assemble<X: Ctx>(x: &X, cw: &CartanWeylBasis, kind: ExchangeKind, args: &ExchangeArgs) -> Result<X::T> {
    let i = c(0.0, 1.0);
    let n = cw.n;
    let r = canonical_r_tensor(cw);
    let cc = casimir_tensor(cw);
    let r_pic = x.konst(&(&r + &cc.scale(i)));
    let r_mic = x.konst(&(&r - &cc.scale(i)));
    let xy = x.sep(&args.first, &args.second);
    let id = LoopElement::identity(n);
    // X K - K' X with the two kernels given.
    let comm = |left: &X::T, right: &X::T| x.add(&x.mul(left, &xy), &x.scale(&x.mul(&xy, right), c(-1.0, 0.0)));
    // r(a) + C cot = kernel + (r(a) - r).
    let dyn_kernel = |phi: &[f64]| -> Result<X::T> {
        let shift = &r_dynamical(cw, phi)? - &r;
        Ok(x.add(&x.kernel()?, &x.konst(&shift)))
    };
    Ok(match kind {
        ExchangeKind::PiStar(v, pair) => {
            let k = x.kernel()?;
            match (v, pair) {
                (_, PairKind::UU) | (_, PairKind::DD) => comm(&k, &k),
                (PiStarVariant::Star, PairKind::DU) => comm(&k, &r_pic),
                (PiStarVariant::L, PairKind::DU) => comm(&k, &k),
                (PiStarVariant::Op, PairKind::DU) => comm(&r_pic, &k),
                (PiStarVariant::R, PairKind::DU) => comm(&r_pic, &r_pic),
            }
        }
        ExchangeKind::CurrentL | ExchangeKind::CurrentR => {
            let l1 = x.sep(&args.first, &id);
            let l2 = x.sep(&id, &args.second);
            let sym = x.add(&x.mul(&xy, &x.kernel()?), &x.mul(&x.kernel_reflected()?, &xy));
            let (ra, rb) = if kind == ExchangeKind::CurrentL { (&r_pic, &r_mic) } else { (&r_mic, &r_pic) };
            let cross = x.add(&x.mul(&x.mul(&l1, ra), &l2), &x.mul(&x.mul(&l2, rb), &l1));
            if kind == ExchangeKind::CurrentL {
                x.add(&sym, &x.scale(&cross, c(-1.0, 0.0)))
            } else {
                x.add(&x.scale(&sym, c(-1.0, 0.0)), &cross)
            }
        }
        ExchangeKind::ChiralAKa | ExchangeKind::DualAK => x.scale(&x.mul(&xy, &x.konst(&cartan_casimir(cw))), -i),
        ExchangeKind::ChiralKaKa | ExchangeKind::ChiralDD => comm(&x.kernel()?, &dyn_kernel(&args.phi)?),
        ExchangeKind::ChiralKaD => comm(&r_mic, &dyn_kernel(&args.phi)?),
        ExchangeKind::LambdaLambda => {
            let k = x.kernel()?;
            comm(&k, &k)
        }
        ExchangeKind::KLambda => x.mul(&x.kernel()?, &xy),
        ExchangeKind::ALambda => x.zero(),
        ExchangeKind::DualKK => {
            // r(ã^{-1}) with ã^{-1} = e^{φH}.
            x.add(&x.mul(&xy, &dyn_kernel(&args.phi)?), &x.mul(&x.kernel()?, &xy))
        }
        ExchangeKind::FiniteAK => {
            let (eps, _) = args.eps_k.ok_or(Error::InvalidInput("finite-q kind needs (eps, k)"))?;
            x.scale(&x.mul(&xy, &x.konst(&cartan_casimir(cw))), -i * eps)
        }
        ExchangeKind::FiniteKK => {
            let (eps, kk) = args.eps_k.ok_or(Error::InvalidInput("finite-q kind needs (eps, k)"))?;
            let a_alc: Vec<f64> = args.phi.iter().map(|p| -p / (kk as f64 * eps)).collect();
            let fr = x.felder(&a_alc, eps, kk)?;
            x.add(&x.mul(&xy, &fr), &x.scale(&x.mul(&x.kernel()?, &xy), c(eps, 0.0)))
        }
    })
}

/// The right-hand side at (σ, σ') with r(σ - σ') in closed or series form.
pub fn exchange_rhs(
    cw: &CartanWeylBasis,
    kind: ExchangeKind,
    args: &ExchangeArgs,
    sigma: f64,
    sigma_p: f64,
    form: TrigForm,
) -> Result<TensorOperator> {
    assemble(&Pointwise { cw, s: sigma, sp: sigma_p, form }, cw, kind, args)
}

/// The right-hand side as a double Fourier table with the truncated kernel r_N.
pub fn exchange_field(cw: &CartanWeylBasis, kind: ExchangeKind, args: &ExchangeArgs, cutoff: i64) -> Result<Field2> {
    assemble(&Modes { cw, cutoff }, cw, kind, args)
}

/// Largest window W on which a truncated bracket and a closed form with r_N coincide,
/// given the spread (mode width) of the fields entering the closed form.
pub fn consistent_window(cutoff: i64, spread: i64) -> i64 {
    (cutoff - spread).max(0)
}

// ---------------------------------------------------------------------------------------
// Matrix bracket algebra

/// Pairwise brackets needed to expand {AB ⊗ CD}.
#[derive(Clone, Debug)]
pub struct PairBrackets {
    pub bc: TensorOperator,
    pub bd: TensorOperator,
    pub ac: TensorOperator,
    pub ad: TensorOperator,
}

/// {AB ⊗ CD} = (A⊗1){B⊗C}(1⊗D) + (A⊗C){B⊗D} + {A⊗C}(B⊗D) + (1⊗C){A⊗D}(B⊗1).
pub fn leibniz_combine(br: &PairBrackets, a: &Mat, b: &Mat, cm: &Mat, d: &Mat) -> Result<TensorOperator> {
    let n = a.nrows();
    for m in [b, cm, d] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::InvalidDimension { expected: n, found: m.nrows() });
        }
    }
    for t in [&br.bc, &br.bd, &br.ac, &br.ad] {
        if t.n != n {
            return Err(Error::InvalidDimension { expected: n, found: t.n });
        }
    }
    let e = linalg::eye(n);
    let k = TensorOperator::kron;
    let t1 = &(&k(a, &e) * &br.bc) * &k(&e, d);
    let t2 = &k(a, cm) * &br.bd;
    let t3 = &br.ac * &k(b, d);
    let t4 = &(&k(&e, cm) * &br.ad) * &k(b, &e);
    Ok(&(&(&t1 + &t2) + &t3) + &t4)
}

/// {A ⊗ B^{-1}} = -(1 ⊗ B^{-1}){A ⊗ B}(1 ⊗ B^{-1}).
pub fn inverse_rule(ab: &TensorOperator, b: &Mat) -> Result<TensorOperator> {
    let bi = linalg::inverse(b).ok_or(Error::NearSingular { min_det: 0.0 })?;
    let x = TensorOperator::kron(&linalg::eye(b.nrows()), &bi);
    Ok(-&(&(&x * ab) * &x))
}

// ---------------------------------------------------------------------------------------
// Chart matrices at (e_R, a)

/// Coordinate order of the chart around (e_R, a): φ^μ, τ_μ, then β_α̂ and γ_α̂ in the order of
/// the positive affine roots with mode ≤ N.
#[derive(Clone, Debug)]
pub struct ChiralChart {
    pub rank: usize,
    pub labels: Vec<BasisLabel>,
}

impl ChiralChart {
    pub fn new(basis: &AffineBasis) -> Self {
        let labels = basis
            .entries
            .iter()
            .filter_map(|e| match e.label {
                BasisLabel::B(_) => Some(e.label),
                _ => None,
            })
            .collect();
        ChiralChart { rank: basis.cw.rank, labels }
    }

    pub fn dim(&self) -> usize {
        2 * self.rank + 2 * self.labels.len()
    }

    pub fn phi(&self, mu: usize) -> usize {
        mu
    }

    pub fn tau(&self, mu: usize) -> usize {
        self.rank + mu
    }

    pub fn beta(&self, j: usize) -> usize {
        2 * self.rank + j
    }

    pub fn gamma(&self, j: usize) -> usize {
        2 * self.rank + self.labels.len() + j
    }
}

/// Coefficient c_α̂ of dβ ∧ dγ in Ω_∞(e_R, a): a^{2α}/|α̂|² (n > 0), (a^{2α}-1)/|α̂|² (n = 0).
pub fn omega_coefficient(cw: &CartanWeylBasis, label: &BasisLabel, phi: &[f64]) -> Result<f64> {
    Ok(1.0 / pi_infty_weight(cw, label, phi)?)
}

pub fn omega_infty_matrix(basis: &AffineBasis, phi: &[f64]) -> Result<Mat> {
    let ch = ChiralChart::new(basis);
    let mut w = linalg::zeros(ch.dim());
    for mu in 0..ch.rank {
        w[(ch.phi(mu), ch.tau(mu))] = c(1.0, 0.0);
        w[(ch.tau(mu), ch.phi(mu))] = c(-1.0, 0.0);
    }
    for (j, l) in ch.labels.iter().enumerate() {
        let cf = omega_coefficient(&basis.cw, l, phi)?;
        w[(ch.beta(j), ch.gamma(j))] = c(cf, 0.0);
        w[(ch.gamma(j), ch.beta(j))] = c(-cf, 0.0);
    }
    Ok(w)
}

/// Π^∞(e_R, a) in the same chart; Π_R vanishes at e_R. Normalized so that Π·Ω = 1.
pub fn pi_infty_matrix(basis: &AffineBasis, phi: &[f64]) -> Result<Mat> {
    let ch = ChiralChart::new(basis);
    let mut p = linalg::zeros(ch.dim());
    for mu in 0..ch.rank {
        p[(ch.tau(mu), ch.phi(mu))] = c(1.0, 0.0);
        p[(ch.phi(mu), ch.tau(mu))] = c(-1.0, 0.0);
    }
    for (j, l) in ch.labels.iter().enumerate() {
        let w = pi_infty_weight(&basis.cw, l, phi)?;
        p[(ch.beta(j), ch.gamma(j))] = c(-w, 0.0);
        p[(ch.gamma(j), ch.beta(j))] = c(w, 0.0);
    }
    Ok(p)
}

// ---------------------------------------------------------------------------------------
// 2-forms evaluated on curves

/// A curve h ↦ (k(h), φ(h)) in G × A through the base point at h = 0.
pub type ChiralCurve<'a> = Box<dyn Fn(f64) -> Result<(LoopElement, Vec<f64>)> + 'a>;

/// A curve h ↦ s(h) in the double.
pub type DoubleCurve<'a> = Box<dyn Fn(f64) -> Result<LoopElement> + 'a>;

/// Tangent vector (k e^{hζ}, φ + h δφ) as a curve.
pub fn chiral_curve<'a>(k: &'a LoopElement, phi: &'a [f64], zeta: &'a LoopElement, dphi: &'a [f64]) -> ChiralCurve<'a> {
    Box::new(move |h| {
        let p: Vec<f64> = phi.iter().zip(dphi.iter()).map(|(a, b)| a + h * b).collect();
        Ok((k.mul(&loop_exp(zeta, h)), p))
    })
}

struct ChiralJet {
    /// k^{-1} dk.
    zeta: LoopElement,
    /// Σ δφ^μ H^μ.
    dphi_h: Mat,
    /// dΞ(χ) Ξ^{-1}(χ) for the relevant map.
    x: LoopElement,
}

fn phi_h(cw: &CartanWeylBasis, v: &[f64]) -> Mat {
    cw.cartan_element(v)
}

/// Jet of a curve; `dual` selects Ω̃ (Ξ_L at ã^{-1}k̃^{-1}) instead of Ω (Ξ_R at ka).
fn chiral_jet(cw: &CartanWeylBasis, curve: &ChiralCurve, fd: Fd, dual: bool) -> Result<ChiralJet> {
    let (k0, p0) = curve(0.0)?;
    let dk = fd_derivative(|h| Ok(curve(h)?.0), fd)?;
    let mut dphi = Vec::with_capacity(p0.len());
    for mu in 0..p0.len() {
        dphi.push(fd_scalar(|h| Ok(curve(h)?.1[mu]), fd)?);
    }
    let chi = |k: &LoopElement, p: &[f64]| -> Result<LoopElement> {
        let a = a_matrix(cw, p);
        if dual {
            let ai = linalg::inverse(&a).ok_or(Error::NearSingular { min_det: 0.0 })?;
            xi_l(&k.inverse()?.lmul_mat(&ai))
        } else {
            xi_r(&k.rmul_mat(&a))
        }
    };
    let x0 = chi(&k0, &p0)?;
    let dx = fd_derivative(
        |h| {
            let (k, p) = curve(h)?;
            chi(&k, &p)
        },
        fd,
    )?;
    Ok(ChiralJet { zeta: k0.inverse()?.mul(&dk), dphi_h: phi_h(cw, &dphi), x: dx.mul(&x0.inverse()?) })
}

fn omega_from_jets(a: &Mat, u: &ChiralJet, v: &ChiralJet) -> Result<f64> {
    let ai = linalg::inverse(a).ok_or(Error::NearSingular { min_det: 0.0 })?;
    let hu = LoopElement::constant(u.dphi_h.clone());
    let hv = LoopElement::constant(v.dphi_h.clone());
    let first = pairing_d(&hu, &v.zeta) - pairing_d(&hv, &u.zeta);
    let conj = |z: &LoopElement| z.lmul_mat(&ai).rmul_mat(a);
    let yv = hv.add(&conj(&v.zeta));
    let yu = hu.add(&conj(&u.zeta));
    let second = pairing_d(&u.x, &yv) - pairing_d(&v.x, &yu);
    Ok(0.5 * (first + second))
}

/// Ω_∞(k, a)(u, v) for two curves through (k, a).
pub fn omega_infty_eval(cw: &CartanWeylBasis, u: &ChiralCurve, v: &ChiralCurve, fd: Fd) -> Result<f64> {
    let (_, p0) = u(0.0)?;
    let a = a_matrix(cw, &p0);
    let ju = chiral_jet(cw, u, fd, false)?;
    let jv = chiral_jet(cw, v, fd, false)?;
    omega_from_jets(&a, &ju, &jv)
}

/// Ω̃_∞(k̃, ã)(u, v) for two curves through (k̃, ã); φ parametrizes ã = e^{φH} ∈ A_-.
pub fn omega_dual_eval(cw: &CartanWeylBasis, u: &ChiralCurve, v: &ChiralCurve, fd: Fd) -> Result<f64> {
    let (_, p0) = u(0.0)?;
    let a = a_matrix(cw, &p0);
    let ju = chiral_jet(cw, u, fd, true)?;
    let jv = chiral_jet(cw, v, fd, true)?;
    omega_from_jets(&a, &ju, &jv)
}

/// ω_S(u, v) = ½(dΛ_LΛ_L^{-1} ⌢ dΞ_LΞ_L^{-1})_D + ½(dΛ_RΛ_R^{-1} ⌢ dΞ_RΞ_R^{-1})_D on two
/// curves through s.
pub fn omega_s_eval(u: &DoubleCurve, v: &DoubleCurve, fd: Fd) -> Result<f64> {
    type Map = fn(&LoopElement) -> Result<LoopElement>;
    let maps: [Map; 4] = [lambda_l, xi_l, lambda_r, xi_r];
    let s0 = u(0.0)?;
    let mut base = Vec::with_capacity(4);
    for m in maps.iter() {
        base.push(m(&s0)?.inverse()?);
    }
    let jet = |cv: &DoubleCurve| -> Result<Vec<LoopElement>> {
        let mut out = Vec::with_capacity(4);
        for (m, b) in maps.iter().zip(base.iter()) {
            out.push(fd_derivative(|h| m(&cv(h)?), fd)?.mul(b));
        }
        Ok(out)
    };
    let ju = jet(u)?;
    let jv = jet(v)?;
    let wedge = |a: usize, b: usize| pairing_d(&ju[a], &jv[b]) - pairing_d(&jv[a], &ju[b]);
    Ok(0.5 * wedge(0, 1) + 0.5 * wedge(2, 3))
}

// ---------------------------------------------------------------------------------------
// Moment-map vector fields

/// Outcome of comparing a bracket-generated vector field with the expected translation field.
#[derive(Clone, Copy, Debug)]
pub struct FieldCheck {
    pub deviation: f64,
    pub scale: f64,
}

/// Π_D^∞(Λ_L^*ρ_ξ, ·) for ξ = T_R^j against -R_*ξ = -ξK, for every j of the truncated basis.
/// Returns the worst sup-norm deviation over j.
pub fn moment_field_left(basis: &AffineBasis, k: &LoopElement, fd: Fd) -> Result<FieldCheck> {
    let ll = lambda_l(k)?;
    let lli = ll.inverse()?;
    // c_i^j = (R_{t_i}Λ_L Λ_L^{-1}, T_R^j)_D; the L_{T_L^i} part vanishes by G_L-invariance.
    let mut rho = Vec::with_capacity(basis.len());
    for e in &basis.entries {
        let d = fd_derivative(|h| lambda_l(&translate(k, &e.t, Side::Right, h)), fd)?;
        rho.push(d.mul(&lli));
    }
    let mut lrho = Vec::with_capacity(basis.len());
    for e in &basis.entries {
        let d = fd_derivative(|h| lambda_l(&translate(k, &e.tl, Side::Left, h)), fd)?;
        lrho.push(d.mul(&lli));
    }
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for ej in &basis.entries {
        let mut v = LoopElement::zero(basis.n());
        for (i, ei) in basis.entries.iter().enumerate() {
            let cl = pairing_d(&lrho[i], &ej.tr);
            if cl != 0.0 {
                v = v.add(&k.mul(&ei.t).scale_re(cl));
            }
            let cr = pairing_d(&rho[i], &ej.tr);
            if cr != 0.0 {
                v = v.sub(&ei.tr.mul(k).scale_re(cr));
            }
        }
        let target = ej.tr.mul(k).neg();
        worst = worst.max(v.dist(&target));
        scale = scale.max(target.sup_norm());
    }
    Ok(FieldCheck { deviation: worst, scale })
}

/// Π_D^∞(Λ_R^*ρ_ξ, ·) for ξ = T_L^j against L_*ξ = Kξ, comparing modes |m| ≤ window.
pub fn moment_field_right(basis: &AffineBasis, k: &LoopElement, fd: Fd, window: i64) -> Result<FieldCheck> {
    let lr = lambda_r(k)?;
    let lri = lr.inverse()?;
    let mut lrho = Vec::with_capacity(basis.len());
    let mut rrho = Vec::with_capacity(basis.len());
    for e in &basis.entries {
        lrho.push(fd_derivative(|h| lambda_r(&translate(k, &e.tl, Side::Left, h)), fd)?.mul(&lri));
        rrho.push(fd_derivative(|h| lambda_r(&translate(k, &e.t, Side::Right, h)), fd)?.mul(&lri));
    }
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for ej in &basis.entries {
        let mut v = LoopElement::zero(basis.n());
        for (i, ei) in basis.entries.iter().enumerate() {
            let cl = pairing_d(&lrho[i], &ej.tl);
            if cl != 0.0 {
                v = v.add(&k.mul(&ei.t).scale_re(cl));
            }
            let cr = pairing_d(&rrho[i], &ej.tl);
            if cr != 0.0 {
                v = v.sub(&ei.tr.mul(k).scale_re(cr));
            }
        }
        let target = k.mul(&ej.tl);
        let d = v.sub(&target).band(-window, window);
        worst = worst.max(d.mode_l1_max());
        scale = scale.max(target.sup_norm());
    }
    Ok(FieldCheck { deviation: worst, scale })
}

impl LoopElement {
    /// Largest entry over all modes.
    pub fn mode_l1_max(&self) -> f64 {
        self.iter_modes().map(|(_, m)| linalg::max_abs(m)).fold(0.0, f64::max)
    }
}

/// Λ_L(s) via the G*·G_L factorization, exposed for callers holding only a curve.
pub fn lambda_l_of(s: &LoopElement) -> Result<LoopElement> {
    Ok(factor_gstar_gl(s)?.u)
}
