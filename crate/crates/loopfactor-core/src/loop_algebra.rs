//! Matrix-valued Laurent polynomials on the circle, the affine bases and the pairing (·,·)_D.

use crate::error::{Error, Result};
use crate::fft::fft_in_place;
use crate::lie_core::{CartanWeylBasis, Root};
use crate::linalg::{self, c, Mat, C};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Default grid size M.
pub const DEFAULT_GRID: usize = 256;
/// Modes at the ends of a table below this fraction of the largest mode are dropped.
pub const TRIM_REL: f64 = 1e-16;
/// Relative level treated as round-off when cleaning factorization outputs.
pub const CLEAN_REL: f64 = 1e-14;
const MAX_GRID: usize = 1 << 14;

/// γ(σ) = Σ_k γ_k e^{ikσ}, stored as a dense mode table starting at `lo`.
#[derive(Clone, Debug)]
pub struct LoopElement {
    n: usize,
    lo: i64,
    modes: Vec<Mat>,
    grid: usize,
}

pub fn next_pow2(x: usize) -> usize {
    x.max(1).next_power_of_two()
}

impl LoopElement {
    pub fn zero(n: usize) -> Self {
        LoopElement { n, lo: 0, modes: vec![linalg::zeros(n)], grid: DEFAULT_GRID }
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(linalg::eye(n))
    }

    pub fn constant(m: Mat) -> Self {
        let n = m.nrows();
        LoopElement { n, lo: 0, modes: vec![m], grid: DEFAULT_GRID }
    }

    /// m e^{ikσ}.
    pub fn monomial(m: Mat, k: i64) -> Self {
        let n = m.nrows();
        LoopElement { n, lo: k, modes: vec![m], grid: DEFAULT_GRID }
    }

    /// Dense table: modes[j] multiplies e^{i(lo+j)σ}.
    pub fn from_modes(n: usize, lo: i64, modes: Vec<Mat>) -> Self {
        let mut l = if modes.is_empty() {
            Self::zero(n)
        } else {
            LoopElement { n, lo, modes, grid: DEFAULT_GRID }
        };
        l.trim();
        l
    }

    /// From (k, γ_k) pairs; repeated k are summed.
    pub fn from_pairs(n: usize, pairs: &[(i64, Mat)]) -> Self {
        if pairs.is_empty() {
            return Self::zero(n);
        }
        let lo = pairs.iter().map(|p| p.0).min().unwrap();
        let hi = pairs.iter().map(|p| p.0).max().unwrap();
        let mut modes = vec![linalg::zeros(n); (hi - lo + 1) as usize];
        for (k, m) in pairs {
            modes[(k - lo) as usize] += m;
        }
        Self::from_modes(n, lo, modes)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.modes.len() as i64 - 1
    }

    /// Number of stored modes.
    pub fn width(&self) -> usize {
        self.modes.len()
    }

    /// Largest |k| with a stored mode.
    pub fn degree(&self) -> i64 {
        self.lo.abs().max(self.hi().abs())
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn with_grid(mut self, m: usize) -> Self {
        self.grid = next_pow2(m);
        self
    }

    pub fn mode(&self, k: i64) -> Mat {
        if k < self.lo || k > self.hi() {
            linalg::zeros(self.n)
        } else {
            self.modes[(k - self.lo) as usize].clone()
        }
    }

    pub fn mode_ref(&self, k: i64) -> Option<&Mat> {
        if k < self.lo || k > self.hi() {
            None
        } else {
            Some(&self.modes[(k - self.lo) as usize])
        }
    }

    /// (k, γ_k) for all stored modes.
    pub fn iter_modes(&self) -> impl Iterator<Item = (i64, &Mat)> {
        self.modes.iter().enumerate().map(move |(j, m)| (self.lo + j as i64, m))
    }

    /// Largest entry modulus over all modes.
    pub fn scale(&self) -> f64 {
        self.modes.iter().map(linalg::max_abs).fold(0.0, f64::max)
    }

    /// Σ_k max|γ_k|, an upper bound for the sup norm of every entry.
    pub fn mode_l1(&self) -> f64 {
        self.modes.iter().map(linalg::max_abs).sum()
    }

    fn trim(&mut self) {
        let tol = TRIM_REL * self.scale();
        while self.modes.len() > 1 && linalg::max_abs(self.modes.last().unwrap()) <= tol {
            self.modes.pop();
        }
        let mut drop = 0;
        while drop + 1 < self.modes.len() && linalg::max_abs(&self.modes[drop]) <= tol {
            drop += 1;
        }
        if drop > 0 {
            self.modes.drain(0..drop);
            self.lo += drop as i64;
        }
        if self.modes.len() == 1 && linalg::max_abs(&self.modes[0]) == 0.0 {
            self.lo = 0;
        }
    }

    /// End modes below CLEAN_REL relative to the largest mode removed.
    pub fn cleaned(&self) -> Self {
        self.trimmed_abs(CLEAN_REL * self.scale())
    }

    /// Drop end modes smaller than `tol` (absolute).
    pub fn trimmed_abs(&self, tol: f64) -> Self {
        let mut l = self.clone();
        while l.modes.len() > 1 && linalg::max_abs(l.modes.last().unwrap()) <= tol {
            l.modes.pop();
        }
        while l.modes.len() > 1 && linalg::max_abs(&l.modes[0]) <= tol {
            l.modes.remove(0);
            l.lo += 1;
        }
        l
    }

    pub fn eval(&self, sigma: f64) -> Mat {
        let mut acc = linalg::zeros(self.n);
        for (k, m) in self.iter_modes() {
            let a = k as f64 * sigma;
            acc += m * c(libm::cos(a), libm::sin(a));
        }
        acc
    }

    /// Samples γ(2πj/M), j = 0..M. Exact for any M (aliasing only folds phases).
    pub fn samples(&self, m: usize) -> Vec<Mat> {
        assert!(m.is_power_of_two());
        let n = self.n;
        let mut out = vec![linalg::zeros(n); m];
        let mut buf = vec![C::new(0.0, 0.0); m];
        for r in 0..n {
            for col in 0..n {
                for b in buf.iter_mut() {
                    *b = C::new(0.0, 0.0);
                }
                for (k, g) in self.iter_modes() {
                    buf[k.rem_euclid(m as i64) as usize] += g[(r, col)];
                }
                fft_in_place(&mut buf, true);
                for (j, v) in buf.iter().enumerate() {
                    out[j][(r, col)] = *v;
                }
            }
        }
        out
    }

    /// Modes lo..lo+M-1 recovered from M samples.
    pub fn from_samples(samples: &[Mat], lo: i64) -> Self {
        let m = samples.len();
        assert!(m.is_power_of_two());
        let n = samples[0].nrows();
        let mut modes = vec![linalg::zeros(n); m];
        let mut buf = vec![C::new(0.0, 0.0); m];
        let inv = 1.0 / m as f64;
        for r in 0..n {
            for col in 0..n {
                for (j, s) in samples.iter().enumerate() {
                    buf[j] = s[(r, col)];
                }
                fft_in_place(&mut buf, false);
                for (idx, mode) in modes.iter_mut().enumerate() {
                    let k = lo + idx as i64;
                    mode[(r, col)] = buf[k.rem_euclid(m as i64) as usize] * inv;
                }
            }
        }
        let mut l = LoopElement { n, lo, modes, grid: m.max(DEFAULT_GRID) };
        l.trim();
        l
    }

    /// Grid large enough that the check grid resolves this loop.
    pub fn check_grid(&self) -> usize {
        self.grid.max(next_pow2(4 * self.degree() as usize + 4))
    }

    /// max over the check grid of the largest entry modulus.
    pub fn sup_norm(&self) -> f64 {
        self.samples(self.check_grid()).iter().map(linalg::max_abs).fold(0.0, f64::max)
    }

    /// Sup-norm distance, computed on modes (an upper bound that is tight for short tables)
    /// and on the grid; the larger value is returned.
    pub fn dist(&self, other: &Self) -> f64 {
        let d = self.sub(other);
        d.sup_norm().max(d.iter_modes().map(|(_, m)| linalg::max_abs(m)).fold(0.0, f64::max))
    }

    pub fn scale_by(&self, s: C) -> Self {
        let mut l = self.clone();
        for m in l.modes.iter_mut() {
            *m *= s;
        }
        l
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale_by(c(s, 0.0))
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(self.n, other.n);
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let mut modes = vec![linalg::zeros(self.n); (hi - lo + 1) as usize];
        for (k, m) in self.iter_modes() {
            modes[(k - lo) as usize] += m;
        }
        let s = c(sign, 0.0);
        for (k, m) in other.iter_modes() {
            modes[(k - lo) as usize] += m * s;
        }
        let mut l = LoopElement { n: self.n, lo, modes, grid: self.grid.max(other.grid) };
        l.trim();
        l
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    pub fn neg(&self) -> Self {
        self.scale_re(-1.0)
    }

    /// Pointwise adjoint γ(σ)^†: mode k becomes γ_{-k}^†.
    pub fn adjoint(&self) -> Self {
        let modes: Vec<Mat> = self.modes.iter().rev().map(|m| m.adjoint()).collect();
        LoopElement { n: self.n, lo: -self.hi(), modes, grid: self.grid }
    }

    /// σ ↦ γ(-σ).
    pub fn reversed(&self) -> Self {
        let modes: Vec<Mat> = self.modes.iter().rev().cloned().collect();
        LoopElement { n: self.n, lo: -self.hi(), modes, grid: self.grid }
    }

    /// σ ↦ γ(σ - τ): mode k picks up e^{-ikτ}.
    pub fn rotated(&self, tau: f64) -> Self {
        let mut l = self.clone();
        for (j, m) in l.modes.iter_mut().enumerate() {
            let k = (self.lo + j as i64) as f64;
            *m *= c(libm::cos(k * tau), -libm::sin(k * tau));
        }
        l
    }

    pub fn lmul_mat(&self, a: &Mat) -> Self {
        let mut l = self.clone();
        for m in l.modes.iter_mut() {
            *m = a * &*m;
        }
        l.trim();
        l
    }

    pub fn rmul_mat(&self, a: &Mat) -> Self {
        let mut l = self.clone();
        for m in l.modes.iter_mut() {
            *m = &*m * a;
        }
        l.trim();
        l
    }

    /// Exact Cauchy product.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let lo = self.lo + other.lo;
        let w = self.width() + other.width() - 1;
        let grid = self.grid.max(other.grid);
        if self.width() * other.width() <= 1024 {
            let mut modes = vec![linalg::zeros(self.n); w];
            for (i, a) in self.modes.iter().enumerate() {
                for (j, b) in other.modes.iter().enumerate() {
                    modes[i + j] += a * b;
                }
            }
            let mut l = LoopElement { n: self.n, lo, modes, grid };
            l.trim();
            return l;
        }
        let m = next_pow2(w);
        let sa = self.samples(m);
        let sb = other.samples(m);
        let prod: Vec<Mat> = sa.iter().zip(sb.iter()).map(|(a, b)| a * b).collect();
        let mut l = Self::from_samples(&prod, lo);
        l.grid = grid;
        l
    }

    /// Pointwise map on an M-point grid with modes recovered in [-M/2, M/2).
    pub fn pointwise<F: Fn(&Mat) -> Mat>(&self, m: usize, f: F) -> Self {
        let s = self.samples(m);
        let out: Vec<Mat> = s.iter().map(f).collect();
        let mut l = Self::from_samples(&out, -(m as i64) / 2);
        l.grid = self.grid;
        l
    }

    /// Energy in the outer quarter of the mode window of a pointwise result; used to
    /// decide whether the grid resolved it.
    fn tail(&self, m: usize) -> f64 {
        let q = (m / 4) as i64;
        self.iter_modes().filter(|(k, _)| k.abs() >= q).map(|(_, g)| linalg::max_abs(g)).fold(0.0, f64::max)
    }

    /// Pointwise function with grid refinement until the outer modes are negligible.
    pub fn pointwise_adaptive<F: Fn(&Mat) -> Option<Mat>>(&self, start: usize, f: F) -> Result<Self> {
        let mut m = next_pow2(start.max(16));
        loop {
            let s = self.samples(m);
            let mut out = Vec::with_capacity(m);
            for x in &s {
                match f(x) {
                    Some(y) => out.push(y),
                    None => return Err(Error::NearSingular { min_det: self.min_abs_det() }),
                }
            }
            let mut l = Self::from_samples(&out, -(m as i64) / 2);
            l.grid = self.grid;
            let scale = l.scale().max(1e-300);
            if l.tail(m) <= 1e-15 * scale || m >= MAX_GRID {
                return Ok(l);
            }
            m *= 2;
        }
    }

    /// Pointwise inverse γ(σ)^{-1}.
    pub fn inverse(&self) -> Result<Self> {
        Ok(self.inverse_raw()?.cleaned())
    }

    fn inverse_raw(&self) -> Result<Self> {
        if self.width() == 1 {
            let m = linalg::inverse(&self.modes[0]).ok_or(Error::NearSingular { min_det: 0.0 })?;
            return Ok(LoopElement::monomial(m, -self.lo).with_grid(self.grid));
        }
        let min_det = self.min_abs_det();
        if min_det < 1e-12 * libm::pow(self.scale(), self.n as f64).max(1e-300) {
            return Err(Error::NearSingular { min_det });
        }
        let start = 4 * (self.n * self.width() + 4);
        self.pointwise_adaptive(start, linalg::inverse)
    }

    /// Pointwise exponential exp(X(σ)).
    pub fn exp(&self) -> Self {
        let start = 8 * (self.degree() as usize + 2) + (4.0 * self.mode_l1()) as usize * (self.degree() as usize + 1);
        self.pointwise_adaptive(start, |x| Some(linalg::expm(x))).unwrap()
    }

    pub fn min_abs_det(&self) -> f64 {
        self.samples(self.check_grid())
            .iter()
            .map(|m| linalg::det(m).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Modes with |k| > cutoff removed; returns the removed residue (max entry).
    pub fn truncated(&self, cutoff: i64) -> (Self, f64) {
        let mut residue: f64 = 0.0;
        let mut pairs = Vec::new();
        for (k, m) in self.iter_modes() {
            if k.abs() > cutoff {
                residue = residue.max(linalg::max_abs(m));
            } else {
                pairs.push((k, m.clone()));
            }
        }
        let mut l = Self::from_pairs(self.n, &pairs);
        l.grid = self.grid;
        (l, residue)
    }

    /// Keep only modes in [lo, hi].
    pub fn band(&self, lo: i64, hi: i64) -> Self {
        let pairs: Vec<(i64, Mat)> =
            self.iter_modes().filter(|(k, _)| *k >= lo && *k <= hi).map(|(k, m)| (k, m.clone())).collect();
        let mut l = Self::from_pairs(self.n, &pairs);
        l.grid = self.grid;
        l
    }

    /// Entry (i, j) as a scalar mode list.
    pub fn entry_modes(&self, i: usize, j: usize) -> Vec<(i64, C)> {
        self.iter_modes().map(|(k, m)| (k, m[(i, j)])).collect()
    }
}

/// Product truncated to |k| ≤ out_cutoff with residue check.
pub fn loop_multiply(a: &LoopElement, b: &LoopElement, out_cutoff: i64) -> Result<LoopElement> {
    if a.n() != b.n() {
        return Err(Error::InvalidDimension { expected: a.n(), found: b.n() });
    }
    let p = a.mul(b);
    let (t, residue) = p.truncated(out_cutoff);
    if residue > 1e-10 * p.scale().max(1.0) {
        return Err(Error::TruncationOverflow { residue });
    }
    Ok(t)
}

/// Inverse truncated to |k| ≤ out_cutoff with residue check.
pub fn loop_inverse(a: &LoopElement, out_cutoff: i64) -> Result<LoopElement> {
    let inv = a.inverse()?;
    let (t, residue) = inv.truncated(out_cutoff);
    if residue > 1e-10 * inv.scale().max(1.0) {
        return Err(Error::TruncationOverflow { residue });
    }
    Ok(t)
}

/// (x|y) = Σ_k Tr(x_k y_{-k}).
pub fn pairing_loop(x: &LoopElement, y: &LoopElement) -> C {
    let mut s = C::new(0.0, 0.0);
    for (k, xm) in x.iter_modes() {
        if let Some(ym) = y.mode_ref(-k) {
            s += (xm * ym).trace();
        }
    }
    s
}

/// (x, y)_D = Im (x|y), unit normalization.
pub fn pairing_d(x: &LoopElement, y: &LoopElement) -> f64 {
    pairing_loop(x, y).im
}

/// κ: mode m scaled by e^{-mkε}.
pub fn kappa_twist(x: &LoopElement, eps: f64, k: i64) -> Result<LoopElement> {
    let mut pairs = Vec::new();
    for (m, g) in x.iter_modes() {
        let e = -(m * k) as f64 * eps;
        if e > 700.0 {
            return Err(Error::Overflow);
        }
        pairs.push((m, g * c(libm::exp(e), 0.0)));
    }
    let mut l = LoopElement::from_pairs(x.n(), &pairs);
    l.grid = x.grid();
    Ok(l)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subgroup {
    GStar,
    GL,
    GR,
    D,
}

#[derive(Clone, Copy, Debug)]
pub struct Membership {
    pub member: bool,
    /// Worst violation of the defining conditions.
    pub worst: f64,
}

/// Relative tolerance on forbidden modes.
pub const MODE_TOL: f64 = 1e-10;
/// Tolerance on AN diagonal entries and unitarity.
pub const GROUP_TOL: f64 = 1e-9;

fn an_defect(g: &Mat) -> f64 {
    let n = g.nrows();
    let mut d: f64 = 0.0;
    for i in 0..n {
        let z = g[(i, i)];
        d = d.max(z.im.abs());
        if z.re <= GROUP_TOL {
            d = d.max(1.0);
        }
        for j in 0..i {
            d = d.max(g[(i, j)].norm());
        }
    }
    d
}

pub fn membership(x: &LoopElement, which: Subgroup) -> Membership {
    let scale = x.scale().max(1.0);
    let worst = match which {
        Subgroup::GStar => {
            let neg = x.iter_modes().filter(|(k, _)| *k < 0).map(|(_, m)| linalg::max_abs(m)).fold(0.0, f64::max);
            (neg / (MODE_TOL * scale)).max(an_defect(&x.mode(0)) / GROUP_TOL) * GROUP_TOL
        }
        Subgroup::GR => {
            let pos = x.iter_modes().filter(|(k, _)| *k > 0).map(|(_, m)| linalg::max_abs(m)).fold(0.0, f64::max);
            (pos / (MODE_TOL * scale)).max(linalg::unitarity_defect(&x.mode(0)) / GROUP_TOL) * GROUP_TOL
        }
        Subgroup::GL => x
            .samples(x.check_grid())
            .iter()
            .map(linalg::unitarity_defect)
            .fold(0.0, f64::max),
        Subgroup::D => {
            let d = x.min_abs_det();
            if d > 1e-10 * libm::pow(scale, x.n() as f64) {
                0.0
            } else {
                1.0
            }
        }
    };
    Membership { member: worst <= GROUP_TOL, worst }
}

/// Label of an affine Cartan–Weyl generator E_m^α or H_m^μ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    E(Root),
    H(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AffineGenerator {
    pub kind: GenKind,
    pub mode: i64,
}

impl AffineGenerator {
    /// α̂ > 0 iff m > 0, or m = 0 and α > 0.
    pub fn positive(&self) -> bool {
        match self.kind {
            GenKind::E(r) => self.mode > 0 || (self.mode == 0 && r.is_positive()),
            GenKind::H(_) => self.mode > 0,
        }
    }

    pub fn len2(&self) -> f64 {
        2.0
    }

    /// E^α̂ as a loop.
    pub fn e_loop(&self, b: &CartanWeylBasis) -> LoopElement {
        match self.kind {
            GenKind::E(r) => LoopElement::monomial(b.e(r), self.mode),
            GenKind::H(mu) => LoopElement::monomial(b.h[mu].clone(), self.mode),
        }
    }

    /// E^{-α̂}.
    pub fn e_neg_loop(&self, b: &CartanWeylBasis) -> LoopElement {
        match self.kind {
            GenKind::E(r) => LoopElement::monomial(b.e(r.neg()), -self.mode),
            GenKind::H(mu) => LoopElement::monomial(b.h[mu].clone(), -self.mode),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisLabel {
    /// t_μ, T^μ.
    Cartan(usize),
    /// b_α̂, B^α̂.
    B(AffineGenerator),
    /// c_α̂, C^α̂.
    C(AffineGenerator),
}

impl BasisLabel {
    pub fn mode(&self) -> i64 {
        match self {
            BasisLabel::Cartan(_) => 0,
            BasisLabel::B(g) | BasisLabel::C(g) => g.mode,
        }
    }
}

/// One index i of the dual bases: t_i ∈ g*, T_L^i ∈ g_L, T_R^i ∈ g_R.
#[derive(Clone, Debug)]
pub struct BasisEntry {
    pub label: BasisLabel,
    pub t: LoopElement,
    pub tl: LoopElement,
    pub tr: LoopElement,
}

#[derive(Clone, Debug)]
pub struct AffineBasis {
    pub cutoff: i64,
    pub cw: CartanWeylBasis,
    pub entries: Vec<BasisEntry>,
}

/// Positive affine roots with |m| ≤ cutoff, ordered by mode then label.
pub fn positive_affine_roots(cw: &CartanWeylBasis, cutoff: i64) -> Vec<AffineGenerator> {
    let mut v = Vec::new();
    for r in cw.positive_roots() {
        v.push(AffineGenerator { kind: GenKind::E(*r), mode: 0 });
    }
    for m in 1..=cutoff {
        for r in &cw.roots {
            v.push(AffineGenerator { kind: GenKind::E(*r), mode: m });
        }
        for mu in 0..cw.rank {
            v.push(AffineGenerator { kind: GenKind::H(mu), mode: m });
        }
    }
    v
}

impl AffineBasis {
    pub fn new(cw: &CartanWeylBasis, cutoff: i64) -> Self {
        let s2 = 1.0 / libm::sqrt(2.0);
        let mut entries = Vec::new();
        for mu in 0..cw.rank {
            let h = cw.h[mu].clone();
            let ih = &h * c(0.0, 1.0);
            entries.push(BasisEntry {
                label: BasisLabel::Cartan(mu),
                t: LoopElement::constant(h),
                tl: LoopElement::constant(ih.clone()),
                tr: LoopElement::constant(ih),
            });
        }
        for g in positive_affine_roots(cw, cutoff) {
            let e = g.e_loop(cw);
            let f = g.e_neg_loop(cw);
            let w = g.len2() * s2;
            let bl = e.add(&f).scale_by(c(0.0, s2));
            let cl = e.sub(&f).scale_re(s2);
            let (br, cr) = if g.mode > 0 {
                (f.scale_by(c(0.0, s2)), f.scale_re(-s2))
            } else {
                (bl.clone(), cl.clone())
            };
            entries.push(BasisEntry { label: BasisLabel::B(g), t: e.scale_re(w), tl: bl, tr: br });
            entries.push(BasisEntry { label: BasisLabel::C(g), t: e.scale_by(c(0.0, -w)), tl: cl, tr: cr });
        }
        AffineBasis { cutoff, cw: cw.clone(), entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n(&self) -> usize {
        self.cw.n
    }

    fn check_cutoff(&self, x: &LoopElement) -> Result<()> {
        let tol = MODE_TOL * x.scale().max(1e-300);
        for (k, m) in x.iter_modes() {
            if k.abs() > self.cutoff && linalg::max_abs(m) > tol {
                return Err(Error::CutoffExceeded { cutoff: self.cutoff, mode: k });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projector {
    /// Onto g_L along g*.
    PL,
    /// Onto g_R along g*.
    PR,
    /// Onto g* along g_L.
    PLStar,
    /// Onto g* along g_R.
    PRStar,
}

/// Dual-basis projectors p_L, p_R, p_L*, p_R* on the truncated double algebra.
pub fn project(basis: &AffineBasis, x: &LoopElement, which: Projector) -> Result<LoopElement> {
    basis.check_cutoff(x)?;
    let mut acc = LoopElement::zero(basis.n());
    for e in &basis.entries {
        let (coef, target) = match which {
            Projector::PL => (pairing_d(x, &e.t), &e.tl),
            Projector::PR => (pairing_d(x, &e.t), &e.tr),
            Projector::PLStar => (pairing_d(x, &e.tl), &e.t),
            Projector::PRStar => (pairing_d(x, &e.tr), &e.t),
        };
        if coef != 0.0 {
            acc = acc.add(&target.scale_re(coef));
        }
    }
    Ok(acc)
}

/// Untruncated projectors computed mode by mode; agree with `project` on the truncation.
pub fn project_exact(x: &LoopElement, which: Projector) -> LoopElement {
    let n = x.n();
    let mut pairs: Vec<(i64, Mat)> = Vec::new();
    let lo = x.lo().min(-x.hi());
    let hi = x.hi().max(-x.lo());
    for k in lo..=hi {
        let xk = x.mode(k);
        let xmk = x.mode(-k);
        // g_L part: anti-Hermitian completion of the negative modes plus the compact zero-mode part.
        let gl = if k < 0 {
            xk.clone()
        } else if k > 0 {
            -xmk.adjoint()
        } else {
            compact_part(&xk)
        };
        // g_R part: all non-positive modes, compact part of the zero mode.
        let gr = if k < 0 {
            xk.clone()
        } else if k > 0 {
            linalg::zeros(n)
        } else {
            compact_part(&xk)
        };
        let v = match which {
            Projector::PL => gl,
            Projector::PR => gr,
            Projector::PLStar => &xk - gl,
            Projector::PRStar => &xk - gr,
        };
        pairs.push((k, v));
    }
    LoopElement::from_pairs(n, &pairs)
}

/// Component in su(n) of the splitting sl(n,C) = su(n) ⊕ an.
pub fn compact_part(x: &Mat) -> Mat {
    let n = x.nrows();
    let mut k = linalg::zeros(n);
    for i in 0..n {
        k[(i, i)] = c(0.0, x[(i, i)].im);
        for j in 0..i {
            k[(i, j)] = x[(i, j)];
            k[(j, i)] = -x[(i, j)].conj();
        }
    }
    k
}

/// Grid quadrature (1/2π)∫Tr(x(σ)y(σ))dσ, an independent route to (x|y).
pub fn pairing_quadrature(x: &LoopElement, y: &LoopElement, m: usize) -> C {
    let sx = x.samples(m);
    let sy = y.samples(m);
    let mut s = C::new(0.0, 0.0);
    for (a, b) in sx.iter().zip(sy.iter()) {
        s += (a * b).trace();
    }
    s / m as f64
}

/// 2π j / M.
pub fn grid_angle(j: usize, m: usize) -> f64 {
    2.0 * PI * j as f64 / m as f64
}
