//! Iwasawa/Cartan decompositions and the two global loop factorizations.

use crate::error::{Error, Result};
use crate::loop_algebra::{membership, LoopElement, Subgroup};
use crate::linalg::{self, c, Mat};
use alloc::vec;
use alloc::vec::Vec;

/// Spectral factorization gives up beyond this many scalar rows in the Toeplitz matrix.
const MAX_TOEPLITZ_ROWS: usize = 1600;
const STATIONARY_TOL: f64 = 1e-13;
/// Galerkin unknown degree cap.
const MAX_GALERKIN_DEGREE: usize = 192;
/// σ_min/σ_max below this means the Galerkin system is rank deficient.
pub const RANK_TOL: f64 = 1e-9;
const COND_WARN: f64 = 1e12;

#[derive(Clone, Debug)]
pub struct FactorPair {
    pub u: LoopElement,
    pub v: LoopElement,
    /// Sup-norm reconstruction error.
    pub residual: f64,
    /// Toeplitz block count (spectral route) or Galerkin degree.
    pub size: usize,
    /// σ_max/σ_min of the Galerkin system; 1 for the spectral route.
    pub cond: f64,
}

/// Pointwise g = k·an with k unitary and an upper triangular with positive diagonal.
pub fn iwasawa_pointwise(g: &LoopElement) -> Result<(LoopElement, LoopElement)> {
    let start = 4 * g.check_grid();
    let k = g.pointwise_adaptive(start, |x| {
        if linalg::det(x).norm() < 1e-14 {
            None
        } else {
            Some(linalg::qr_positive(x).0)
        }
    })?;
    let an = g.pointwise_adaptive(start, |x| Some(linalg::qr_positive(x).1))?;
    Ok((k, an))
}

#[derive(Clone, Debug)]
pub struct CartanConst {
    pub ul: Mat,
    /// Diagonal of a, strictly decreasing where distinct.
    pub a: Vec<f64>,
    pub ur: Mat,
    /// Phases removed from the columns of u_l and u_r by the torus gauge.
    pub phases: Vec<f64>,
    /// Smallest relative gap between consecutive singular values.
    pub gap: f64,
    pub degenerate: bool,
}

impl CartanConst {
    pub fn a_mat(&self) -> Mat {
        Mat::from_diagonal(&nalgebra::DVector::from_iterator(self.a.len(), self.a.iter().map(|&x| c(x, 0.0))))
    }
}

/// Relative gap below which the singular spectrum is flagged as degenerate.
pub const WALL_GAP: f64 = 1e-6;

/// g = u_l · a · u_r^{-1} with u_l, u_r ∈ SU(n), a positive diagonal sorted decreasing.
/// Gauge: in columns 0..n-1 of u_r the largest-modulus entry is real positive; the last
/// column phase is fixed by det u_r = 1.
pub fn cartan_const(g: &Mat) -> Result<CartanConst> {
    let n = g.nrows();
    if g.ncols() != n {
        return Err(Error::InvalidDimension { expected: n, found: g.ncols() });
    }
    let d = linalg::det(g);
    if (d - c(1.0, 0.0)).norm() > 1e-8 * d.norm().max(1.0) {
        return Err(Error::InvalidInput("cartan_const requires det g = 1"));
    }
    let (mut u, s, mut v) = linalg::svd_sorted(g);
    let mut phases = Vec::with_capacity(n);
    for j in 0..n {
        let ph = if j + 1 < n {
            let mut best = 0;
            for i in 0..n {
                if v[(i, j)].norm() > v[(best, j)].norm() + 1e-12 {
                    best = i;
                }
            }
            v[(best, j)].arg()
        } else {
            linalg::det(&v).arg()
        };
        let w = c(libm::cos(ph), -libm::sin(ph));
        for i in 0..n {
            v[(i, j)] *= w;
            u[(i, j)] *= w;
        }
        phases.push(ph);
    }
    let mut gap = f64::INFINITY;
    for i in 0..n - 1 {
        gap = gap.min((s[i] - s[i + 1]) / s[i]);
    }
    Ok(CartanConst { ul: u, a: s, ur: v, phases, gap, degenerate: gap < WALL_GAP })
}

/// Block Toeplitz Cholesky (Bauer) for the outer factor of a positive loop P = u u^†,
/// u with non-negative modes and u^{-1} likewise. Returns u with lower-triangular u_0
/// and the block count used.
pub fn spectral_factor(p: &LoopElement) -> Result<(LoopElement, usize)> {
    let n = p.n();
    let d = p.degree() as usize;
    if d == 0 {
        let l = linalg::cholesky_lower(&p.mode(0)).ok_or(Error::SpectralFactorizationDiverged { blocks: 1 })?;
        return Ok((LoopElement::constant(l).with_grid(p.grid()), 1));
    }
    let scale = p.scale();
    let pk: Vec<Mat> = (0..=d as i64).map(|k| p.mode(k)).collect();
    let mut m = n * d + 4;
    loop {
        if m * n > MAX_TOEPLITZ_ROWS {
            return Err(Error::SpectralFactorizationDiverged { blocks: m });
        }
        let mut t = Mat::zeros(m * n, m * n);
        for bt in 0..m {
            for bs in 0..m {
                let k = bt as i64 - bs as i64;
                if k.unsigned_abs() as usize > d {
                    continue;
                }
                let blk = if k >= 0 { pk[k as usize].clone() } else { pk[(-k) as usize].adjoint() };
                t.view_mut((bt * n, bs * n), (n, n)).copy_from(&blk);
            }
        }
        let l = linalg::cholesky_lower(&t).ok_or(Error::SpectralFactorizationDiverged { blocks: m })?;
        let row = |r: usize, j: usize| -> Mat { l.view((r * n, (r - j) * n), (n, n)).into_owned() };
        let mut diff: f64 = 0.0;
        let half = m / 2;
        for j in 0..half {
            diff = diff.max(linalg::max_abs(&(row(m - 1, j) - row(m - 2, j))));
        }
        if diff <= STATIONARY_TOL * scale.max(1.0) {
            let modes: Vec<Mat> = (0..half).map(|j| row(m - 1, j)).collect();
            let u = LoopElement::from_modes(n, 0, modes).with_grid(p.grid());
            let tail = u.mode_ref((half - 1) as i64).map(linalg::max_abs).unwrap_or(0.0);
            if tail <= 1e-12 * u.scale() {
                return Ok((u, m));
            }
        }
        m *= 2;
    }
}

/// l = u·v with u ∈ G*, v ∈ G_L.
pub fn factor_gstar_gl(l: &LoopElement) -> Result<FactorPair> {
    let p = l.mul(&l.adjoint());
    let (u1, blocks) = spectral_factor(&p)?;
    // u1_0 = R Q with R ∈ AN; u = u1 Q^† has zero mode R.
    let (_, q) = linalg::rq_positive(&u1.mode(0)).ok_or(Error::NearSingular { min_det: 0.0 })?;
    let u = u1.rmul_mat(&q.adjoint()).cleaned();
    let v = u.inverse()?.mul(l).cleaned();
    let residual = u.mul(&v).dist(l);
    Ok(FactorPair { u, v, residual, size: blocks, cond: 1.0 })
}

/// K = v_R·u with v_R ∈ G_R, u ∈ G*, by a Galerkin Riemann–Hilbert solve.
pub fn factor_gr_gstar(k: &LoopElement) -> Result<FactorPair> {
    let n = k.n();
    let lo = k.lo();
    let scale = k.scale().max(1e-300);
    if lo >= 0 {
        return finish_gr(k, &LoopElement::identity(n), 0, 1.0);
    }
    let dv = (-lo) as usize;
    let mut deg = ((n - 1) * dv + 2).max(4);
    loop {
        let neq = deg + dv;
        // Unknown row blocks X_{-1..-deg}; equations for modes m = lo-deg .. -1.
        let mut bt = Mat::zeros(n * neq, n * deg);
        let mut rhs = Mat::zeros(n * neq, n);
        for b in 0..neq {
            let m = lo - deg as i64 + b as i64;
            for a in 0..deg {
                let j = -(a as i64) - 1;
                let km = k.mode(m - j).transpose();
                bt.view_mut((b * n, a * n), (n, n)).copy_from(&km);
            }
            let r = -k.mode(m).transpose();
            rhs.view_mut((b * n, 0), (n, n)).copy_from(&r);
        }
        let sol = linalg::lstsq(&bt, &rhs);
        let ratio = sol.sigma_min / sol.sigma_max;
        if ratio < RANK_TOL {
            return Err(Error::NotInDomain { sigma_ratio: ratio, residual: sol.residual });
        }
        let mut pairs = vec![(0i64, linalg::eye(n))];
        for a in 0..deg {
            let blk = sol.x.view((a * n, 0), (n, n)).transpose();
            pairs.push((-(a as i64) - 1, blk));
        }
        let x = LoopElement::from_pairs(n, &pairs).with_grid(k.grid());
        let xk = x.mul(k);
        let neg = xk.iter_modes().filter(|(m, _)| *m < 0).map(|(_, g)| linalg::max_abs(g)).fold(0.0, f64::max);
        if neg <= 1e-12 * xk.scale().max(scale) {
            return finish_gr(k, &x, deg, 1.0 / ratio);
        }
        if deg >= MAX_GALERKIN_DEGREE {
            return Err(Error::NotInDomain { sigma_ratio: ratio, residual: neg });
        }
        deg *= 2;
    }
}

fn finish_gr(k: &LoopElement, x: &LoopElement, deg: usize, cond: f64) -> Result<FactorPair> {
    let u1 = x.mul(k).band(0, i64::MAX);
    let v1 = x.inverse()?.band(i64::MIN, 0);
    let (q, _) = linalg::qr_positive(&u1.mode(0));
    let u = u1.lmul_mat(&q.adjoint()).cleaned();
    let v = v1.rmul_mat(&q).cleaned();
    let residual = v.mul(&u).dist(k);
    if cond > COND_WARN {
        return Err(Error::IllConditioned { cond });
    }
    Ok(FactorPair { u, v, residual, size: deg, cond })
}

/// The four maps Λ_L, Λ_R, Ξ_L, Ξ_R at K.
#[derive(Clone, Debug)]
pub struct LambdaXi {
    pub lambda_l: LoopElement,
    pub xi_r: LoopElement,
    pub lambda_r: Result<LoopElement>,
    pub xi_l: Result<LoopElement>,
}

pub fn lambda_l(k: &LoopElement) -> Result<LoopElement> {
    Ok(factor_gstar_gl(k)?.u)
}

/// Ξ_R(K) = v_L^{-1}, computed as the adjoint of the unitary factor.
pub fn xi_r(k: &LoopElement) -> Result<LoopElement> {
    Ok(factor_gstar_gl(k)?.v.adjoint())
}

pub fn lambda_r(k: &LoopElement) -> Result<LoopElement> {
    factor_gr_gstar(k)?.u.inverse()
}

pub fn xi_l(k: &LoopElement) -> Result<LoopElement> {
    Ok(factor_gr_gstar(k)?.v)
}

pub fn lambda_xi(k: &LoopElement) -> Result<LambdaXi> {
    let left = factor_gstar_gl(k)?;
    let right = factor_gr_gstar(k);
    let (lambda_r, xi_l) = match right {
        Ok(fp) => (fp.u.inverse(), Ok(fp.v)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    Ok(LambdaXi { lambda_l: left.u, xi_r: left.v.adjoint(), lambda_r, xi_l })
}

#[derive(Clone, Debug)]
pub struct InftyCartanTriple {
    pub k_l: LoopElement,
    pub a: Vec<f64>,
    pub k_r: LoopElement,
    /// Torus phases applied by the gauge of `cartan_const`.
    pub phase_fix: Vec<f64>,
    pub degenerate: bool,
    pub residual: f64,
}

impl InftyCartanTriple {
    pub fn a_mat(&self) -> Mat {
        diag_mat(&self.a)
    }
}

pub fn diag_mat(d: &[f64]) -> Mat {
    let n = d.len();
    let mut m = linalg::zeros(n);
    for i in 0..n {
        m[(i, i)] = c(d[i], 0.0);
    }
    m
}

/// Splits s = k_l a Ξ_R(k_r a).
pub fn infty_cartan(s: &LoopElement) -> Result<InftyCartanTriple> {
    // (i) s = u_- u_0, u_- with non-positive modes, u_0 unitary with u_0(0) = I.
    let p = s.mul(&s.adjoint()).reversed();
    let (up, _) = spectral_factor(&p)?;
    let um1 = up.reversed();
    let u01 = um1.inverse()?.mul(s);
    let c0 = u01.eval(0.0);
    let u0 = u01.lmul_mat(&c0.adjoint());
    let um = um1.rmul_mat(&c0);
    // (ii) u_- = u_N u'.
    let uprime = um.mode(0);
    let un = um.rmul_mat(&linalg::inverse(&uprime).ok_or(Error::NearSingular { min_det: 0.0 })?);
    // (iii) u' = u_l a u_r^{-1}.
    let cc = cartan_const(&uprime)?;
    // (iv)
    let k_l = un.rmul_mat(&cc.ul);
    let g_r = u0.adjoint().rmul_mat(&cc.ur);
    // (v) k_r = Ξ_L(a g_r^{-1})^{-1}.
    let a = cc.a_mat();
    let target = g_r.adjoint().lmul_mat(&a);
    let xi = factor_gr_gstar(&target)?.v;
    let k_r = xi.inverse()?.band(i64::MIN, 0);
    let mut t = InftyCartanTriple { k_l, a: cc.a.clone(), k_r, phase_fix: cc.phases, degenerate: cc.degenerate, residual: 0.0 };
    t.residual = compose_phi(&t.k_l, &t.a, &t.k_r)?.dist(s);
    Ok(t)
}

/// φ(k_l, a, k_r) = k_l a Ξ_R(k_r a).
pub fn compose_phi(k_l: &LoopElement, a: &[f64], k_r: &LoopElement) -> Result<LoopElement> {
    let am = diag_mat(a);
    let xr = xi_r(&k_r.rmul_mat(&am))?;
    Ok(k_l.rmul_mat(&am).mul(&xr))
}

/// Both factorization verdicts for a point, used as the S_∞ certificate.
pub fn in_s_infty(k: &LoopElement) -> bool {
    factor_gr_gstar(k).is_ok()
}

/// Membership of both factors of a pair, worst violation.
pub fn pair_membership(fp: &FactorPair, vgroup: Subgroup) -> f64 {
    membership(&fp.u, Subgroup::GStar).worst.max(membership(&fp.v, vgroup).worst)
}
