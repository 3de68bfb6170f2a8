//! Small dense complex linear algebra on top of nalgebra.

use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C = Complex64;
pub type Mat = DMatrix<C>;

#[inline]
pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn zeros(n: usize) -> Mat {
    Mat::zeros(n, n)
}

pub fn eye(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// Matrix unit e_ij.
pub fn unit(n: usize, i: usize, j: usize) -> Mat {
    let mut m = zeros(n);
    m[(i, j)] = c(1.0, 0.0);
    m
}

pub fn adjoint(a: &Mat) -> Mat {
    a.adjoint()
}

/// Kronecker product with row index (i,k) -> i*n_b + k.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn fro(a: &Mat) -> f64 {
    libm::sqrt(a.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

pub fn trace(a: &Mat) -> C {
    a.trace()
}

pub fn det(a: &Mat) -> C {
    a.clone().determinant()
}

pub fn inverse(a: &Mat) -> Option<Mat> {
    a.clone().try_inverse()
}

/// Distance from unitarity, max |a a^† - I|.
pub fn unitarity_defect(a: &Mat) -> f64 {
    max_abs(&(a * a.adjoint() - eye(a.nrows())))
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
pub fn expm(a: &Mat) -> Mat {
    let n = a.nrows();
    let norm = fro(a);
    let mut s = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        s += 1;
    }
    let x = a * c(scale, 0.0);
    let mut term = eye(n);
    let mut sum = eye(n);
    for k in 1..=18 {
        term = &term * &x * c(1.0 / k as f64, 0.0);
        sum += &term;
        if max_abs(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// QR with the phases of diag(R) moved into Q so that R has a real positive diagonal.
pub fn qr_positive(a: &Mat) -> (Mat, Mat) {
    let n = a.nrows();
    let qr = a.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..n {
        let d = r[(i, i)];
        let m = d.norm();
        if m > 0.0 {
            let ph = d / m;
            for row in 0..n {
                q[(row, i)] *= ph;
            }
            for col in 0..n {
                r[(i, col)] /= ph;
            }
        }
    }
    (q, r)
}

/// g = r q with r upper triangular with positive diagonal and q unitary.
pub fn rq_positive(g: &Mat) -> Option<(Mat, Mat)> {
    let gi = inverse(g)?;
    let (q1, r1) = qr_positive(&gi);
    let r = inverse(&r1)?;
    Some((r, q1.adjoint()))
}

/// SVD with singular values sorted in decreasing order: a = u diag(s) v^†.
pub fn svd_sorted(a: &Mat) -> (Mat, Vec<f64>, Mat) {
    let n = a.nrows();
    let svd = a.clone().svd(true, true);
    let u0 = svd.u.unwrap();
    let vt0 = svd.v_t.unwrap();
    let s0: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut idx: Vec<usize> = (0..s0.len()).collect();
    idx.sort_by(|&i, &j| s0[j].partial_cmp(&s0[i]).unwrap_or(core::cmp::Ordering::Equal));
    let mut u = zeros(n);
    let mut v = zeros(n);
    let mut s = Vec::with_capacity(n);
    for (new, &old) in idx.iter().enumerate() {
        s.push(s0[old]);
        for r in 0..n {
            u[(r, new)] = u0[(r, old)];
            v[(r, new)] = vt0[(old, r)].conj();
        }
    }
    (u, s, v)
}

/// Lower Cholesky factor of a Hermitian positive-definite matrix.
pub fn cholesky_lower(a: &Mat) -> Option<Mat> {
    nalgebra::Cholesky::new(a.clone()).map(|ch| ch.unpack())
}

/// Least-squares solution of a x = b together with the singular-value range of a.
pub struct LstSq {
    pub x: Mat,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub residual: f64,
}

pub fn lstsq(a: &Mat, b: &Mat) -> LstSq {
    let svd = a.clone().svd(true, true);
    let sig: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sig.iter().cloned().fold(0.0, f64::max);
    let smin = sig.iter().cloned().fold(f64::INFINITY, f64::min);
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let cut = 1e-14 * smax;
    let utb = u.adjoint() * b;
    let mut y = Mat::zeros(sig.len(), b.ncols());
    for i in 0..sig.len() {
        if sig[i] > cut {
            for j in 0..b.ncols() {
                y[(i, j)] = utb[(i, j)] / sig[i];
            }
        }
    }
    let x = vt.adjoint() * y;
    let residual = max_abs(&(a * &x - b));
    LstSq { x, sigma_max: smax, sigma_min: smin, residual }
}
