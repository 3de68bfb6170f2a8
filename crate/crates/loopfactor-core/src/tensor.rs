//! Elements of End(V)⊗End(V) as n²×n² matrices, row index (i,k) and column index (j,l).

use crate::linalg::{self, c, Mat, C};
use core::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct TensorOperator {
    pub n: usize,
    pub m: Mat,
}

impl TensorOperator {
    pub fn zeros(n: usize) -> Self {
        TensorOperator { n, m: Mat::zeros(n * n, n * n) }
    }

    pub fn identity(n: usize) -> Self {
        TensorOperator { n, m: Mat::identity(n * n, n * n) }
    }

    /// A ⊗ B.
    pub fn kron(a: &Mat, b: &Mat) -> Self {
        TensorOperator { n: a.nrows(), m: linalg::kron(a, b) }
    }

    /// Swap operator P(x⊗y) = y⊗x.
    pub fn swap_op(n: usize) -> Self {
        let mut m = Mat::zeros(n * n, n * n);
        for i in 0..n {
            for k in 0..n {
                m[(i * n + k, k * n + i)] = c(1.0, 0.0);
            }
        }
        TensorOperator { n, m }
    }

    /// P X P, exchanging the two tensor factors.
    pub fn swapped(&self) -> Self {
        let p = Self::swap_op(self.n);
        TensorOperator { n: self.n, m: &p.m * &self.m * &p.m }
    }

    /// Entry X^{ik,jl}.
    pub fn get(&self, i: usize, k: usize, j: usize, l: usize) -> C {
        self.m[(i * self.n + k, j * self.n + l)]
    }

    pub fn scale(&self, s: C) -> Self {
        TensorOperator { n: self.n, m: &self.m * s }
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.m)
    }

    pub fn dist(&self, other: &Self) -> f64 {
        linalg::max_abs(&(&self.m - &other.m))
    }
}

impl Add for &TensorOperator {
    type Output = TensorOperator;
    fn add(self, o: &TensorOperator) -> TensorOperator {
        TensorOperator { n: self.n, m: &self.m + &o.m }
    }
}

impl Sub for &TensorOperator {
    type Output = TensorOperator;
    fn sub(self, o: &TensorOperator) -> TensorOperator {
        TensorOperator { n: self.n, m: &self.m - &o.m }
    }
}

impl Mul for &TensorOperator {
    type Output = TensorOperator;
    fn mul(self, o: &TensorOperator) -> TensorOperator {
        TensorOperator { n: self.n, m: &self.m * &o.m }
    }
}

impl Neg for &TensorOperator {
    type Output = TensorOperator;
    fn neg(self) -> TensorOperator {
        TensorOperator { n: self.n, m: -&self.m }
    }
}
