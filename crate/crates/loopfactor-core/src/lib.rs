//! Numerics for the q → ∞ limit of the quasitriangular WZW model on SU(n): polynomial loop
//! groups, their factorizations, trigonometric/dynamical/elliptic r-matrices, Poisson
//! bivector brackets and the chiral duality.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]

extern crate alloc;

pub mod brackets;
pub mod dynamics;
pub mod error;
pub mod factorization;
pub mod fft;
pub mod lie_core;
pub mod linalg;
pub mod loop_algebra;
pub mod rmatrix;
pub mod sampling;
pub mod tensor;

pub use error::{Error, Result};
pub use lie_core::{build_cartan_weyl, CartanWeylBasis, Root};
pub use linalg::{Mat, C};
pub use loop_algebra::{AffineBasis, LoopElement};
pub use tensor::TensorOperator;
