//! Block Krylov approximation of dominant left singular subspaces.
//!
//! The crate builds the block Krylov space generated by `AAᵀ` and `AX`,
//! extracts a rank-`k` approximation of the dominant left singular subspace
//! from it, and evaluates both sides of the structural bounds that relate
//! the quality of that approximation to principal angles, a Chebyshev
//! gap-amplifying polynomial and the alignment of the starting guess `X`.
//!
//! The linear algebra kernels are generic over [`Scalar`] (`f32`, `f64`);
//! the bound evaluators and the experiment harness work in `f64`.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angles;
pub mod bounds;
pub mod error;
pub mod gappoly;
pub mod harness;
pub mod krylov;
pub mod matcore;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use matcore::{Matrix, Norm};
pub use scalar::Scalar;

/// Double-precision dense matrix, the type used throughout the harness.
pub type DenseMatrix = Matrix<f64>;
pub type SvdFactors = matcore::SvdFactors<f64>;
pub type PartitionedSvd = matcore::PartitionedSvd<f64>;
pub type AngleSet = angles::AngleSet<f64>;
pub type GapPolynomial = gappoly::GapPolynomial<f64>;
pub type KrylovBasis = krylov::KrylovBasis<f64>;
pub type KrylovApproximation = krylov::KrylovApproximation<f64>;
