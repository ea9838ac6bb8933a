//! Dense real linear algebra: matrix type, thin SVD and QR, generalized
//! inverses, norms and the least-squares residual.

mod matrix;
mod partition;
mod pinv;
mod qr;
mod svd;

pub use matrix::{axpy, dot, norm2, Matrix, Norm};
pub use partition::{partition_svd, partition_svd_with_tol, PartitionedSvd};
pub use pinv::{ls_residual, one_two_three_inverse, penrose_residuals, pinv, pinv_from_svd, range_basis};
pub use qr::{invert_upper, orthonormal_complement, solve_upper, thin_qr, ThinQr};
pub use svd::{default_rank_tol, norm, norm_two, singular_values, thin_svd, SvdFactors};
