//! Generalized inverses and the least-squares residual.

use super::matrix::{Matrix, Norm};
use super::qr::{invert_upper, solve_upper};
use super::svd::{norm, thin_svd, SvdFactors};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Moore-Penrose inverse. Singular values at or below `rank_tol` are
/// treated as zero; `None` selects `max(m,n)·ε·σ_max`.
pub fn pinv<T: Scalar>(a: &Matrix<T>, rank_tol: Option<T>) -> Result<Matrix<T>> {
    let (m, n) = a.shape();
    if a.is_empty() {
        return Ok(Matrix::zeros(n, m));
    }
    let f = thin_svd(a)?;
    Ok(pinv_from_svd(&f, rank_tol.unwrap_or_else(|| f.default_rank_tol())))
}

pub fn pinv_from_svd<T: Scalar>(f: &SvdFactors<T>, tol: T) -> Matrix<T> {
    let r = f.rank(tol);
    let inv: Vec<T> = f.sigma[..r].iter().map(|&s| T::one() / s).collect();
    f.v.columns(0..r).scale_columns(&inv).matmul_t(&f.u.columns(0..r))
}

/// Orthonormal basis of `range(a)` under the default rank rule.
pub fn range_basis<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    if a.is_empty() {
        return Ok(Matrix::zeros(a.rows(), 0));
    }
    let f = thin_svd(a)?;
    let r = f.rank(f.default_rank_tol());
    Ok(f.u.columns(0..r))
}

/// `‖(I − A A†) B‖` in the requested norm, the optimal residual of
/// `min_X ‖B − A X‖`.
pub fn ls_residual<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, which: Norm) -> Result<T> {
    if a.rows() != b.rows() {
        return Err(Error::dim(
            "ls_residual",
            format!("A has {} rows, B has {}", a.rows(), b.rows()),
        ));
    }
    let x = pinv(a, None)?.matmul(b);
    norm(&b.sub(&a.matmul(&x)), which)
}

/// The `(1,2,3)` inverse `X_k⁺ = R⁻¹ (X_k R⁻¹)†` of a full-row-rank `X_k`
/// that was obtained as `Q_k R` from a thin QR of the starting block.
///
/// `X_k X_k⁺ = I`, and the first three Penrose conditions hold; `X_k⁺ X_k`
/// is in general not symmetric.
pub fn one_two_three_inverse<T: Scalar>(x_k: &Matrix<T>, r: &Matrix<T>) -> Result<Matrix<T>> {
    let s = r.rows();
    if r.cols() != s || x_k.cols() != s {
        return Err(Error::dim(
            "one_two_three_inverse",
            format!("X_k is {}x{}, R is {}x{}", x_k.rows(), x_k.cols(), r.rows(), r.cols()),
        ));
    }
    let r_inv = invert_upper(r)?;
    // Q_k = X_k R⁻¹, row by row: solve Rᵀ q = x.
    let rt = r.transpose();
    let mut q_k = Matrix::zeros(x_k.rows(), s);
    for i in 0..x_k.rows() {
        let row = solve_lower(&rt, &x_k.row(i))?;
        for (j, v) in row.into_iter().enumerate() {
            q_k[(i, j)] = v;
        }
    }
    let q_pinv = pinv(&q_k, None)?;
    Ok(r_inv.matmul(&q_pinv))
}

fn solve_lower<T: Scalar>(l: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    // Reverse the index order to reuse the upper-triangular solver.
    let n = l.rows();
    let flipped = Matrix::from_fn(n, n, |i, j| l[(n - 1 - i, n - 1 - j)]);
    let rb: Vec<T> = b.iter().rev().copied().collect();
    let y = solve_upper(&flipped, &rb).map_err(|e| match e {
        Error::Singular { index } => Error::Singular { index: n - 1 - index },
        other => other,
    })?;
    Ok(y.into_iter().rev().collect())
}

/// Residuals of the four Penrose conditions for a candidate inverse `g` of `a`:
/// `‖AGA − A‖`, `‖GAG − G‖`, `‖(AG)ᵀ − AG‖`, `‖(GA)ᵀ − GA‖` (Frobenius).
pub fn penrose_residuals<T: Scalar>(a: &Matrix<T>, g: &Matrix<T>) -> [T; 4] {
    let ag = a.matmul(g);
    let ga = g.matmul(a);
    [
        ag.matmul(a).sub(a).norm_fro(),
        ga.matmul(g).sub(g).norm_fro(),
        ag.transpose().sub(&ag).norm_fro(),
        ga.transpose().sub(&ga).norm_fro(),
    ]
}
