use super::matrix::Matrix;
use super::qr::orthonormal_complement;
use super::svd::SvdFactors;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// SVD split at index `k` into the dominant part and its complement.
///
/// `u_kp` and `v_kp` span the full orthogonal complements of `u_k` and `v_k`
/// (`m − k` and `n − k` columns). `sigma_kp` lists the trailing singular
/// values of the thin factorization; complement directions beyond it carry
/// singular value zero.
#[derive(Debug, Clone)]
pub struct PartitionedSvd<T> {
    pub k: usize,
    pub u_k: Matrix<T>,
    pub u_kp: Matrix<T>,
    pub sigma_k: Vec<T>,
    pub sigma_kp: Vec<T>,
    pub v_k: Matrix<T>,
    pub v_kp: Matrix<T>,
}

impl<T: Scalar> PartitionedSvd<T> {
    pub fn m(&self) -> usize {
        self.u_k.rows()
    }

    pub fn n(&self) -> usize {
        self.v_k.rows()
    }

    /// `σ_k`, the smallest dominant singular value.
    pub fn sigma_last(&self) -> T {
        self.sigma_k[self.k - 1]
    }

    /// `σ_{k+1}`, zero when the thin factorization has no trailing values.
    pub fn sigma_next(&self) -> T {
        self.sigma_kp.first().copied().unwrap_or_else(T::zero)
    }

    /// All singular values `σ_1 … σ_r` in order.
    pub fn sigma(&self) -> Vec<T> {
        self.sigma_k.iter().chain(&self.sigma_kp).copied().collect()
    }

    /// Trailing left singular vectors with non-trivial singular values.
    pub fn u_tail(&self) -> Matrix<T> {
        self.u_kp.columns(0..self.sigma_kp.len())
    }

    pub fn v_tail(&self) -> Matrix<T> {
        self.v_kp.columns(0..self.sigma_kp.len())
    }

    /// Best rank-`i` approximation `A_i = U_i Σ_i V_iᵀ` for `i ≤ k`.
    pub fn best_rank(&self, i: usize) -> Matrix<T> {
        let i = i.min(self.k);
        self.u_k
            .columns(0..i)
            .scale_columns(&self.sigma_k[..i])
            .matmul_t(&self.v_k.columns(0..i))
    }
}

/// Splits `f` at `k` using the default rank tolerance.
pub fn partition_svd<T: Scalar>(f: &SvdFactors<T>, k: usize) -> Result<PartitionedSvd<T>> {
    partition_svd_with_tol(f, k, f.default_rank_tol())
}

/// Splits `f` at `k`. Requires `1 ≤ k < rank` and `σ_k − σ_{k+1} > tol`.
pub fn partition_svd_with_tol<T: Scalar>(
    f: &SvdFactors<T>,
    k: usize,
    tol: T,
) -> Result<PartitionedSvd<T>> {
    let rank = f.rank(tol);
    if k == 0 || k >= rank {
        return Err(Error::Rank(format!(
            "target rank k={k} must satisfy 1 <= k < rank(A)={rank}"
        )));
    }
    let (s_k, s_next) = (f.sigma[k - 1], f.sigma[k]);
    if s_k - s_next <= tol {
        return Err(Error::Gap(format!(
            "dominant subspace ill-posed: sigma_{k}={s_k} and sigma_{}={s_next} coincide",
            k + 1
        )));
    }
    let r = f.sigma.len();
    let u_kp = f.u.columns(k..r).hcat(&orthonormal_complement(&f.u))?;
    let v_kp = f.v.columns(k..r).hcat(&orthonormal_complement(&f.v))?;
    Ok(PartitionedSvd {
        k,
        u_k: f.u.columns(0..k),
        u_kp,
        sigma_k: f.sigma[..k].to_vec(),
        sigma_kp: f.sigma[k..].to_vec(),
        v_k: f.v.columns(0..k),
        v_kp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::thin_svd;
    use crate::testutil::gaussian;

    fn diag_factors(sigma: &[f64]) -> SvdFactors<f64> {
        let n = sigma.len();
        SvdFactors {
            u: Matrix::identity(n),
            sigma: sigma.to_vec(),
            v: Matrix::identity(n),
        }
    }

    #[test]
    fn simple_split() {
        let p = partition_svd(&diag_factors(&[3.0, 2.0, 1.0]), 1).unwrap();
        assert_eq!(p.sigma_k, vec![3.0]);
        assert_eq!(p.sigma_kp, vec![2.0, 1.0]);
        assert_eq!(p.u_kp.cols(), 2);
    }

    #[test]
    fn zero_gap_is_rejected() {
        let err = partition_svd(&diag_factors(&[2.0, 2.0, 1.0]), 1).unwrap_err();
        assert!(matches!(err, Error::Gap(_)));
    }

    #[test]
    fn numerically_rank_two() {
        let err = partition_svd(&diag_factors(&[5.0, 4.0, 1e-16]), 2).unwrap_err();
        assert!(matches!(err, Error::Rank(_)));
        assert!(partition_svd(&diag_factors(&[5.0, 4.0, 1e-16]), 1).is_ok());
        assert!(matches!(
            partition_svd(&diag_factors(&[5.0, 4.0, 1.0]), 0),
            Err(Error::Rank(_))
        ));
    }

    #[test]
    fn blocks_are_orthogonal_and_complete() {
        for &(m, n) in &[(9usize, 5usize), (5, 9)] {
            let a = gaussian(m, n, 3);
            let p = partition_svd(&thin_svd(&a).unwrap(), 2).unwrap();
            assert_eq!(p.u_kp.cols(), m - 2);
            assert_eq!(p.v_kp.cols(), n - 2);
            assert!(p.u_k.t_matmul(&p.u_kp).norm_fro() <= 1e-12);
            assert!(p.v_k.t_matmul(&p.v_kp).norm_fro() <= 1e-12);
            assert!(p.u_k.hcat(&p.u_kp).unwrap().orthonormality_defect() < 1e-12);
            assert!(p.v_k.hcat(&p.v_kp).unwrap().orthonormality_defect() < 1e-12);
            assert!(p.sigma_last() > p.sigma_next());
        }
    }
}
