//! Thin singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! Columns of a working copy are rotated pairwise until every pair is
//! orthogonal to working precision. Column norms are then the singular
//! values, the normalized columns the left singular vectors, and the
//! accumulated rotations the right singular vectors. The method is slower
//! than bidiagonalization but delivers singular values with high relative
//! accuracy and exactly orthogonal factors to rounding.

use super::matrix::{dot, norm2, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U·diag(sigma)·Vᵀ` with `r = min(m, n)` columns in `U` and `V`.
#[derive(Debug, Clone)]
pub struct SvdFactors<T> {
    pub u: Matrix<T>,
    pub sigma: Vec<T>,
    pub v: Matrix<T>,
}

impl<T: Scalar> SvdFactors<T> {
    pub fn reconstruct(&self) -> Matrix<T> {
        self.u.scale_columns(&self.sigma).matmul_t(&self.v)
    }

    pub fn sigma_max(&self) -> T {
        self.sigma.first().copied().unwrap_or_else(T::zero)
    }

    /// Default rank threshold `max(m,n)·ε·σ_max`.
    pub fn default_rank_tol(&self) -> T {
        default_rank_tol(self.u.rows(), self.v.rows(), self.sigma_max())
    }

    /// Number of singular values strictly above `tol`.
    pub fn rank(&self, tol: T) -> usize {
        self.sigma.iter().filter(|&&s| s > tol).count()
    }

    /// Best rank-`i` approximation `U_i Σ_i V_iᵀ`.
    pub fn truncated(&self, i: usize) -> Matrix<T> {
        let i = i.min(self.sigma.len());
        self.u
            .columns(0..i)
            .scale_columns(&self.sigma[..i])
            .matmul_t(&self.v.columns(0..i))
    }
}

pub fn default_rank_tol<T: Scalar>(m: usize, n: usize, sigma_max: T) -> T {
    T::from_usize_lossy(m.max(n)) * T::epsilon() * sigma_max
}

/// Thin SVD with the sign convention that the largest-magnitude entry of
/// each left singular vector is positive.
pub fn thin_svd<T: Scalar>(a: &Matrix<T>) -> Result<SvdFactors<T>> {
    if !a.is_finite() {
        return Err(Error::Contract("thin_svd input has non-finite entries".into()));
    }
    let (m, n) = a.shape();
    let (u, sigma, v) = if m >= n {
        let (u, s, v) = jacobi(a, true)?;
        (u, s, v.expect("requested right vectors"))
    } else {
        let (v, s, u) = jacobi(&a.transpose(), true)?;
        (u.expect("requested right vectors"), s, v)
    };
    let mut f = SvdFactors { u, sigma, v };
    normalize_signs(&mut f);
    Ok(f)
}

/// Singular values only, in non-increasing order.
pub fn singular_values<T: Scalar>(a: &Matrix<T>) -> Result<Vec<T>> {
    if !a.is_finite() {
        return Err(Error::Contract("singular_values input has non-finite entries".into()));
    }
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let (m, n) = a.shape();
    let (_, s, _) = if m >= n {
        jacobi(a, false)?
    } else {
        jacobi(&a.transpose(), false)?
    };
    Ok(s)
}

/// Spectral norm, computed as the largest singular value.
pub fn norm_two<T: Scalar>(a: &Matrix<T>) -> Result<T> {
    if a.is_empty() {
        return Ok(T::zero());
    }
    if a.cols() == 1 || a.rows() == 1 {
        return Ok(a.norm_fro());
    }
    Ok(singular_values(a)?.first().copied().unwrap_or_else(T::zero))
}

/// Norm selected at run time.
pub fn norm<T: Scalar>(a: &Matrix<T>, which: super::Norm) -> Result<T> {
    match which {
        super::Norm::Two => norm_two(a),
        super::Norm::Fro => Ok(a.norm_fro()),
    }
}

type Factors<T> = (Matrix<T>, Vec<T>, Option<Matrix<T>>);

/// Core routine on a tall (`m ≥ n`) matrix. Returns `(U, σ, V)` sorted by
/// non-increasing `σ`, with `U` completed to orthonormal columns where
/// `σ = 0`.
fn jacobi<T: Scalar>(
    a: &Matrix<T>,
    want_v: bool,
) -> Result<Factors<T>> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut g = a.clone();
    let mut v = want_v.then(|| Matrix::<T>::identity(n));
    let tol = T::epsilon() * T::from_usize_lossy(m).sqrt();

    let mut norms: Vec<T> = (0..n).map(|j| dot(g.col(j), g.col(j))).collect();
    let mut converged = n < 2;
    for _sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha == T::zero() || beta == T::zero() {
                    continue;
                }
                let gamma = dot(g.col(p), g.col(q));
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                {
                    let (gp, gq) = g.col_pair_mut(p, q);
                    rotate(gp, gq, c, s);
                }
                if let Some(v) = v.as_mut() {
                    let (vp, vq) = v.col_pair_mut(p, q);
                    rotate(vp, vq, c, s);
                }
                norms[p] = dot(g.col(p), g.col(p));
                norms[q] = dot(g.col(q), g.col(q));
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NonConvergence { sweeps: MAX_SWEEPS });
    }

    let sigma: Vec<T> = (0..n).map(|j| norm2(g.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap().then(i.cmp(&j)));

    let sorted_sigma: Vec<T> = order.iter().map(|&j| sigma[j]).collect();
    let mut u = Matrix::zeros(m, n);
    for (dst, &src) in order.iter().enumerate() {
        let s = sigma[src];
        if s > T::zero() {
            for (o, &x) in u.col_mut(dst).iter_mut().zip(g.col(src)) {
                *o = x / s;
            }
        }
    }
    complete_columns(&mut u, &sorted_sigma);
    let v = v.map(|v| {
        let mut out = Matrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            out.col_mut(dst).copy_from_slice(v.col(src));
        }
        out
    });
    Ok((u, sorted_sigma, v))
}

#[inline]
fn rotate<T: Scalar>(x: &mut [T], y: &mut [T], c: T, s: T) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let a = *xi;
        let b = *yi;
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// Replaces columns that carry no direction (zero singular value, or lost
/// to underflow) by unit vectors orthogonalized against the others.
fn complete_columns<T: Scalar>(u: &mut Matrix<T>, sigma: &[T]) {
    let (m, n) = u.shape();
    let half = T::lit(0.5);
    for j in 0..n {
        let ok = sigma[j] > T::zero() && (norm2(u.col(j)) - T::one()).abs() < half;
        if ok {
            continue;
        }
        let mut best: Option<Vec<T>> = None;
        let mut best_norm = T::zero();
        for e in 0..m {
            let mut cand = vec![T::zero(); m];
            cand[e] = T::one();
            for _pass in 0..2 {
                #[allow(clippy::needless_range_loop)]
                for k in 0..n {
                    if k == j || (k > j && !(sigma[k] > T::zero())) {
                        continue;
                    }
                    let c = dot(u.col(k), &cand);
                    for (x, &y) in cand.iter_mut().zip(u.col(k)) {
                        *x -= c * y;
                    }
                }
            }
            let nrm = norm2(&cand);
            if nrm > best_norm {
                best_norm = nrm;
                best = Some(cand);
            }
            if best_norm > half {
                break;
            }
        }
        if let Some(mut cand) = best {
            cand.iter_mut().for_each(|x| *x /= best_norm);
            u.col_mut(j).copy_from_slice(&cand);
        }
    }
}

fn normalize_signs<T: Scalar>(f: &mut SvdFactors<T>) {
    for j in 0..f.u.cols() {
        let col = f.u.col(j);
        let mut idx = 0;
        let mut best = T::zero();
        for (i, &x) in col.iter().enumerate() {
            if x.abs() > best {
                best = x.abs();
                idx = i;
            }
        }
        if col[idx] < T::zero() {
            f.u.col_mut(j).iter_mut().for_each(|x| *x = -*x);
            f.v.col_mut(j).iter_mut().for_each(|x| *x = -*x);
        }
    }
}
