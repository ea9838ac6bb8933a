//! Principal angles between subspaces and the alignment of a starting guess
//! with the dominant right singular subspace.

use crate::error::{Error, Result};
use crate::matcore::{
    norm, one_two_three_inverse, pinv, singular_values, thin_qr, Matrix, Norm, PartitionedSvd,
};
use crate::scalar::Scalar;

/// Principal angles `θ_1 ≤ … ≤ θ_k` together with the cosines they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSet<T> {
    pub theta: Vec<T>,
    /// Singular values of `W_kᵀQ` (clamped to `[0, 1]`), non-increasing.
    pub cos_sv: Vec<T>,
}

impl<T: Scalar> AngleSet<T> {
    pub fn max_angle(&self) -> T {
        self.theta.last().copied().unwrap_or_else(T::zero)
    }

    pub fn sines(&self) -> Vec<T> {
        self.cos_sv
            .iter()
            .map(|&c| (T::one() - c * c).max(T::zero()).sqrt())
            .collect()
    }

    /// `‖sin Θ‖` assembled from the angles.
    pub fn sin_norm(&self, which: Norm) -> T {
        aggregate(&self.sines(), which)
    }

    /// `‖tan Θ‖` assembled from the angles; infinite when some angle is `π/2`.
    pub fn tan_norm(&self, which: Norm) -> T {
        let tans: Vec<T> = self
            .sines()
            .iter()
            .zip(&self.cos_sv)
            .map(|(&s, &c)| if c > T::zero() { s / c } else { T::infinity() })
            .collect();
        aggregate(&tans, which)
    }
}

fn aggregate<T: Scalar>(values: &[T], which: Norm) -> T {
    match which {
        Norm::Two => values.iter().fold(T::zero(), |m, &v| m.max(v)),
        Norm::Fro => values.iter().map(|&v| v * v).sum::<T>().sqrt(),
    }
}

fn check_orthonormal<T: Scalar>(m: &Matrix<T>, what: &str) -> Result<()> {
    let defect = m.orthonormality_defect();
    if !(defect <= T::lit(T::CONTRACT_TOL)) {
        return Err(Error::Contract(format!(
            "{what} must have orthonormal columns (defect {defect:e})"
        )));
    }
    Ok(())
}

fn check_pair<T: Scalar>(q: &Matrix<T>, w_k: &Matrix<T>) -> Result<()> {
    if q.rows() != w_k.rows() {
        return Err(Error::dim(
            "principal_angles",
            format!("ambient dimensions {} and {} differ", q.rows(), w_k.rows()),
        ));
    }
    if w_k.cols() > q.cols() {
        return Err(Error::dim(
            "principal_angles",
            format!("target dimension {} exceeds subspace dimension {}", w_k.cols(), q.cols()),
        ));
    }
    check_orthonormal(q, "Q")?;
    check_orthonormal(w_k, "W_k")
}

/// Principal angles between `range(Q)` and `range(W_k)`, `θ_j = arccos σ_j(W_kᵀQ)`.
pub fn principal_angles<T: Scalar>(q: &Matrix<T>, w_k: &Matrix<T>) -> Result<AngleSet<T>> {
    check_pair(q, w_k)?;
    let k = w_k.cols();
    let mut sv = singular_values(&w_k.t_matmul(q))?;
    sv.truncate(k);
    let limit = T::one() + T::lit(T::COS_ROUNDING);
    if let Some(&top) = sv.first() {
        if top > limit {
            return Err(Error::Contract(format!("cosine {top} exceeds one")));
        }
    }
    let cos_sv: Vec<T> = sv.into_iter().map(|c| c.max(T::zero()).min(T::one())).collect();
    let theta = cos_sv.iter().map(|c| c.acos()).collect();
    Ok(AngleSet { theta, cos_sv })
}

/// Distance `‖sin Θ(Q, W_k)‖` between the subspaces, evaluated as the
/// residual `‖(I − QQᵀ) W_k‖` of projecting the smaller basis onto the
/// larger one. For `dim Q = dim W_k` this equals `‖(I − W_kW_kᵀ) Q‖`.
pub fn sin_dist<T: Scalar>(q: &Matrix<T>, w_k: &Matrix<T>, which: Norm) -> Result<T> {
    check_pair(q, w_k)?;
    norm(&q.project_out(w_k), which)
}

/// `‖(W_{k,⊥}ᵀQ)(W_kᵀQ)†‖`, the tangent of the principal angles.
pub fn tan_theta<T: Scalar>(
    q: &Matrix<T>,
    w_k: &Matrix<T>,
    w_kp: &Matrix<T>,
    which: Norm,
) -> Result<T> {
    check_pair(q, w_k)?;
    if w_kp.rows() != q.rows() || w_k.cols() + w_kp.cols() != q.rows() {
        return Err(Error::dim(
            "tan_theta",
            "[W_k W_kp] must be a square orthogonal matrix",
        ));
    }
    let k = w_k.cols();
    let c = w_k.t_matmul(q);
    require_full_row_rank(&c, k, "angle reaches pi/2, tangent undefined")?;
    norm(&w_kp.t_matmul(q).matmul(&pinv(&c, None)?), which)
}

fn require_full_row_rank<T: Scalar>(c: &Matrix<T>, k: usize, why: &str) -> Result<()> {
    let sv = singular_values(c)?;
    let smax = sv.first().copied().unwrap_or_else(T::zero);
    let tol = crate::matcore::default_rank_tol(c.rows(), c.cols(), smax);
    let rank = sv.iter().filter(|&&s| s > tol).count();
    if rank < k {
        return Err(Error::Rank(format!("rank {rank} < {k}: {why}")));
    }
    Ok(())
}

/// `‖V_{k,⊥}ᵀX (V_kᵀX)†‖` through the Moore-Penrose inverse, valid for any
/// `X` with `rank(V_kᵀX) = k`.
pub fn guess_alignment_pinv<T: Scalar>(
    x: &Matrix<T>,
    p: &PartitionedSvd<T>,
    which: Norm,
) -> Result<T> {
    check_guess(x, p)?;
    let x_k = p.v_k.t_matmul(x);
    require_full_row_rank(&x_k, p.k, "rank(V_k^T X) < k")?;
    norm(&p.v_kp.t_matmul(x).matmul(&pinv(&x_k, None)?), which)
}

fn check_guess<T: Scalar>(x: &Matrix<T>, p: &PartitionedSvd<T>) -> Result<()> {
    if x.rows() != p.n() {
        return Err(Error::dim(
            "guess_alignment",
            format!("X has {} rows, A has {} columns", x.rows(), p.n()),
        ));
    }
    x.ensure_nonempty_finite("X")
}

/// Alignment of the starting guess with `range(V_k)`.
///
/// For `X` of full column rank this goes through a thin QR `X = QR` and the
/// `(1,2,3)` inverse `X_k⁺ = R⁻¹ Q_k†`, giving `‖X_{k,⊥} X_k⁺‖`, in which
/// `R` cancels so the value is `‖tan Θ(X, V_k)‖`. Otherwise the
/// Moore-Penrose form of [`guess_alignment_pinv`] is used.
pub fn guess_alignment<T: Scalar>(x: &Matrix<T>, p: &PartitionedSvd<T>, which: Norm) -> Result<T> {
    check_guess(x, p)?;
    if x.cols() > x.rows() {
        return guess_alignment_pinv(x, p, which);
    }
    let qr = thin_qr(x)?;
    if !qr.is_full_rank() {
        return guess_alignment_pinv(x, p, which);
    }
    let x_k = p.v_k.t_matmul(x);
    require_full_row_rank(&x_k, p.k, "rank(V_k^T X) < k")?;
    let x_kp = p.v_kp.t_matmul(x);
    let x_k_plus = one_two_three_inverse(&x_k, &qr.r)?;
    norm(&x_kp.matmul(&x_k_plus), which)
}
