//! Odd Chebyshev polynomials and the rescaled gap-amplifying polynomial.
//!
//! `φ(x) = (1+γ)α / T_{q'}(1+γ) · T_{q'}(x/α)` with `q' = 2q+1` is small on
//! `[0, α]`, pinned to the identity at `α(1+γ)` and grows faster than `x`
//! beyond it. Evaluation goes through `cos`/`cosh` closed forms; the
//! monomial coefficients are never formed.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Result of a Chebyshev evaluation. `overflowed` is set when the magnitude
/// exceeds the floating-point range, in which case `value` is `±∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebValue<T> {
    pub value: T,
    pub overflowed: bool,
}

fn check_degree(qprime: usize) -> Result<()> {
    if qprime.is_multiple_of(2) {
        return Err(Error::Polynomial(format!("degree {qprime} must be odd")));
    }
    Ok(())
}

/// `ln cosh t` for `t ≥ 0` without overflow.
fn ln_cosh<T: Scalar>(t: T) -> T {
    if t < T::lit(20.0) {
        t.cosh().ln()
    } else {
        t - T::LN_2() + (-(t + t)).exp().ln_1p()
    }
}

/// `ln |T_{q'}(x)|` for `|x| ≥ 1`.
fn ln_abs_outer<T: Scalar>(qprime: usize, x: T) -> T {
    ln_cosh(T::from_usize_lossy(qprime) * x.abs().acosh())
}

/// `T_{q'}(x)` for odd `q'`: `cos(q' arccos x)` on `[-1, 1]`, and
/// `sign(x) cosh(q' arccosh |x|)` outside, with a log-domain overflow guard.
pub fn chebyshev_eval<T: Scalar>(qprime: usize, x: T) -> Result<ChebValue<T>> {
    check_degree(qprime)?;
    let n = T::from_usize_lossy(qprime);
    if x.is_nan() {
        return Ok(ChebValue { value: x, overflowed: false });
    }
    if x.abs() <= T::one() {
        return Ok(ChebValue { value: (n * x.acos()).cos(), overflowed: false });
    }
    let t = n * x.abs().acosh();
    let magnitude = if t < T::max_value().ln() { t.cosh() } else { ln_cosh(t).exp() };
    Ok(ChebValue {
        value: magnitude.copysign(x),
        overflowed: magnitude.is_infinite(),
    })
}

/// The rescaled polynomial `φ`, an immutable value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapPolynomial<T> {
    pub q: usize,
    pub gamma: T,
    pub alpha: T,
    /// `T_{q'}(1+γ)`; `+∞` when it exceeds the floating-point range.
    pub psi_at_gap: T,
    ln_psi_at_gap: T,
}

impl<T: Scalar> GapPolynomial<T> {
    pub fn new(q: usize, gamma: T, alpha: T) -> Result<Self> {
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(Error::Gap(format!("relative gap must be positive and finite, got {gamma}")));
        }
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::Polynomial(format!("scale must be positive and finite, got {alpha}")));
        }
        let qprime = 2 * q + 1;
        let at = T::one() + gamma;
        Ok(Self {
            q,
            gamma,
            alpha,
            psi_at_gap: chebyshev_eval(qprime, at)?.value,
            ln_psi_at_gap: ln_abs_outer(qprime, at),
        })
    }

    pub fn degree(&self) -> usize {
        2 * self.q + 1
    }

    /// The normalization point `α(1+γ)`, where `φ` is the identity.
    pub fn pivot(&self) -> T {
        self.alpha * (T::one() + self.gamma)
    }

    pub fn eval(&self, x: T) -> T {
        let qprime = self.degree();
        let y = x / self.alpha;
        let num = chebyshev_value(qprime, y);
        let ratio = if num.is_finite() && self.psi_at_gap.is_finite() {
            num / self.psi_at_gap
        } else if y.abs() <= T::one() {
            T::zero()
        } else {
            (ln_abs_outer(qprime, y) - self.ln_psi_at_gap).exp().copysign(y)
        };
        self.pivot() * ratio
    }

    /// `φ` applied to each singular value.
    pub fn apply_sigma(&self, sigma: &[T]) -> Vec<T> {
        sigma.iter().map(|&s| self.eval(s)).collect()
    }
}

fn chebyshev_value<T: Scalar>(qprime: usize, x: T) -> T {
    chebyshev_eval(qprime, x).map(|c| c.value).unwrap_or_else(|_| T::nan())
}

/// `φ(σ_i)` elementwise.
pub fn phi_apply_sigma<T: Scalar>(phi: &GapPolynomial<T>, sigma: &[T]) -> Vec<T> {
    phi.apply_sigma(sigma)
}

/// `2^{-(2q+1)·min(√γ, 1)}`.
pub fn decay_factor<T: Scalar>(q: usize, gamma: T) -> T {
    let r = gamma.sqrt().min(T::one());
    T::lit(2.0).powf(-(T::from_usize_lossy(2 * q + 1) * r))
}

/// Bounds on the polynomial that concentrates on the gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapBounds<T> {
    /// Bound on `‖φ(Σ_k)⁻¹‖₂`, equal to `1/σ_k`.
    pub inv_bound: T,
    /// Bound on `‖φ(Σ_{k,⊥})‖₂`, equal to `4σ_{k+1}·2^{-(2q+1)min(√γ,1)}`.
    pub tail_bound: T,
}

/// Bounds for `φ` built with scale `σ_{k+1}`. Requires
/// `σ_k ≥ (1+γ)σ_{k+1} > 0`, up to a relative rounding allowance of `1e-12`.
pub fn gap_polynomial_bounds<T: Scalar>(
    q: usize,
    gamma: T,
    sigma_k: T,
    sigma_k1: T,
) -> Result<GapBounds<T>> {
    if !(gamma > T::zero()) || !(sigma_k1 > T::zero()) {
        return Err(Error::Gap(format!(
            "need gamma > 0 and sigma_(k+1) > 0, got {gamma} and {sigma_k1}"
        )));
    }
    let need = (T::one() + gamma) * sigma_k1;
    if sigma_k < need * (T::one() - T::lit(1e-12)) {
        return Err(Error::Gap(format!(
            "sigma_k = {sigma_k} is below (1 + gamma) sigma_(k+1) = {need}"
        )));
    }
    Ok(GapBounds {
        inv_bound: T::one() / sigma_k,
        tail_bound: T::lit(4.0) * sigma_k1 * decay_factor(q, gamma),
    })
}

/// `Γ = 4·tanΘ₂·2^{-(2q+1)min(√γ,1)}`.
pub fn gamma_factor<T: Scalar>(tan_theta: T, q: usize, gamma: T) -> T {
    T::lit(4.0) * tan_theta * decay_factor(q, gamma)
}

/// Smallest `q ≥ 0` with `q ≥ (log₂(4 tanΘ) − log₂ ε) / (2 min(√γ, 1))`.
pub fn select_q<T: Scalar>(epsilon: T, gamma: T, tan_theta: T) -> Result<usize> {
    if !(epsilon > T::zero()) {
        return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(gamma > T::zero()) {
        return Err(Error::Gap(format!("relative gap must be positive, got {gamma}")));
    }
    if !(tan_theta >= T::zero()) || !tan_theta.is_finite() {
        return Err(Error::Rank(format!("tangent must be finite and non-negative, got {tan_theta}")));
    }
    if tan_theta == T::zero() {
        return Ok(0);
    }
    let r = gamma.sqrt().min(T::one());
    let raw = ((T::lit(4.0) * tan_theta).log2() - epsilon.log2()) / (r + r);
    let q = raw.ceil().max(T::zero());
    q.to_usize()
        .ok_or_else(|| Error::Config(format!("iteration count {raw} out of range")))
}
