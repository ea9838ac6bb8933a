//! Block Krylov space `K_q = [AX, (AAᵀ)AX, …, (AAᵀ)^q AX]`, the rank-`k`
//! extraction from it, and the diagnostics built on the polynomial element
//! `Φ = U φ(Σ) VᵀX`.

use crate::error::{Error, Result};
use crate::gappoly::GapPolynomial;
use crate::matcore::{
    default_rank_tol, norm, norm2, range_basis, singular_values, thin_svd, Matrix, Norm,
    PartitionedSvd,
};
use crate::scalar::Scalar;

/// Raw Krylov blocks together with an orthonormal basis of their span.
#[derive(Debug, Clone)]
pub struct KrylovBasis<T> {
    /// `[AX, (AAᵀ)AX, …]`, `m × (q+1)s`.
    pub k_raw: Matrix<T>,
    /// Orthonormal basis `U_K` of the numerically independent directions.
    pub basis: Matrix<T>,
    pub q: usize,
    pub s: usize,
    /// Number of columns of `basis`.
    pub rank: usize,
    /// `rank == (q+1)s`.
    pub rank_ok: bool,
}

impl<T: Scalar> KrylovBasis<T> {
    pub fn m(&self) -> usize {
        self.basis.rows()
    }

    /// `(I − U_K U_Kᵀ) B`.
    pub fn residual(&self, b: &Matrix<T>) -> Matrix<T> {
        self.basis.project_out(b)
    }

    /// `U_K U_Kᵀ B`.
    pub fn project(&self, b: &Matrix<T>) -> Matrix<T> {
        self.basis.matmul(&self.basis.t_matmul(b))
    }

    /// `‖(I − U_K U_Kᵀ) B‖_F / ‖B‖_F`, zero for `B = 0`.
    pub fn containment(&self, b: &Matrix<T>) -> T {
        let scale = b.norm_fro();
        if scale == T::zero() {
            return T::zero();
        }
        self.residual(b).norm_fro() / scale
    }
}

fn check_inputs<T: Scalar>(a: &Matrix<T>, x: &Matrix<T>, q: usize) -> Result<()> {
    a.ensure_nonempty_finite("A")?;
    x.ensure_nonempty_finite("X")?;
    if x.rows() != a.cols() {
        return Err(Error::dim(
            "build_krylov",
            format!("X has {} rows, A has {} columns", x.rows(), a.cols()),
        ));
    }
    let width = (q + 1) * x.cols();
    if width > a.rows() {
        return Err(Error::dim(
            "build_krylov",
            format!("(q+1)s = {width} exceeds m = {}", a.rows()),
        ));
    }
    Ok(())
}

/// Builds `K_q` and its orthonormal basis.
///
/// Blocks are produced by repeated application `Y ← A(AᵀY)`. The basis is
/// grown block by block: each new block is `A Aᵀ` applied to the previous
/// block's accepted basis vectors, orthogonalized twice against everything
/// accepted so far. A direction is dropped when what survives is at the
/// rounding level of the product that produced it.
pub fn build_krylov<T: Scalar>(a: &Matrix<T>, x: &Matrix<T>, q: usize) -> Result<KrylovBasis<T>> {
    check_inputs(a, x, q)?;
    let sigma_max = singular_values(a)?[0];
    Ok(build_with_scale(a, x, q, sigma_max))
}

pub(crate) fn build_with_scale<T: Scalar>(a: &Matrix<T>, x: &Matrix<T>, q: usize, sigma_max: T) -> KrylovBasis<T> {
    let (m, n) = a.shape();
    let s = x.cols();
    let noise = T::from_usize_lossy(m.max(n)) * T::epsilon() * sigma_max;

    let mut y = a.matmul(x);
    let mut k_raw = y.clone();
    for _ in 0..q {
        y = a.matmul(&a.t_matmul(&y));
        k_raw = k_raw.hcat(&y).expect("blocks share the row count");
    }

    let mut basis = Matrix::zeros(m, 0);
    let mut block = Matrix::zeros(m, 0);
    for j in 0..=q {
        let (z, floors): (Matrix<T>, Vec<T>) = if j == 0 {
            let floors = (0..s).map(|c| noise * norm2(x.col(c))).collect();
            (a.matmul(x), floors)
        } else {
            let z = a.matmul(&a.t_matmul(&block));
            let floors = vec![noise * sigma_max; z.cols()];
            (z, floors)
        };
        let mut next = Matrix::zeros(m, 0);
        for (c, &floor) in floors.iter().enumerate() {
            let mut v = z.col(c).to_vec();
            for _ in 0..2 {
                orthogonalize(&basis, &mut v);
            }
            let len = norm2(&v);
            if len > floor && len > T::zero() {
                v.iter_mut().for_each(|e| *e /= len);
                basis.push_column(&v);
                next.push_column(&v);
            }
        }
        block = next;
    }

    let rank = basis.cols();
    KrylovBasis { k_raw, basis, q, s, rank, rank_ok: rank == (q + 1) * s }
}

fn orthogonalize<T: Scalar>(basis: &Matrix<T>, v: &mut [T]) {
    for j in 0..basis.cols() {
        let b = basis.col(j);
        let c = crate::matcore::dot(b, v);
        crate::matcore::axpy(-c, b, v);
    }
}

/// Rank-`k` approximation of the dominant left singular subspace of `A`
/// drawn from `K_q`.
#[derive(Debug, Clone)]
pub struct KrylovApproximation<T> {
    /// `Û_k = U_K U_{W,k}`.
    pub u_hat: Matrix<T>,
    pub basis: KrylovBasis<T>,
    /// Singular values of `W = U_KᵀA`.
    pub w_sigma: Vec<T>,
}

/// Runs the extraction: build `K_q`, orthonormalize to `U_K`, form
/// `W = U_KᵀA`, take its top-`k` left singular vectors `U_{W,k}`, and lift
/// them back as `Û_k = U_K U_{W,k}`.
///
/// Requires `1 ≤ k < rank(A)`, `σ_k > σ_{k+1}` and `k ≤ (q+1)s ≤ m`. A
/// numerically rank-deficient `K_q` does not stop the run; it is recorded in
/// `basis.rank_ok`.
pub fn proto_algorithm<T: Scalar>(
    a: &Matrix<T>,
    x: &Matrix<T>,
    k: usize,
    q: usize,
) -> Result<KrylovApproximation<T>> {
    check_inputs(a, x, q)?;
    if k == 0 || k > (q + 1) * x.cols() {
        return Err(Error::dim(
            "proto_algorithm",
            format!("need 1 <= k <= (q+1)s, got k = {k}, (q+1)s = {}", (q + 1) * x.cols()),
        ));
    }
    let sigma = singular_values(a)?;
    check_gap(&sigma, k, default_rank_tol(a.rows(), a.cols(), sigma[0]), "A")?;
    let basis = build_with_scale(a, x, q, sigma[0]);
    extract(a, basis, k)
}

fn check_gap<T: Scalar>(sigma: &[T], k: usize, tol: T, what: &str) -> Result<()> {
    let rank = sigma.iter().filter(|&&s| s > tol).count();
    if k >= rank.max(1) && what == "A" {
        return Err(Error::Rank(format!("k = {k} must be below rank(A) = {rank}")));
    }
    if rank < k {
        return Err(Error::Rank(format!("rank({what}) = {rank} < k = {k}")));
    }
    let next = sigma.get(k).copied().unwrap_or_else(T::zero);
    if sigma[k - 1] - next <= tol {
        return Err(Error::Gap(format!(
            "no gap in {what} at k = {k}: {} and {next}",
            sigma[k - 1]
        )));
    }
    Ok(())
}

/// Steps 3 to 5 of the extraction on an existing basis.
pub fn extract<T: Scalar>(a: &Matrix<T>, basis: KrylovBasis<T>, k: usize) -> Result<KrylovApproximation<T>> {
    let w = basis.basis.t_matmul(a);
    if w.rows() < k {
        return Err(Error::Rank(format!(
            "Krylov basis has {} independent directions, fewer than k = {k}",
            w.rows()
        )));
    }
    let f = thin_svd(&w)?;
    check_gap(&f.sigma, k, f.default_rank_tol(), "W")?;
    Ok(KrylovApproximation {
        u_hat: basis.basis.matmul(&f.u.columns(0..k)),
        basis,
        w_sigma: f.sigma,
    })
}

/// `Φ = U φ(Σ) VᵀX`, with `φ` applied to every singular value and zero on
/// the null directions.
pub fn phi_element<T: Scalar>(
    p: &PartitionedSvd<T>,
    phi: &GapPolynomial<T>,
    x: &Matrix<T>,
) -> Result<Matrix<T>> {
    if x.rows() != p.n() {
        return Err(Error::dim(
            "phi_element",
            format!("X has {} rows, V has {}", x.rows(), p.n()),
        ));
    }
    let head = p.u_k.scale_columns(&phi.apply_sigma(&p.sigma_k)).matmul(&p.v_k.t_matmul(x));
    let tail = p
        .u_tail()
        .scale_columns(&phi.apply_sigma(&p.sigma_kp))
        .matmul(&p.v_tail().t_matmul(x));
    Ok(head.add(&tail))
}

/// `U_K (U_KᵀA)_i`, the best rank-`i` approximation of `A` whose columns lie
/// in the Krylov space.
pub fn best_rank_from_krylov<T: Scalar>(a: &Matrix<T>, basis: &KrylovBasis<T>, i: usize) -> Result<Matrix<T>> {
    let w = basis.basis.t_matmul(a);
    let f = thin_svd(&w)?;
    if i == 0 || i > f.sigma.len() {
        return Err(Error::dim(
            "best_rank_from_krylov",
            format!("rank {i} outside 1..={}", f.sigma.len()),
        ));
    }
    Ok(basis.basis.matmul(&f.truncated(i)))
}

/// `‖(A − Û_iÛ_iᵀA) − (A − U_K(U_KᵀA)_i)‖_F`, which vanishes because both
/// sides describe the same optimal rank-`i` approximation from `K_q`.
pub fn restatement_residual<T: Scalar>(
    a: &Matrix<T>,
    basis: &KrylovBasis<T>,
    u_hat: &Matrix<T>,
    i: usize,
) -> Result<T> {
    if i == 0 || i > u_hat.cols() {
        return Err(Error::dim(
            "restatement_residual",
            format!("index {i} outside 1..={}", u_hat.cols()),
        ));
    }
    let u_i = u_hat.columns(0..i);
    let ours = u_i.matmul(&u_i.t_matmul(a));
    Ok(ours.sub(&best_rank_from_krylov(a, basis, i)?).norm_fro())
}

/// A numerical inequality `lhs ≤ rhs` produced by a diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inequality<T> {
    pub lhs: T,
    pub rhs: T,
}

impl<T: Scalar> Inequality<T> {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// `‖(I − U_KU_Kᵀ)U_k‖ ≤ ‖(I − ΦΦ†)U_k‖ + 1e-8`: the Krylov space captures
/// `U_k` at least as well as its subspace `range(Φ)`.
pub fn projector_dominance<T: Scalar>(
    basis: &KrylovBasis<T>,
    phi_mat: &Matrix<T>,
    u_k: &Matrix<T>,
    which: Norm,
) -> Result<Inequality<T>> {
    let phi_range = range_basis(phi_mat)?;
    Ok(Inequality {
        lhs: norm(&basis.residual(u_k), which)?,
        rhs: norm(&phi_range.project_out(u_k), which)? + T::lit(1e-8),
    })
}

/// `‖A − Û_iÛ_iᵀA‖_F² ≤ ‖A_i − U_KU_KᵀA_i‖_F² + ‖A − A_i‖_F² + 1e-8‖A‖_F²`.
pub fn optimality_chain<T: Scalar>(
    a: &Matrix<T>,
    p: &PartitionedSvd<T>,
    basis: &KrylovBasis<T>,
    u_hat: &Matrix<T>,
    i: usize,
) -> Result<Inequality<T>> {
    check_index(i, p.k, "optimality_chain")?;
    let u_i = u_hat.columns(0..i);
    let lhs = a.sub(&u_i.matmul(&u_i.t_matmul(a))).norm_fro().powi(2);
    let a_i = p.best_rank(i);
    let captured = basis.residual(&a_i).norm_fro().powi(2);
    let tail = a.sub(&a_i).norm_fro().powi(2);
    Ok(Inequality {
        lhs,
        rhs: captured + tail + T::lit(1e-8) * a.norm_fro().powi(2),
    })
}

/// `‖A_i − U_KU_KᵀA_i‖_F ≤ ‖U_iφ(Σ_i) − ΦΦ†U_iφ(Σ_i)‖_F + 1e-8‖φ(Σ_i)‖₂√i`.
///
/// Fails with a polynomial error when `φ(σ_j) < σ_j` for some `j ≤ k`.
pub fn polynomial_capture_chain<T: Scalar>(
    p: &PartitionedSvd<T>,
    phi: &GapPolynomial<T>,
    phi_mat: &Matrix<T>,
    basis: &KrylovBasis<T>,
    i: usize,
) -> Result<Inequality<T>> {
    check_index(i, p.k, "polynomial_capture_chain")?;
    let phi_k = phi.apply_sigma(&p.sigma_k);
    require_dominating(&phi_k, &p.sigma_k)?;
    let a_i = p.best_rank(i);
    let lhs = basis.residual(&a_i).norm_fro();
    let target = p.u_k.columns(0..i).scale_columns(&phi_k[..i]);
    let rhs_main = range_basis(phi_mat)?.project_out(&target).norm_fro();
    let top = phi_k[..i].iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    Ok(Inequality {
        lhs,
        rhs: rhs_main + T::lit(1e-8) * top * T::from_usize_lossy(i).sqrt(),
    })
}

/// Checks `φ(σ_j) ≥ σ_j(1 − 1e-12)` for every dominant singular value.
pub fn require_dominating<T: Scalar>(phi_k: &[T], sigma_k: &[T]) -> Result<()> {
    for (j, (&f, &s)) in phi_k.iter().zip(sigma_k).enumerate() {
        if f < s * (T::one() - T::lit(1e-12)) {
            return Err(Error::Polynomial(format!(
                "phi(sigma_{}) = {f} is below sigma_{} = {s}",
                j + 1,
                j + 1
            )));
        }
    }
    Ok(())
}

fn check_index(i: usize, k: usize, op: &'static str) -> Result<()> {
    if i == 0 || i > k {
        return Err(Error::dim(op, format!("index {i} outside 1..={k}")));
    }
    Ok(())
}
