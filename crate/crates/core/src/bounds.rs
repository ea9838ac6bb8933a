//! Both sides of the structural bounds, packaged as checkable reports.
//!
//! Every report compares `lhs ≤ rhs` under the rule
//! `lhs ≤ rhs·(1 + 1e-8) + 1e-12`. Reports flagged `diagnostic` record
//! quantities that are not asserted and never count as violations; their
//! names end in `.diag`.

use serde::{Deserialize, Serialize};

use crate::angles::{guess_alignment, sin_dist};
use crate::error::{Error, Result};
use crate::gappoly::{gamma_factor, gap_polynomial_bounds, GapPolynomial};
use crate::krylov::{
    build_with_scale, extract, optimality_chain, phi_element, polynomial_capture_chain,
    projector_dominance, require_dominating, restatement_residual, KrylovApproximation,
};
use crate::matcore::{norm, norm_two, partition_svd, range_basis, singular_values, thin_svd, Matrix, Norm};
use crate::PartitionedSvd;

pub const REL_TOL: f64 = 1e-8;
pub const ABS_TOL: f64 = 1e-12;

pub fn satisfies(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + REL_TOL) + ABS_TOL
}

/// Configuration echo attached to every report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportContext {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub s: usize,
    pub q: usize,
    pub gamma: f64,
    pub guess: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub norm: Option<Norm>,
    /// One-based index of the singular triplet, for per-index bounds.
    pub index: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub satisfied: bool,
    pub diagnostic: bool,
    pub context: ReportContext,
}

impl BoundReport {
    pub fn check(name: impl Into<String>, norm: Option<Norm>, index: Option<usize>, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            norm,
            index,
            lhs,
            rhs,
            slack: rhs - lhs,
            satisfied: satisfies(lhs, rhs),
            diagnostic: false,
            context: ReportContext::default(),
        }
    }

    pub fn diagnostic(name: impl Into<String>, norm: Option<Norm>, index: Option<usize>, lhs: f64, rhs: f64) -> Self {
        Self { diagnostic: true, ..Self::check(name, norm, index, lhs, rhs) }
    }

    pub fn with_context(mut self, context: &ReportContext) -> Self {
        self.context = context.clone();
        self
    }

    /// A failed check. Diagnostics never count.
    pub fn is_violation(&self) -> bool {
        !self.diagnostic && !self.satisfied
    }
}

/// `γ = (σ_k − σ_{k+1}) / σ_{k+1}`; `+∞` when `σ_{k+1} = 0`, in which case
/// `rank(A) = k` and every bound is trivial.
pub fn gamma_gap(p: &PartitionedSvd) -> f64 {
    let next = p.sigma_next();
    if next == 0.0 {
        return f64::INFINITY;
    }
    (p.sigma_last() - next) / next
}

/// Everything the reports need about one run, computed once.
#[derive(Debug, Clone)]
pub struct Instance {
    pub a: Matrix<f64>,
    pub x: Matrix<f64>,
    pub p: PartitionedSvd,
    pub q: usize,
    pub approx: KrylovApproximation<f64>,
    /// `‖V_{k,⊥}ᵀX (V_kᵀX)^+‖₂`.
    pub align_two: f64,
    pub align_fro: f64,
    /// Measured relative gap of `A` at `k`.
    pub gamma: f64,
    pub context: ReportContext,
}

impl Instance {
    /// Factors `A`, runs the extraction with `K_q` and measures the guess.
    pub fn prepare(a: Matrix<f64>, x: Matrix<f64>, k: usize, q: usize) -> Result<Self> {
        a.ensure_nonempty_finite("A")?;
        x.ensure_nonempty_finite("X")?;
        let p = partition_svd(&thin_svd(&a)?, k)?;
        if x.rows() != a.cols() || (q + 1) * x.cols() > a.rows() || k > (q + 1) * x.cols() {
            return Err(Error::dim(
                "Instance::prepare",
                format!(
                    "A is {}x{}, X is {}x{}, k = {k}, q = {q}",
                    a.rows(),
                    a.cols(),
                    x.rows(),
                    x.cols()
                ),
            ));
        }
        let basis = build_with_scale(&a, &x, q, p.sigma_k[0]);
        let approx = extract(&a, basis, k)?;
        Self::from_parts(a, x, p, approx, q)
    }

    pub fn from_parts(
        a: Matrix<f64>,
        x: Matrix<f64>,
        p: PartitionedSvd,
        approx: KrylovApproximation<f64>,
        q: usize,
    ) -> Result<Self> {
        let align_two = guess_alignment(&x, &p, Norm::Two)?;
        let align_fro = guess_alignment(&x, &p, Norm::Fro)?;
        let gamma = gamma_gap(&p);
        let context = ReportContext {
            m: a.rows(),
            n: a.cols(),
            k: p.k,
            s: x.cols(),
            q,
            gamma,
            ..ReportContext::default()
        };
        Ok(Self { a, x, p, q, approx, align_two, align_fro, gamma, context })
    }

    pub fn k(&self) -> usize {
        self.p.k
    }

    pub fn alignment(&self, which: Norm) -> f64 {
        match which {
            Norm::Two => self.align_two,
            Norm::Fro => self.align_fro,
        }
    }

    /// The polynomial with scale `σ_{k+1}` and the measured gap.
    pub fn gap_polynomial(&self) -> Result<GapPolynomial<f64>> {
        GapPolynomial::new(self.q, self.gamma, self.p.sigma_next())
    }

    fn report(&self, r: BoundReport) -> BoundReport {
        r.with_context(&self.context)
    }

    fn u_hat_i(&self, i: usize) -> Matrix<f64> {
        self.approx.u_hat.columns(0..i)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.k() {
            return Err(Error::dim("bounds", format!("index {i} outside 1..={}", self.k())));
        }
        Ok(())
    }
}

/// `‖φ(Σ_{k,⊥})‖₂`; the complement directions beyond the thin factorization
/// carry singular value zero and `φ(0) = 0`.
fn tail_norm(p: &PartitionedSvd, phi: &GapPolynomial<f64>) -> f64 {
    phi.apply_sigma(&p.sigma_kp).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `‖φ(Σ_k)⁻¹‖₂`.
fn inverse_norm(p: &PartitionedSvd, phi: &GapPolynomial<f64>) -> Result<f64> {
    let smallest = phi.apply_sigma(&p.sigma_k).iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if smallest == 0.0 {
        return Err(Error::Polynomial("phi(Sigma_k) is singular".into()));
    }
    Ok(1.0 / smallest)
}

/// `Δ = ‖φ(Σ_{k,⊥})‖₂ · ‖V_{k,⊥}ᵀX (V_kᵀX)^+‖_F`.
pub fn delta(inst: &Instance, phi: &GapPolynomial<f64>) -> f64 {
    tail_norm(&inst.p, phi) * inst.align_fro
}

/// Distance between the Krylov space and `range(U_k)` against
/// `‖φ(Σ_{k,⊥})‖₂ ‖φ(Σ_k)⁻¹‖₂ ‖V_{k,⊥}ᵀX (V_kᵀX)^+‖`.
pub fn krylov_angle_report(inst: &Instance, phi: &GapPolynomial<f64>, which: Norm) -> Result<BoundReport> {
    let lhs = sin_dist(&inst.approx.basis.basis, &inst.p.u_k, which)?;
    let rhs = tail_norm(&inst.p, phi) * inverse_norm(&inst.p, phi)? * inst.alignment(which);
    Ok(inst.report(BoundReport::check(
        format!("angle.krylov.{}", which.as_str()),
        Some(which),
        None,
        lhs,
        rhs,
    )))
}

/// Distance between the Krylov space and `u_i` against
/// `‖φ(Σ_{k,⊥})‖₂ / |φ(σ_i)| · ‖V_{k,⊥}ᵀX (V_kᵀX)^+‖₂`.
pub fn vector_angle_report(inst: &Instance, phi: &GapPolynomial<f64>, i: usize) -> Result<BoundReport> {
    inst.check_index(i)?;
    let u_i = inst.p.u_k.columns(i - 1..i);
    let lhs = inst.approx.basis.residual(&u_i).norm_fro();
    let phi_i = phi.eval(inst.p.sigma_k[i - 1]).abs();
    if phi_i == 0.0 {
        return Err(Error::Polynomial(format!("phi(sigma_{i}) = 0")));
    }
    let rhs = tail_norm(&inst.p, phi) / phi_i * inst.align_two;
    Ok(inst.report(BoundReport::check("angle.vector", Some(Norm::Two), Some(i), lhs, rhs)))
}

/// Quality of `Û_iÛ_iᵀA` for one `i`: Frobenius and two-norm errors, the
/// squared Frobenius form, and both edges of `σ_i − Δ ≤ ‖û_iᵀA‖₂ ≤ σ_i`.
pub fn approximation_reports(inst: &Instance, phi: &GapPolynomial<f64>, i: usize) -> Result<Vec<BoundReport>> {
    inst.check_index(i)?;
    require_dominating(&phi.apply_sigma(&inst.p.sigma_k), &inst.p.sigma_k)?;
    approximation_family(inst, i, delta(inst, phi), "approx", false)
}

fn approximation_family(
    inst: &Instance,
    i: usize,
    d: f64,
    prefix: &str,
    diagnostic: bool,
) -> Result<Vec<BoundReport>> {
    let make = if diagnostic { BoundReport::diagnostic } else { BoundReport::check };
    let suffix = if diagnostic { ".diag" } else { "" };
    let a = &inst.a;
    let u_i = inst.u_hat_i(i);
    let coeff = u_i.t_matmul(a);
    let err = a.sub(&u_i.matmul(&coeff));
    let sigma = inst.p.sigma();
    let tail_fro = sigma[i..].iter().map(|s| s * s).sum::<f64>().sqrt();
    let tail_two = sigma.get(i).copied().unwrap_or(0.0);
    let err_fro = err.norm_fro();
    let measured = norm_two(&coeff.row_block(i - 1..i))?;
    let mut out = vec![
        make(format!("{prefix}.fro{suffix}"), Some(Norm::Fro), Some(i), err_fro, tail_fro + d),
        make(format!("{prefix}.two{suffix}"), Some(Norm::Two), Some(i), norm_two(&err)?, tail_two + d),
        make(format!("{prefix}.sv-lower{suffix}"), Some(Norm::Two), Some(i), sigma[i - 1], measured + d),
    ];
    if prefix == "approx" {
        out.push(make(
            format!("{prefix}.sv-upper{suffix}"),
            Some(Norm::Two),
            Some(i),
            measured,
            sigma[i - 1],
        ));
        out.push(make(
            format!("{prefix}.fro-squared{suffix}"),
            Some(Norm::Fro),
            Some(i),
            err_fro * err_fro,
            tail_fro * tail_fro + d * d + REL_TOL * a.norm_fro().powi(2),
        ));
    }
    Ok(out.into_iter().map(|r| inst.report(r)).collect())
}

/// Reports obtained from the Chebyshev polynomial with scale `σ_{k+1}`:
/// its two bounds, the angle bounds in terms of
/// `Γ = 4‖V_{k,⊥}ᵀX (V_kᵀX)^+‖₂ / 2^{(2q+1)min(√γ,1)}`, and the
/// approximation bounds with `Δ` replaced by its polynomial bound.
///
/// `Δ` carries the Frobenius alignment, so its bound uses the Frobenius
/// counterpart `Γ_F` of `Γ`. The forms with `Γσ_{k+1}` in place of `Δ`, and
/// the Frobenius angle bound, are emitted as diagnostics.
pub fn polynomial_bound_reports(inst: &Instance) -> Result<Vec<BoundReport>> {
    let phi = inst.gap_polynomial()?;
    let p = &inst.p;
    let (gamma, q, k) = (inst.gamma, inst.q, inst.k());
    let (s_k, s_next) = (p.sigma_last(), p.sigma_next());
    let bounds = gap_polynomial_bounds(q, gamma, s_k, s_next)?;
    require_dominating(&phi.apply_sigma(&p.sigma_k), &p.sigma_k)?;
    let g_two = gamma_factor(inst.align_two, q, gamma);
    let g_fro = gamma_factor(inst.align_fro, q, gamma);

    let mut out = vec![
        BoundReport::check("poly.inverse", Some(Norm::Two), None, inverse_norm(p, &phi)?, bounds.inv_bound),
        BoundReport::check("poly.tail", Some(Norm::Two), None, tail_norm(p, &phi), bounds.tail_bound),
    ];
    let sin_two = sin_dist(&inst.approx.basis.basis, &p.u_k, Norm::Two)?;
    let sin_fro = sin_dist(&inst.approx.basis.basis, &p.u_k, Norm::Fro)?;
    out.push(BoundReport::check("poly.angle.ratio", Some(Norm::Two), None, sin_two, g_two * s_next / s_k));
    out.push(BoundReport::check("poly.angle.gap", Some(Norm::Two), None, sin_two, g_two / (1.0 + gamma)));
    out.push(BoundReport::diagnostic(
        "poly.angle.ratio.diag",
        Some(Norm::Fro),
        None,
        sin_fro,
        g_fro * s_next / s_k,
    ));
    for i in 1..=k {
        let u_i = p.u_k.columns(i - 1..i);
        let lhs = inst.approx.basis.residual(&u_i).norm_fro();
        out.push(BoundReport::check("poly.vector", Some(Norm::Two), Some(i), lhs, g_two * s_next / p.sigma_k[i - 1]));
    }
    let d = delta(inst, &phi);
    out.push(BoundReport::check("poly.delta", Some(Norm::Fro), None, d, g_fro * s_next));
    out = out.into_iter().map(|r| inst.report(r)).collect();
    for i in 1..=k {
        out.extend(approximation_family(inst, i, g_fro * s_next, "poly.approx", false)?);
        out.extend(approximation_family(inst, i, g_two * s_next, "poly.approx", true)?);
    }
    Ok(out)
}

/// Additive error transfer from the Frobenius to the two-norm: if
/// `‖A − Ã‖_F² ≤ ‖A − A_k‖_F² + δ` and `rank(Ã) = k < rank(A)`, then
/// `‖A − Ã‖₂² ≤ ‖A − A_k‖₂² + δ`. When the hypothesis fails the report is a
/// diagnostic named `additive.two.vacuous.diag`.
pub fn additive_two_norm_check(a: &Matrix<f64>, a_tilde: &Matrix<f64>, k: usize, delta: f64) -> Result<BoundReport> {
    if a.shape() != a_tilde.shape() {
        return Err(Error::dim("additive_two_norm_check", "A and its approximation differ in shape"));
    }
    let sigma = singular_values(a)?;
    let tilde_sigma = singular_values(a_tilde)?;
    let rank_a = sigma.iter().filter(|&&s| s > crate::matcore::default_rank_tol(a.rows(), a.cols(), sigma[0])).count();
    let tol = crate::matcore::default_rank_tol(a.rows(), a.cols(), tilde_sigma[0].max(sigma[0]));
    let rank_tilde = tilde_sigma.iter().filter(|&&s| s > tol).count();
    Ok(additive_with_sigma(a, &sigma, a_tilde, k, delta, rank_tilde == k && k < rank_a))
}

fn additive_with_sigma(
    a: &Matrix<f64>,
    sigma: &[f64],
    a_tilde: &Matrix<f64>,
    k: usize,
    delta: f64,
    rank_ok: bool,
) -> BoundReport {
    let err = a.sub(a_tilde);
    let tail_fro_sq: f64 = sigma[k.min(sigma.len())..].iter().map(|s| s * s).sum();
    let tail_two_sq = sigma.get(k).map_or(0.0, |s| s * s);
    let premise = satisfies(err.norm_fro().powi(2), tail_fro_sq + delta);
    let lhs = norm_two(&err).unwrap_or(f64::NAN).powi(2);
    if rank_ok && premise {
        BoundReport::check("additive.two", Some(Norm::Two), Some(k), lhs, tail_two_sq + delta)
    } else {
        BoundReport::diagnostic("additive.two.vacuous.diag", Some(Norm::Two), Some(k), lhs, tail_two_sq + delta)
    }
}

/// The intermediate steps of the approximation bound, each as a numerical
/// inequality on the instance, plus the restatement identity, the
/// containment of `Φ` and of the raw blocks in the Krylov space, and the
/// rank deficit of the basis.
pub fn diagnostic_reports(inst: &Instance, phi: &GapPolynomial<f64>) -> Result<Vec<BoundReport>> {
    let (a, p, basis) = (&inst.a, &inst.p, &inst.approx.basis);
    let phi_mat = phi_element(p, phi, &inst.x)?;
    let a_fro = a.norm_fro();
    let mut out = Vec::new();

    out.push(BoundReport::diagnostic(
        "krylov.rank-deficit.diag",
        None,
        None,
        ((basis.q + 1) * basis.s - basis.rank) as f64,
        0.0,
    ));
    out.push(BoundReport::check("containment.phi", Some(Norm::Fro), None, basis.containment(&phi_mat), REL_TOL));
    for j in 0..=basis.q {
        let block = basis.k_raw.columns(j * basis.s..(j + 1) * basis.s);
        out.push(BoundReport::check("containment.block", Some(Norm::Fro), Some(j), basis.containment(&block), REL_TOL));
    }
    for which in Norm::BOTH {
        let ineq = projector_dominance(basis, &phi_mat, &p.u_k, which)?;
        out.push(BoundReport::check(format!("chain.dominance.{}", which.as_str()), Some(which), None, ineq.lhs, ineq.rhs));
    }

    let dominated = require_dominating(&phi.apply_sigma(&p.sigma_k), &p.sigma_k).is_ok();
    let phi_range = range_basis(&phi_mat)?;
    let tail = tail_norm(p, phi);
    let sigma = p.sigma();
    let rank_a = sigma.len();
    for i in 1..=inst.k() {
        let r = restatement_residual(a, basis, &inst.approx.u_hat, i)?;
        out.push(BoundReport::check("restate", Some(Norm::Fro), Some(i), r, REL_TOL * a_fro));
        let ineq = optimality_chain(a, p, basis, &inst.approx.u_hat, i)?;
        out.push(BoundReport::check("chain.optimality", Some(Norm::Fro), Some(i), ineq.lhs, ineq.rhs));
        if dominated {
            let ineq = polynomial_capture_chain(p, phi, &phi_mat, basis, i)?;
            out.push(BoundReport::check("chain.capture", Some(Norm::Fro), Some(i), ineq.lhs, ineq.rhs));
            let phi_i = phi.apply_sigma(&p.sigma_k[..i]);
            let target = p.u_k.columns(0..i).scale_columns(&phi_i);
            let lhs = norm(&phi_range.project_out(&target), Norm::Fro)?;
            out.push(BoundReport::check("chain.residual", Some(Norm::Fro), Some(i), lhs, tail * inst.align_fro));
            let u_i = inst.u_hat_i(i);
            let a_tilde = u_i.matmul(&u_i.t_matmul(a));
            let d = delta(inst, phi);
            out.push(additive_with_sigma(a, &sigma, &a_tilde, i, d * d, i < rank_a));
        }
    }
    Ok(out.into_iter().map(|r| inst.report(r)).collect())
}

/// All checks for one run with the given polynomial: both angle bounds,
/// the per-vector bounds and the approximation bounds for every `i ≤ k`.
pub fn bound_reports(inst: &Instance, phi: &GapPolynomial<f64>) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    for which in Norm::BOTH {
        out.push(krylov_angle_report(inst, phi, which)?);
    }
    for i in 1..=inst.k() {
        out.push(vector_angle_report(inst, phi, i)?);
    }
    for i in 1..=inst.k() {
        out.extend(approximation_reports(inst, phi, i)?);
    }
    Ok(out)
}

/// Bound, polynomial and diagnostic reports with the Chebyshev polynomial
/// of the instance.
pub fn all_reports(inst: &Instance) -> Result<Vec<BoundReport>> {
    let phi = inst.gap_polynomial()?;
    let mut out = bound_reports(inst, &phi)?;
    out.extend(polynomial_bound_reports(inst)?);
    out.extend(diagnostic_reports(inst, &phi)?);
    Ok(out)
}
