//! Acceptance suite. Every criterion prints one PASS/FAIL line; the process
//! exits with a failure status when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use bkrylov::angles::{guess_alignment, guess_alignment_pinv, principal_angles, sin_dist, tan_theta};
use bkrylov::bounds::{all_reports, BoundReport, Instance};
use bkrylov::gappoly::{chebyshev_eval, gamma_factor, gap_polynomial_bounds, select_q};
use bkrylov::harness::{
    gaussian_expectation_mc, prepare_trial, run_verify, synth_matrix, to_csv_string, ExperimentConfig,
    GuessKind, Spectrum,
};
use bkrylov::krylov::restatement_residual;
use bkrylov::matcore::{ls_residual, norm, one_two_three_inverse, pinv, thin_qr, thin_svd};
use bkrylov::rng::{gaussian_matrix, substream, Purpose};
use bkrylov::{GapPolynomial, Matrix, Norm};
use rayon::prelude::*;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

const SEED: u64 = 42;
const GRID_TRIALS: usize = 100;

/// Trial `t` cycles through k ∈ {1,3,5}, q ∈ 0..=4, γ ∈ {0.25,1,4} and
/// Gaussian/sign guesses, with `s = k`.
fn grid_config(t: usize) -> ExperimentConfig {
    let c = t % 90;
    let k = [1, 3, 5][c % 3];
    ExperimentConfig {
        m: 100,
        n: 80,
        k,
        s: k,
        q: (c / 3) % 5,
        gamma: [0.25, 1.0, 4.0][(c / 15) % 3],
        guess: if c / 45 == 0 { GuessKind::Gaussian } else { GuessKind::Sign },
        seed: SEED,
        trials: 1,
        ..ExperimentConfig::default()
    }
}

struct GridRun {
    trial: usize,
    inst: Instance,
    reports: Vec<BoundReport>,
}

fn run_grid() -> Result<Vec<GridRun>, String> {
    (0..GRID_TRIALS)
        .into_par_iter()
        .map(|t| {
            let inst = prepare_trial(&grid_config(t), t as u64).map_err(|e| format!("trial {t}: {e}"))?;
            let reports = all_reports(&inst).map_err(|e| format!("trial {t}: {e}"))?;
            Ok(GridRun { trial: t, inst, reports })
        })
        .collect()
}

/// Counts the checks selected by `select`, requires `per_trial(k)` of them
/// in every trial and zero violations.
fn report_suite(
    grid: &Result<Vec<GridRun>, String>,
    select: impl Fn(&str) -> bool,
    per_trial: impl Fn(usize) -> usize,
) -> (bool, String) {
    let runs = match grid {
        Ok(r) => r,
        Err(e) => return (false, e.clone()),
    };
    let (mut checks, mut violations, mut worst) = (0usize, 0usize, 0.0f64);
    let mut missing = Vec::new();
    for run in runs {
        let chosen: Vec<_> = run.reports.iter().filter(|r| !r.diagnostic && select(&r.name)).collect();
        if chosen.len() != per_trial(run.inst.k()) {
            missing.push(run.trial);
        }
        for r in chosen {
            checks += 1;
            if !r.satisfied {
                violations += 1;
                eprintln!("    violation in trial {}: {r:?}", run.trial);
            }
            if r.rhs > 0.0 {
                worst = worst.max(r.lhs / r.rhs);
            }
        }
    }
    (
        violations == 0 && missing.is_empty(),
        format!(
            "{checks} checks over {} trials, {violations} violations, max lhs/rhs {worst:.3e}{}",
            runs.len(),
            if missing.is_empty() { String::new() } else { format!(", wrong check count in trials {missing:?}") }
        ),
    )
}

fn angle_suite(grid: &Result<Vec<GridRun>, String>) -> Verdict {
    let (pass, detail) = report_suite(
        grid,
        |n| matches!(n, "angle.krylov.two" | "angle.krylov.fro" | "poly.angle.ratio" | "poly.angle.gap"),
        |_| 4,
    );
    Verdict::new(pass, detail)
}

fn vector_suite(grid: &Result<Vec<GridRun>, String>) -> Verdict {
    let (pass, detail) = report_suite(grid, |n| n == "angle.vector" || n == "poly.vector", |k| 2 * k);
    Verdict::new(pass, detail)
}

fn approximation_suite(grid: &Result<Vec<GridRun>, String>) -> Verdict {
    let (pass, detail) = report_suite(
        grid,
        |n| n.starts_with("approx.") || n.starts_with("poly.approx.") || n == "poly.delta",
        |k| 8 * k + 1,
    );
    let Ok(runs) = grid else { return Verdict::new(false, detail) };
    let mut exceed = 0;
    let mut worst = f64::NEG_INFINITY;
    for run in runs {
        let inst = &run.inst;
        let sigma_1 = inst.p.sigma_k[0];
        for i in 0..inst.k() {
            let u_i = inst.approx.u_hat.columns(i..i + 1);
            let captured = inst.a.t_matmul(&u_i).norm_fro();
            let excess = (captured - inst.p.sigma_k[i]) / sigma_1;
            worst = worst.max(excess);
            if excess > 1e-10 {
                exceed += 1;
            }
        }
    }
    Verdict::new(
        pass && exceed == 0,
        format!("{detail}; |u_i^T A| above sigma_i in {exceed} cases, max excess {worst:.2e} sigma_1"),
    )
}

fn exact_guess_collapse() -> Verdict {
    let mut worst_sin = 0.0f64;
    let mut worst_err = 0.0f64;
    let mut failures = Vec::new();
    let mut count = 0;
    for (c, (k, q, gamma)) in [1usize, 3, 5]
        .into_iter()
        .flat_map(|k| (0..5).flat_map(move |q| [0.25, 1.0, 4.0].map(move |g| (k, q, g))))
        .enumerate()
    {
        count += 1;
        let cfg = ExperimentConfig { k, s: k, q, gamma, guess: GuessKind::ExactVk, ..grid_config(0) };
        let result = prepare_trial(&cfg, c as u64).and_then(|inst| {
            let basis = &inst.approx.basis.basis;
            let sin = sin_dist(basis, &inst.p.u_k, Norm::Two)?.max(sin_dist(basis, &inst.p.u_k, Norm::Fro)?);
            let u = &inst.approx.u_hat;
            let err = inst.a.sub(&u.matmul(&u.t_matmul(&inst.a))).norm_fro();
            let best = inst.p.sigma_kp.iter().map(|s| s * s).sum::<f64>().sqrt();
            Ok((sin, (err - best).abs() / best))
        });
        match result {
            Ok((sin, rel)) => {
                worst_sin = worst_sin.max(sin);
                worst_err = worst_err.max(rel);
                if sin > 1e-8 || rel > 1e-8 {
                    failures.push(format!("k={k} q={q} gamma={gamma}"));
                }
            }
            Err(e) => failures.push(format!("k={k} q={q} gamma={gamma}: {e}")),
        }
    }
    Verdict::new(
        failures.is_empty(),
        format!(
            "{count} runs, max sin {worst_sin:.2e}, max relative error gap {worst_err:.2e}{}",
            if failures.is_empty() { String::new() } else { format!(", failing: {failures:?}") }
        ),
    )
}

/// Rank-`i` competitors `Y = BC` drawn from the Krylov coordinates: half
/// Gaussian, half small perturbations of the optimal factors.
fn competitor_counterexamples(run: &GridRun, i: usize, count: usize) -> (usize, f64) {
    let inst = &run.inst;
    let basis = &inst.approx.basis.basis;
    let w = basis.t_matmul(&inst.a);
    let f = thin_svd(&w).expect("svd of W");
    let a_fro = inst.a.norm_fro();
    let best = inst.a.sub(&basis.matmul(&f.truncated(i))).norm_fro();
    let mut rng = substream(SEED, (run.trial * 8 + i) as u64, Purpose::Competitors);
    let (r, n) = w.shape();
    let b_opt = f.u.columns(0..i).scale_columns(&f.sigma[..i]);
    let c_opt = f.v.columns(0..i).transpose();
    let mut hits = 0;
    let mut closest = f64::INFINITY;
    for c in 0..count {
        let y = if c % 2 == 0 {
            gaussian_matrix(&mut rng, r, i).matmul(&gaussian_matrix(&mut rng, i, n)).scaled(f.sigma[0] / (n as f64).sqrt())
        } else {
            let eps = 10f64.powi(-((c % 7) as i32) - 1);
            let b = b_opt.add(&gaussian_matrix(&mut rng, r, i).scaled(eps * f.sigma[0]));
            let cm = c_opt.add(&gaussian_matrix(&mut rng, i, n).scaled(eps));
            b.matmul(&cm)
        };
        let value = inst.a.sub(&basis.matmul(&y)).norm_fro();
        closest = closest.min((value - best) / a_fro);
        if value < best - 1e-12 * a_fro {
            hits += 1;
        }
    }
    (hits, closest)
}

fn restatement_suite(grid: &Result<Vec<GridRun>, String>) -> Verdict {
    let runs = match grid {
        Ok(r) => r,
        Err(e) => return Verdict::new(false, e.clone()),
    };
    let results: Vec<(f64, usize, usize, f64)> = runs
        .par_iter()
        .map(|run| {
            let inst = &run.inst;
            let a_fro = inst.a.norm_fro();
            let mut worst = 0.0f64;
            let mut hits = 0;
            let mut samples = 0;
            let mut closest = f64::INFINITY;
            for i in 1..=inst.k() {
                let res = restatement_residual(&inst.a, &inst.approx.basis, &inst.approx.u_hat, i)
                    .map_or(f64::INFINITY, |r| r / a_fro);
                worst = worst.max(res);
                let (h, c) = competitor_counterexamples(run, i, 200);
                hits += h;
                samples += 200;
                closest = closest.min(c);
            }
            (worst, hits, samples, closest)
        })
        .collect();
    let worst = results.iter().fold(0.0f64, |m, r| m.max(r.0));
    let hits: usize = results.iter().map(|r| r.1).sum();
    let samples: usize = results.iter().map(|r| r.2).sum();
    let closest = results.iter().fold(f64::INFINITY, |m, r| m.min(r.3));
    Verdict::new(
        worst <= 1e-8 && hits == 0,
        format!(
            "max residual {worst:.2e} |A|_F; {samples} competitors, {hits} counterexamples, closest margin {closest:.2e} |A|_F"
        ),
    )
}

fn cheb(qprime: usize, x: f64) -> f64 {
    chebyshev_eval(qprime, x).expect("odd degree").value
}

fn recurrence(qprime: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    for _ in 1..qprime {
        (prev, cur) = (cur, 2.0 * x * cur - prev);
    }
    cur
}

fn grid_points(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> + Clone {
    (0..count).map(move |j| lo + (hi - lo) * j as f64 / (count - 1) as f64)
}

fn polynomial_suite() -> Verdict {
    let mut failures: Vec<String> = Vec::new();
    let mut fail = |what: String| failures.push(what);
    for qprime in (1..=11).step_by(2) {
        for x in grid_points(0.0, 1.0, 200) {
            if cheb(qprime, x).abs() > 1.0 + 1e-12 {
                fail(format!("small input T_{qprime}({x})"));
            }
        }
        if (cheb(qprime, 1.0) - 1.0).abs() > 1e-12 {
            fail(format!("T_{qprime}(1) != 1"));
        }
        for x in grid_points(1.0, 10.0, 200) {
            let lower = x / 4.0 * 2f64.powf(qprime as f64 * (x - 1.0).sqrt().min(1.0));
            if cheb(qprime, x) < lower * (1.0 - 1e-12) {
                fail(format!("amplification T_{qprime}({x})"));
            }
        }
        let ratios: Vec<f64> = grid_points(1.0, 10.0, 200).map(|x| cheb(qprime, x) / x).collect();
        for (j, hi) in ratios.iter().enumerate() {
            if ratios[..j].iter().any(|lo| *hi < lo * (1.0 - 1e-12)) {
                fail(format!("superlinear growth T_{qprime} at grid index {j}"));
            }
        }
        for x in grid_points(-3.0, 3.0, 200) {
            let t = cheb(qprime, x);
            if (t - recurrence(qprime, x)).abs() > 1e-10 * t.abs().max(1.0) {
                fail(format!("recurrence T_{qprime}({x})"));
            }
            if (cheb(qprime, -x) + t).abs() > 1e-12 * t.abs().max(1.0) {
                fail(format!("odd symmetry T_{qprime}({x})"));
            }
        }
    }
    let mut worst_tail = 0.0f64;
    for q in 0..=5 {
        for gamma in [0.01, 0.25, 1.0, 4.0, 10.0] {
            for alpha in [1e-3, 1.0, 1e3] {
                let phi = GapPolynomial::new(q, gamma, alpha).expect("valid polynomial");
                let pivot = phi.pivot();
                if (phi.eval(pivot) - pivot).abs() > 1e-12 * pivot {
                    fail(format!("normalization q={q} gamma={gamma} alpha={alpha}"));
                }
                let bound = gap_polynomial_bounds(q, gamma, pivot, alpha).expect("gap holds").tail_bound;
                let peak = grid_points(0.0, alpha, 1000).fold(0.0f64, |m, x| m.max(phi.eval(x).abs()));
                worst_tail = worst_tail.max(peak / bound);
                if peak > bound {
                    fail(format!("tail bound q={q} gamma={gamma} alpha={alpha}: {peak} > {bound}"));
                }
                for x in grid_points(pivot, 5.0 * pivot, 200) {
                    if phi.eval(x) < x * (1.0 - 1e-12) {
                        fail(format!("domination q={q} gamma={gamma} alpha={alpha} x={x}"));
                    }
                }
            }
        }
    }
    Verdict::new(
        failures.is_empty(),
        format!(
            "degrees 1..=11 on 200-point grids, 90 polynomials; max tail peak/bound {worst_tail:.3}{}",
            if failures.is_empty() { String::new() } else { format!(", failing: {:?}", &failures[..failures.len().min(5)]) }
        ),
    )
}

fn q_selection() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    for epsilon in [0.1, 0.01] {
        for gamma in [0.25, 1.0] {
            let base = ExperimentConfig {
                k: 3,
                s: 3,
                q: 0,
                gamma,
                guess: GuessKind::Orthonormal,
                ..grid_config(0)
            };
            let outcome = prepare_trial(&base, 0).and_then(|inst| {
                let tan = inst.align_two;
                let q = select_q(epsilon, gamma, tan)?;
                let big_gamma = gamma_factor(tan, q, gamma);
                let run = prepare_trial(&ExperimentConfig { q, ..base.clone() }, 0)?;
                let sin = sin_dist(&run.approx.basis.basis, &run.p.u_k, Norm::Two)?;
                Ok((q, big_gamma, sin))
            });
            match outcome {
                Ok((q, big_gamma, sin)) => {
                    let ok = big_gamma <= epsilon && sin <= epsilon / (1.0 + gamma) + 1e-8;
                    pass &= ok;
                    lines.push(format!("eps={epsilon} gamma={gamma}: q={q} Gamma={big_gamma:.2e} sin={sin:.2e}"));
                }
                Err(e) => {
                    pass = false;
                    lines.push(format!("eps={epsilon} gamma={gamma}: {e}"));
                }
            }
        }
    }
    Verdict::new(pass, lines.join("; "))
}

fn gaussian_expectation() -> Verdict {
    let outcome = synth_matrix(20, 20, 2, 1.0, &Spectrum::Default, SEED, 0)
        .and_then(|(_, p)| gaussian_expectation_mc(&p.v_kp, 10_000, SEED));
    match outcome {
        Ok(est) => Verdict::new(
            est.mean_consistent() && est.markov_frequency >= 0.9,
            format!(
                "mean {:.4} vs {:.4} (stderr {:.4}), Markov event frequency {:.4}",
                est.mean, est.expected, est.stderr, est.markov_frequency
            ),
        ),
        Err(e) => Verdict::new(false, e.to_string()),
    }
}

fn oracle_equivalences() -> Verdict {
    let mut failures = Vec::new();

    // Least squares: no sampled coefficient beats the residual, and nearby
    // samples approach it.
    let mut ls_gap = f64::INFINITY;
    for inst in 0..50u64 {
        let mut rng = substream(7, inst, Purpose::Competitors);
        let rows = 6 + (inst as usize % 5);
        let cols = 2 + (inst as usize % 3);
        let a = if inst % 5 == 4 {
            gaussian_matrix(&mut rng, rows, 1).matmul(&gaussian_matrix(&mut rng, 1, cols))
        } else {
            gaussian_matrix(&mut rng, rows, cols)
        };
        let b = gaussian_matrix(&mut rng, rows, 2);
        let y_opt = pinv(&a, None).unwrap().matmul(&b);
        for which in Norm::BOTH {
            let r = ls_residual(&a, &b, which).unwrap();
            let mut sampled = f64::INFINITY;
            for c in 0..200i32 {
                let step = 10f64.powi(-(c % 8));
                let y = y_opt.add(&gaussian_matrix(&mut rng, cols, 2).scaled(step));
                sampled = sampled.min(norm(&b.sub(&a.matmul(&y)), which).unwrap());
            }
            ls_gap = ls_gap.min((sampled - r) / r.max(1e-300));
            if sampled < r * (1.0 - 1e-12) || sampled > r * (1.0 + 1e-6) {
                failures.push(format!("ls instance {inst} {which:?}: residual {r}, sampled {sampled}"));
            }
        }
    }

    // (Y1 Y2)† = Y2† Y1† for equal-rank factors.
    let mut product_err = 0.0f64;
    for inst in 0..20u64 {
        let mut rng = substream(8, inst, Purpose::Competitors);
        let r = 2 + inst as usize % 4;
        let y1 = gaussian_matrix(&mut rng, 12, r);
        let y2 = gaussian_matrix(&mut rng, r, 9);
        let lhs = pinv(&y1.matmul(&y2), None).unwrap();
        let rhs = pinv(&y2, None).unwrap().matmul(&pinv(&y1, None).unwrap());
        product_err = product_err.max(lhs.sub(&rhs).norm_fro() / lhs.norm_fro());
    }
    if product_err > 1e-10 {
        failures.push(format!("pseudoinverse product rule error {product_err:.2e}"));
    }

    let (mut tan_err, mut right_err, mut cancel_err) = (0.0f64, 0.0f64, 0.0f64);
    for inst in 0..20u64 {
        let (_, p) = synth_matrix(30, 20, 3, 1.0, &Spectrum::Default, 9, inst).unwrap();
        let mut rng = substream(9, inst, Purpose::Guess);
        let x = gaussian_matrix(&mut rng, 20, 3 + inst as usize % 3);
        let qr = thin_qr(&x).unwrap();
        for which in Norm::BOTH {
            let direct = tan_theta(&qr.q, &p.v_k, &p.v_kp, which).unwrap();
            let through_r = guess_alignment(&x, &p, which).unwrap();
            let through_pinv = guess_alignment_pinv(&qr.q, &p, which).unwrap();
            let from_angles = if qr.q.cols() == p.k {
                principal_angles(&qr.q, &p.v_k).unwrap().tan_norm(which)
            } else {
                direct
            };
            for other in [through_r, through_pinv, from_angles] {
                tan_err = tan_err.max((direct - other).abs() / direct);
            }
            let mix = gaussian_matrix(&mut rng, x.cols(), x.cols());
            let mixed = guess_alignment(&x.matmul(&mix), &p, which).unwrap();
            cancel_err = cancel_err.max((mixed - through_r).abs() / through_r);
        }
        let x_k = p.v_k.t_matmul(&x);
        let g = one_two_three_inverse(&x_k, &qr.r).unwrap();
        right_err = right_err.max(x_k.matmul(&g).sub(&Matrix::identity(p.k)).norm_fro());
    }
    if tan_err > 1e-8 {
        failures.push(format!("tangent paths disagree by {tan_err:.2e}"));
    }
    if right_err > 1e-10 {
        failures.push(format!("(1,2,3) right identity error {right_err:.2e}"));
    }
    if cancel_err > 1e-8 {
        failures.push(format!("R-cancellation error {cancel_err:.2e}"));
    }
    Verdict::new(
        failures.is_empty(),
        format!(
            "ls sampled gap {ls_gap:.1e}, product rule {product_err:.1e}, tangent paths {tan_err:.1e}, right identity {right_err:.1e}, R-cancellation {cancel_err:.1e}{}",
            if failures.is_empty() { String::new() } else { format!("; failing: {failures:?}") }
        ),
    )
}

fn determinism() -> Verdict {
    let cfg = ExperimentConfig::default();
    let first = run_verify(&cfg).and_then(|o| to_csv_string(&o.records));
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("thread pool")
        .install(|| run_verify(&cfg).and_then(|o| to_csv_string(&o.records)));
    match (first, serial) {
        (Ok(a), Ok(b)) => Verdict::new(
            !a.is_empty() && a == b,
            format!("{} bytes, parallel and single-threaded runs identical: {}", a.len(), a == b),
        ),
        (Err(e), _) | (_, Err(e)) => Verdict::new(false, e.to_string()),
    }
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

fn main() -> ExitCode {
    let start = Instant::now();
    let grid = run_grid();
    let criteria: [Criterion; 10] = [
        ("Krylov angle bounds", Box::new(|| angle_suite(&grid))),
        ("per-vector angle bounds", Box::new(|| vector_suite(&grid))),
        ("approximation bounds", Box::new(|| approximation_suite(&grid))),
        ("exact-guess collapse", Box::new(exact_guess_collapse)),
        ("restatement and sampled optimality", Box::new(|| restatement_suite(&grid))),
        ("polynomial properties", Box::new(polynomial_suite)),
        ("iteration-count selection", Box::new(q_selection)),
        ("Gaussian expectation", Box::new(gaussian_expectation)),
        ("oracle equivalences", Box::new(oracle_equivalences)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (idx, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        if !v.pass {
            failed += 1;
        }
        println!("[{}] {:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, idx + 1, v.detail);
    }
    println!(
        "acceptance: {} of 10 criteria passed in {:.1} s",
        10 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
