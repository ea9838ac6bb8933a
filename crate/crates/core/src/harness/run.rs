use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::synth::{gen_guess, synth_matrix};
use crate::angles::{principal_angles, sin_dist};
use crate::bounds::{all_reports, BoundReport, Instance, ReportContext};
use crate::error::{Error, Result};
use crate::matcore::Norm;

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub context: ReportContext,
    pub reports: Vec<BoundReport>,
    pub error: Option<String>,
    /// The error stems from the configuration rather than the numerics.
    pub config_error: bool,
    pub wall_ms: f64,
}

impl TrialRecord {
    pub fn violations(&self) -> usize {
        self.reports.iter().filter(|r| r.is_violation()).count()
    }
}

/// Records of a batch, ordered by trial index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub records: Vec<TrialRecord>,
}

impl VerifyOutcome {
    pub fn violations(&self) -> usize {
        self.records.iter().map(TrialRecord::violations).sum()
    }

    pub fn failed_trials(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }

    /// `0` when every check holds, `1` on violations or numerical trial
    /// failures, `2` when a trial failed because of its configuration.
    pub fn exit_code(&self) -> i32 {
        if self.records.iter().any(|r| r.config_error) {
            2
        } else if self.violations() > 0 || self.failed_trials() > 0 {
            1
        } else {
            0
        }
    }
}

fn context(cfg: &ExperimentConfig) -> ReportContext {
    ReportContext {
        m: cfg.m,
        n: cfg.n,
        k: cfg.k,
        s: cfg.s,
        q: cfg.q,
        gamma: cfg.gamma,
        guess: cfg.guess.to_string(),
        seed: cfg.seed,
    }
}

/// Generates the matrix and guess of one trial and prepares the instance.
pub fn prepare_trial(cfg: &ExperimentConfig, trial: u64) -> Result<Instance> {
    let (a, p) = synth_matrix(cfg.m, cfg.n, cfg.k, cfg.gamma, &cfg.spectrum, cfg.seed, trial)?;
    let x = gen_guess(&cfg.guess, cfg.n, cfg.s, cfg.seed, trial, &p)?;
    let mut inst = Instance::prepare(a, x, cfg.k, cfg.q)?;
    inst.context = context(cfg);
    Ok(inst)
}

fn trial_reports(cfg: &ExperimentConfig, trial: u64) -> Result<Vec<BoundReport>> {
    let inst = prepare_trial(cfg, trial)?;
    let mut reports: Vec<BoundReport> = all_reports(&inst)?
        .into_iter()
        .filter(|r| !r.name.starts_with("angle.krylov.") || r.norm.is_some_and(|n| cfg.norms.contains(&n)))
        .collect();
    for which in Norm::BOTH {
        let sin = sin_dist(&inst.approx.basis.basis, &inst.p.u_k, which)?;
        reports.push(BoundReport::diagnostic("krylov.sin.diag", Some(which), None, sin, f64::INFINITY));
        reports.push(BoundReport::diagnostic(
            "guess.tan.diag",
            Some(which),
            None,
            inst.alignment(which),
            f64::INFINITY,
        ));
    }
    Ok(reports.into_iter().map(|r| r.with_context(&inst.context)).collect())
}

fn run_trial(cfg: &ExperimentConfig, trial: usize) -> TrialRecord {
    let start = Instant::now();
    let outcome = trial_reports(cfg, trial as u64);
    let wall_ms = if cfg.timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    let (reports, error, config_error) = match outcome {
        Ok(r) => (r, None, false),
        Err(e) => (Vec::new(), Some(e.to_string()), e.is_configuration()),
    };
    TrialRecord { trial, context: context(cfg), reports, error, config_error, wall_ms }
}

/// Runs every trial of `cfg` in parallel. Errors inside a trial are recorded
/// on its record and do not stop the batch.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerifyOutcome> {
    cfg.validate_shape()?;
    let records = (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect();
    Ok(VerifyOutcome { records })
}

/// Angles for the first trial of a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleDiagnostics {
    /// Principal angles between `range(X)` and `range(V_k)`.
    pub guess_angles: Vec<f64>,
    pub guess_tan_two: f64,
    pub guess_tan_fro: f64,
    /// Principal angles between the Krylov space and `range(U_k)`.
    pub krylov_angles: Vec<f64>,
    pub krylov_sin_two: f64,
    pub krylov_sin_fro: f64,
    pub krylov_rank: usize,
    pub krylov_rank_ok: bool,
    pub gamma: f64,
}

pub fn angle_diagnostics(cfg: &ExperimentConfig) -> Result<AngleDiagnostics> {
    cfg.validate()?;
    instance_angles(&prepare_trial(cfg, 0)?)
}

/// Angle diagnostics of a prepared instance, e.g. one built from files.
pub fn instance_angles(inst: &Instance) -> Result<AngleDiagnostics> {
    let xq = crate::matcore::thin_qr(&inst.x)?;
    let guess_basis = if xq.is_full_rank() {
        xq.q
    } else {
        crate::matcore::range_basis(&inst.x)?
    };
    if guess_basis.cols() < inst.k() {
        return Err(Error::Rank("range(X) has dimension below k".into()));
    }
    let basis = &inst.approx.basis;
    Ok(AngleDiagnostics {
        guess_angles: principal_angles(&guess_basis, &inst.p.v_k)?.theta,
        guess_tan_two: inst.align_two,
        guess_tan_fro: inst.align_fro,
        krylov_angles: principal_angles(&basis.basis, &inst.p.u_k)?.theta,
        krylov_sin_two: sin_dist(&basis.basis, &inst.p.u_k, Norm::Two)?,
        krylov_sin_fro: sin_dist(&basis.basis, &inst.p.u_k, Norm::Fro)?,
        krylov_rank: basis.rank,
        krylov_rank_ok: basis.rank_ok,
        gamma: inst.gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::GuessKind;

    fn small() -> ExperimentConfig {
        ExperimentConfig { m: 40, n: 30, k: 2, s: 2, q: 2, trials: 4, ..ExperimentConfig::default() }
    }

    #[test]
    fn small_batch_has_no_violations() {
        let out = run_verify(&small()).unwrap();
        assert_eq!(out.records.len(), 4);
        assert!(out.records.iter().enumerate().all(|(i, r)| r.trial == i && r.error.is_none()));
        assert_eq!(out.exit_code(), 0, "{:#?}", out.records.iter().flat_map(|r| r.reports.iter().filter(|x| x.is_violation())).collect::<Vec<_>>());
    }

    #[test]
    fn exact_guess_reports_zero_angles() {
        let cfg = ExperimentConfig { guess: GuessKind::ExactVk, ..small() };
        let out = run_verify(&cfg).unwrap();
        assert_eq!(out.exit_code(), 0);
        for r in out.records[0].reports.iter().filter(|r| r.name.starts_with("angle.")) {
            assert!(r.lhs <= 1e-8, "{r:?}");
        }
    }

    #[test]
    fn zero_gap_is_a_configuration_failure() {
        let cfg = ExperimentConfig { gamma: 0.0, ..small() };
        let out = run_verify(&cfg).unwrap();
        assert!(out.records.iter().all(|r| r.error.as_deref().is_some_and(|e| e.contains("gap"))));
        assert_eq!(out.exit_code(), 2);
    }

    #[test]
    fn norm_selection_filters_angle_reports() {
        let cfg = ExperimentConfig { norms: vec![Norm::Two], trials: 1, ..small() };
        let out = run_verify(&cfg).unwrap();
        let names: Vec<_> = out.records[0].reports.iter().map(|r| r.name.as_str()).collect();
        assert!(names.contains(&"angle.krylov.two") && !names.contains(&"angle.krylov.fro"));
    }

    #[test]
    fn angle_summary() {
        let d = angle_diagnostics(&small()).unwrap();
        assert_eq!(d.guess_angles.len(), 2);
        assert!(d.krylov_sin_two <= d.krylov_sin_fro + 1e-15);
        assert!(d.krylov_rank_ok);
    }
}
