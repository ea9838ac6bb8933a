//! Synthetic problems, starting guesses, batch verification, the Gaussian
//! expectation check and report serialization.

mod config;
mod io;
mod mc;
mod run;
mod synth;

pub use config::{ExperimentConfig, GuessKind, OutputFormat, Spectrum, DEFAULT_RATE};
pub use io::{format_matrix, parse_matrix, read_csv, read_matrix, rows, to_csv_string, write_csv, write_json, write_matrix, Row};
pub use mc::{gaussian_expectation_mc, McEstimate};
pub use run::{angle_diagnostics, instance_angles, prepare_trial, run_verify, AngleDiagnostics, TrialRecord, VerifyOutcome};
pub use synth::{gen_guess, synth_matrix};
