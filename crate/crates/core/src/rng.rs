//! Seeded random streams and random matrix ensembles.
//!
//! Every stream is a ChaCha8 counter-based generator keyed by the experiment
//! seed; the trial index and a purpose tag select the stream number, so a
//! trial draws the same numbers regardless of scheduling order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matcore::Matrix;

/// What a stream is used for within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    LeftFactor = 1,
    RightFactor = 2,
    Guess = 3,
    MonteCarlo = 4,
    Competitors = 5,
}

pub fn substream(seed: u64, trial: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial << 8) | purpose as u64);
    rng
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix<f64> {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_col_major(rows, cols, data).expect("shape matches data")
}

/// Entries `±1` with equal probability.
pub fn sign_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix<f64> {
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    Matrix::from_col_major(rows, cols, data).expect("shape matches data")
}
