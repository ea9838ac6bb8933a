use super::config::{GuessKind, Spectrum};
use super::io::read_matrix;
use crate::error::{Error, Result};
use crate::matcore::{partition_svd, thin_qr, Matrix, SvdFactors};
use crate::rng::{gaussian_matrix, sign_matrix, substream, Purpose};
use crate::PartitionedSvd;

/// `A = U diag(σ) Vᵀ` with `U`, `V` the orthonormal factors of seeded
/// Gaussian draws and `σ` taken from `spectrum`. Returns `A` with the
/// partition of its constructed factors at `k`.
pub fn synth_matrix(
    m: usize,
    n: usize,
    k: usize,
    gamma: f64,
    spectrum: &Spectrum,
    seed: u64,
    trial: u64,
) -> Result<(Matrix<f64>, PartitionedSvd)> {
    let r = m.min(n);
    if r == 0 {
        return Err(Error::Config(format!("empty matrix shape {m}x{n}")));
    }
    let sigma = spectrum.values(r, k, gamma)?;
    let u = thin_qr(&gaussian_matrix(&mut substream(seed, trial, Purpose::LeftFactor), m, r))?.q;
    let v = thin_qr(&gaussian_matrix(&mut substream(seed, trial, Purpose::RightFactor), n, r))?.q;
    let a = u.scale_columns(&sigma).matmul_t(&v);
    let p = partition_svd(&SvdFactors { u, sigma, v }, k)?;
    Ok((a, p))
}

/// An `n × s` starting guess of the given kind.
pub fn gen_guess(
    kind: &GuessKind,
    n: usize,
    s: usize,
    seed: u64,
    trial: u64,
    p: &PartitionedSvd,
) -> Result<Matrix<f64>> {
    if s == 0 || s > n {
        return Err(Error::Config(format!("block width s = {s} must lie in 1..={n}")));
    }
    let mut rng = substream(seed, trial, Purpose::Guess);
    match kind {
        GuessKind::Gaussian => Ok(gaussian_matrix(&mut rng, n, s)),
        GuessKind::Sign => Ok(sign_matrix(&mut rng, n, s)),
        GuessKind::Orthonormal => Ok(thin_qr(&gaussian_matrix(&mut rng, n, s))?.q),
        GuessKind::ExactVk => {
            if p.n() != n || s < p.k {
                return Err(Error::Config(format!(
                    "exact guess needs n = {} and s >= k = {}",
                    p.n(),
                    p.k
                )));
            }
            p.v_k.hcat(&p.v_kp.columns(0..s - p.k))
        }
        GuessKind::Custom(path) => {
            let x = read_matrix(path)?;
            if x.shape() != (n, s) {
                return Err(Error::Config(format!(
                    "guess file {} is {}x{}, expected {n}x{s}",
                    path.display(),
                    x.rows(),
                    x.cols()
                )));
            }
            x.ensure_nonempty_finite("guess")?;
            Ok(x)
        }
    }
}
