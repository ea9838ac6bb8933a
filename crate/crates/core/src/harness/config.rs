use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::Norm;

/// Ratio between consecutive singular values in the default spectrum.
pub const DEFAULT_RATE: f64 = 0.9;

/// Singular spectrum of a synthetic matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Spectrum {
    /// Geometric decay at rate `0.9` with the gap inserted at `k`.
    Default,
    /// `1+γ` on the first `k` values, `1` on the rest.
    Plateau,
    /// Geometric decay at the given rate with the gap inserted at `k`:
    /// `σ_i = (1+γ)·r^{i−k}` for `i ≤ k`, `σ_{k+1+j} = r^j`.
    Geometric(f64),
    /// Explicit values, padded with zeros; `γ` is ignored.
    Custom(Vec<f64>),
}

impl Spectrum {
    /// The `len` singular values for gap `gamma` at `k`.
    pub fn values(&self, len: usize, k: usize, gamma: f64) -> Result<Vec<f64>> {
        let gapped = |rate: f64| -> Result<Vec<f64>> {
            if !(gamma > 0.0) || !gamma.is_finite() {
                return Err(Error::Gap(format!("relative gap must be positive, got {gamma}")));
            }
            if !(rate > 0.0 && rate <= 1.0) {
                return Err(Error::Config(format!("decay rate must lie in (0, 1], got {rate}")));
            }
            Ok((1..=len)
                .map(|i| {
                    if i <= k {
                        (1.0 + gamma) * rate.powi(i as i32 - k as i32)
                    } else {
                        rate.powi((i - k - 1) as i32)
                    }
                })
                .collect())
        };
        match self {
            Spectrum::Default => gapped(DEFAULT_RATE),
            Spectrum::Plateau => gapped(1.0),
            Spectrum::Geometric(rate) => gapped(*rate),
            Spectrum::Custom(values) => {
                if values.len() > len {
                    return Err(Error::Config(format!(
                        "{} singular values given for a matrix with {len}",
                        values.len()
                    )));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0))
                    || values.windows(2).any(|w| w[0] < w[1])
                {
                    return Err(Error::Config(
                        "custom singular values must be finite, non-negative and non-increasing".into(),
                    ));
                }
                let mut out = values.clone();
                out.resize(len, 0.0);
                Ok(out)
            }
        }
    }

    pub fn is_custom(&self) -> bool {
        matches!(self, Spectrum::Custom(_))
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spectrum::Default => write!(f, "default"),
            Spectrum::Plateau => write!(f, "plateau"),
            Spectrum::Geometric(r) => write!(f, "geometric:{r}"),
            Spectrum::Custom(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "custom:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for Spectrum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("invalid number {v:?} in spectrum")))
        };
        match s.split_once(':') {
            None if s == "default" => Ok(Spectrum::Default),
            None if s == "plateau" => Ok(Spectrum::Plateau),
            Some(("geometric", rate)) => Ok(Spectrum::Geometric(parse(rate)?)),
            Some(("custom", list)) => Ok(Spectrum::Custom(
                list.split(',').map(parse).collect::<Result<_>>()?,
            )),
            _ => Err(Error::Parse(format!(
                "unknown spectrum {s:?}; expected default, plateau, geometric:RATE or custom:V1,V2,..."
            ))),
        }
    }
}

/// Starting guess ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GuessKind {
    Gaussian,
    Sign,
    /// Orthonormalized Gaussian draw.
    Orthonormal,
    /// The leading `s` right singular vectors; spans `range(V_k)` exactly.
    ExactVk,
    /// Matrix read from a text file.
    Custom(PathBuf),
}

impl fmt::Display for GuessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuessKind::Gaussian => write!(f, "gaussian"),
            GuessKind::Sign => write!(f, "sign"),
            GuessKind::Orthonormal => write!(f, "orthonormal"),
            GuessKind::ExactVk => write!(f, "exact_vk"),
            GuessKind::Custom(p) => write!(f, "custom:{}", p.display()),
        }
    }
}

impl FromStr for GuessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(GuessKind::Gaussian),
            "sign" => Ok(GuessKind::Sign),
            "orthonormal" => Ok(GuessKind::Orthonormal),
            "exact_vk" => Ok(GuessKind::ExactVk),
            _ => match s.strip_prefix("custom:") {
                Some(path) if !path.is_empty() => Ok(GuessKind::Custom(PathBuf::from(path))),
                _ => Err(Error::Parse(format!(
                    "unknown guess {s:?}; expected gaussian, sign, orthonormal, exact_vk or custom:PATH"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Parse(format!("unknown format {s:?}; expected csv or json"))),
        }
    }
}

/// One batch of trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub s: usize,
    pub q: usize,
    pub gamma: f64,
    pub spectrum: Spectrum,
    pub guess: GuessKind,
    pub seed: u64,
    pub trials: usize,
    /// Norms for the subspace-angle bound.
    pub norms: Vec<Norm>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// Record wall-clock time per trial; off by default so that output is
    /// reproducible byte for byte.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 100,
            n: 80,
            k: 3,
            s: 3,
            q: 3,
            gamma: 1.0,
            spectrum: Spectrum::Default,
            guess: GuessKind::Gaussian,
            seed: 42,
            trials: 20,
            norms: Norm::BOTH.to_vec(),
            out: None,
            format: OutputFormat::Csv,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    /// Shape constraints: `1 ≤ k ≤ s ≤ n`, `(q+1)s ≤ m`, `k < min(m, n)`.
    pub fn validate_shape(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.k == 0 {
            return fail("k must be at least 1".into());
        }
        if self.k > self.s {
            return fail(format!("k = {} exceeds block width s = {}", self.k, self.s));
        }
        if self.s > self.n {
            return fail(format!("block width s = {} exceeds n = {}", self.s, self.n));
        }
        if (self.q + 1) * self.s > self.m {
            return fail(format!("(q+1)s = {} exceeds m = {}", (self.q + 1) * self.s, self.m));
        }
        if self.k >= self.m.min(self.n) {
            return fail(format!("k = {} must be below min(m, n) = {}", self.k, self.m.min(self.n)));
        }
        if self.trials == 0 {
            return fail("at least one trial is required".into());
        }
        if self.norms.is_empty() {
            return fail("at least one norm must be selected".into());
        }
        Ok(())
    }

    /// Shape constraints plus `γ > 0` unless the spectrum is custom.
    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        if !self.spectrum.is_custom() && !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectra() {
        assert_eq!(Spectrum::Plateau.values(4, 1, 1.0).unwrap(), vec![2.0, 1.0, 1.0, 1.0]);
        let g = Spectrum::Geometric(0.5).values(6, 2, 1.0).unwrap();
        assert_eq!(g[1] / g[2], 2.0);
        assert_eq!(g, vec![4.0, 2.0, 1.0, 0.5, 0.25, 0.125]);
        let d = Spectrum::Default.values(10, 3, 0.25).unwrap();
        assert!(((d[2] - d[3]) / d[3] - 0.25).abs() < 1e-15);
        assert!(d.windows(2).all(|w| w[0] >= w[1]));
        assert!(matches!(Spectrum::Default.values(5, 1, 0.0), Err(Error::Gap(_))));
        assert_eq!(Spectrum::Custom(vec![3.0, 1.0]).values(3, 1, 0.0).unwrap(), vec![3.0, 1.0, 0.0]);
        assert!(Spectrum::Custom(vec![1.0, 3.0]).values(3, 1, 0.0).is_err());
    }

    #[test]
    fn parsing_round_trips() {
        for s in ["default", "plateau", "geometric:0.5", "custom:3,2,1"] {
            assert_eq!(s.parse::<Spectrum>().unwrap().to_string(), s);
        }
        for g in ["gaussian", "sign", "orthonormal", "exact_vk", "custom:/tmp/x.txt"] {
            assert_eq!(g.parse::<GuessKind>().unwrap().to_string(), g);
        }
        assert!("hadamard".parse::<GuessKind>().is_err());
        assert!("geometric:x".parse::<Spectrum>().is_err());
        assert_eq!("json".parse::<OutputFormat>().unwrap(), OutputFormat::Json);
    }

    #[test]
    fn validation() {
        let ok = ExperimentConfig::default();
        assert!(ok.validate().is_ok());
        let bad = |f: fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.k = 4));
        assert!(bad(|c| c.q = 40));
        assert!(bad(|c| c.gamma = 0.0));
        assert!(bad(|c| c.k = 0));
        assert!(bad(|c| c.trials = 0));
        let mut custom = ExperimentConfig { spectrum: Spectrum::Custom(vec![2.0, 1.0]), ..ok };
        custom.gamma = 0.0;
        assert!(custom.validate().is_ok());
    }
}
