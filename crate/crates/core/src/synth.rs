//! Synthetic benchmarks with known theoretical-best performance.
//!
//! Inputs are uniform on `[0, 1]^d`. Randomness comes from one ChaCha8 key
//! split into independent streams: inputs use stream 0, the Monte Carlo
//! threshold estimate stream 1, and the noise of replicate `r` stream `2 + r`.
//! Replicates therefore share inputs and differ only in noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::data::{Column, Dataset};
use crate::error::{Error, Result};
use crate::numerics::variance;

/// Draws used to estimate the classification threshold `E[f(x)]`.
pub const THRESHOLD_DRAWS: usize = 1_000_000;

const INPUT_STREAM: u64 = 0;
const THRESHOLD_STREAM: u64 = 1;
const NOISE_STREAM_BASE: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthFunction {
    /// Weighted sum `Σ x_i / i`.
    F1,
    /// Square root of the weighted sum.
    F2,
    /// Negated cube of `Σ |x_i − ½| / i`.
    F3,
    /// `tanh(5/2 · Σ (x_i − ½)² / i)`.
    F4,
}

impl std::str::FromStr for SynthFunction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "f1" => Ok(SynthFunction::F1),
            "f2" => Ok(SynthFunction::F2),
            "f3" => Ok(SynthFunction::F3),
            "f4" => Ok(SynthFunction::F4),
            other => Err(format!("unknown function '{other}' (expected f1..f4)")),
        }
    }
}

impl SynthFunction {
    /// Unscaled value at `x`.
    pub fn raw(self, x: &[f64]) -> f64 {
        let weighted = |g: &dyn Fn(f64) -> f64| -> f64 {
            x.iter().enumerate().map(|(i, &v)| g(v) / (i + 1) as f64).sum()
        };
        match self {
            SynthFunction::F1 => weighted(&|v| v),
            SynthFunction::F2 => weighted(&|v| v).abs().sqrt(),
            SynthFunction::F3 => -weighted(&|v| (v - 0.5).abs()).powi(3),
            SynthFunction::F4 => (2.5 * weighted(&|v| (v - 0.5) * (v - 0.5))).tanh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    Regression { sigma: f64 },
    Classification { flip_probability: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SynthSpec {
    pub function: SynthFunction,
    pub dimension: usize,
    pub kind: SynthKind,
    /// Defaults to `1000 · dimension`.
    pub rows: Option<usize>,
    pub seed: u64,
    pub replicate: u64,
}

impl SynthSpec {
    pub fn new(function: SynthFunction, dimension: usize, kind: SynthKind, seed: u64) -> Self {
        Self {
            function,
            dimension,
            kind,
            rows: None,
            seed,
            replicate: 0,
        }
    }

    pub fn row_count(&self) -> usize {
        self.rows.unwrap_or(1000 * self.dimension)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if self.row_count() < 2 {
            return Err(Error::TooFewRows {
                needed: 2,
                found: self.row_count(),
            });
        }
        match self.kind {
            SynthKind::Regression { sigma } if !(sigma > 0.0 && sigma.is_finite()) => Err(Error::OutOfDomain {
                what: "noise standard deviation",
                value: sigma,
            }),
            SynthKind::Classification { flip_probability: p } if !(0.0..=0.5).contains(&p) => {
                Err(Error::OutOfDomain {
                    what: "flip probability",
                    value: p,
                })
            }
            _ => Ok(()),
        }
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Monte Carlo estimate of the mean of the unscaled function.
pub fn threshold(function: SynthFunction, dimension: usize, seed: u64) -> f64 {
    let mut rng = stream(seed, THRESHOLD_STREAM);
    let mut x = vec![0.0; dimension];
    let mut total = 0.0;
    for _ in 0..THRESHOLD_DRAWS {
        x.iter_mut().for_each(|v| *v = rng.random());
        total += function.raw(&x);
    }
    total / THRESHOLD_DRAWS as f64
}

/// Generate the dataset: columns `x1..xd` then target `y`.
pub fn generate(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.row_count();
    let d = spec.dimension;
    let mut inputs = stream(spec.seed, INPUT_STREAM);
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(n); d];
    let mut raw = Vec::with_capacity(n);
    let mut x = vec![0.0; d];
    for _ in 0..n {
        for (v, col) in x.iter_mut().zip(columns.iter_mut()) {
            *v = inputs.random();
            col.push(*v);
        }
        raw.push(spec.function.raw(&x));
    }
    let spread = variance(&raw).sqrt();
    if spread.is_nan() || spread <= 0.0 {
        return Err(Error::ConstantColumn("f(x)".into()));
    }

    let mut noise = stream(spec.seed, NOISE_STREAM_BASE + spec.replicate);
    let target = match spec.kind {
        SynthKind::Regression { sigma } => {
            let y: Vec<f64> = raw
                .iter()
                .map(|f| f / spread + sigma * noise.sample::<f64, _>(StandardNormal))
                .collect();
            Column::continuous("y", y)
        }
        SynthKind::Classification { flip_probability } => {
            // scaling is positive, so the raw threshold gives the same labels
            let m = threshold(spec.function, d, spec.seed);
            let labels: Vec<&str> = raw
                .iter()
                .map(|&f| {
                    let z = f >= m;
                    let flip = noise.random::<f64>() < flip_probability;
                    if z != flip {
                        "1"
                    } else {
                        "0"
                    }
                })
                .collect();
            Column::categorical("y", &labels)
        }
    };
    let mut all: Vec<Column> = columns
        .into_iter()
        .enumerate()
        .map(|(i, v)| Column::continuous(format!("x{}", i + 1), v))
        .collect();
    all.push(target);
    Dataset::new(all, "y")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundTruth {
    pub best_r2: Option<f64>,
    pub best_rmse: Option<f64>,
    pub best_accuracy: Option<f64>,
}

/// Exact theoretical-best classic metrics for a spec.
pub fn ground_truth(spec: &SynthSpec) -> Result<GroundTruth> {
    spec.validate()?;
    Ok(match spec.kind {
        SynthKind::Regression { sigma } => GroundTruth {
            best_r2: Some(1.0 / (1.0 + sigma * sigma)),
            best_rmse: Some(sigma),
            best_accuracy: None,
        },
        SynthKind::Classification { flip_probability } => GroundTruth {
            best_r2: None,
            best_rmse: None,
            best_accuracy: Some(1.0 - flip_probability),
        },
    })
}

/// Noise level whose best R² is `r2`.
pub fn sigma_for_target_r2(r2: f64) -> Result<f64> {
    if !(r2 > 0.0 && r2 < 1.0) {
        return Err(Error::OutOfDomain {
            what: "target R²",
            value: r2,
        });
    }
    Ok((1.0 / r2 - 1.0).sqrt())
}
