//! One-dimensional entropy estimators and the flat-tail entropy `h̄_q`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::variance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyKind {
    Shannon,
    Differential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyEstimate {
    /// Nats.
    pub value: f64,
    pub kind: EntropyKind,
    pub n_used: usize,
    /// Kernel bandwidth, for differential estimates.
    pub bandwidth: Option<f64>,
}

/// What to do with an entropy argument outside `[0, log q]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RangePolicy {
    #[default]
    Strict,
    Clamp,
}

const DOMAIN_SLACK: f64 = 1e-12;

fn check_q(q: usize) -> Result<()> {
    if q < 2 {
        return Err(Error::OutOfDomain {
            what: "number of classes",
            value: q as f64,
        });
    }
    Ok(())
}

/// Entropy of the q-outcome law whose largest mass is `a`, spread evenly over the rest.
pub fn hbar_q(a: f64, q: usize) -> Result<f64> {
    check_q(q)?;
    let lower = 1.0 / q as f64;
    if !(a >= lower - DOMAIN_SLACK && a <= 1.0 + DOMAIN_SLACK) {
        return Err(Error::OutOfDomain {
            what: "top-class probability",
            value: a,
        });
    }
    Ok(flat_tail_entropy(a.clamp(lower, 1.0), q))
}

fn flat_tail_entropy(a: f64, q: usize) -> f64 {
    let head = if a > 0.0 { -a * a.ln() } else { 0.0 };
    let rest = 1.0 - a;
    let tail = if rest > 0.0 {
        -rest * (rest / (q - 1) as f64).ln()
    } else {
        0.0
    };
    head + tail
}

/// The unique `a ∈ [1/q, 1]` with `h̄_q(a) = h`, by bisection.
pub fn hbar_q_inverse(h: f64, q: usize, policy: RangePolicy) -> Result<f64> {
    check_q(q)?;
    if !h.is_finite() {
        return Err(Error::NonFinite("entropy argument"));
    }
    let max = (q as f64).ln();
    let h = match policy {
        RangePolicy::Clamp => h.clamp(0.0, max),
        RangePolicy::Strict => {
            if h < -DOMAIN_SLACK || h > max + DOMAIN_SLACK {
                return Err(Error::OutOfDomain {
                    what: "entropy argument",
                    value: h,
                });
            }
            h.clamp(0.0, max)
        }
    };
    let lower = 1.0 / q as f64;
    if h <= 0.0 {
        return Ok(1.0);
    }
    if h >= max {
        return Ok(lower);
    }
    let (mut lo, mut hi) = (lower, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if flat_tail_entropy(mid, q) > h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Plug-in entropy of empirical class frequencies.
pub fn shannon_entropy(codes: &[u32]) -> Result<EntropyEstimate> {
    if codes.is_empty() {
        return Err(Error::TooFewRows { needed: 1, found: 0 });
    }
    let counts = class_counts(codes);
    Ok(EntropyEstimate {
        value: entropy_of_counts(&counts),
        kind: EntropyKind::Shannon,
        n_used: codes.len(),
        bandwidth: None,
    })
}

pub(crate) fn class_counts(codes: &[u32]) -> Vec<usize> {
    let q = codes.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut counts = vec![0usize; q];
    for &c in codes {
        counts[c as usize] += 1;
    }
    counts
}

pub(crate) fn entropy_of_counts(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum::<f64>()
        .max(0.0)
}

/// Entropy of a probability vector; zero masses contribute nothing.
pub fn entropy_of_probabilities(probabilities: &[f64]) -> f64 {
    probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Minimum sample size for the kernel estimator.
pub const MIN_KDE_ROWS: usize = 20;

/// Kernel mass beyond this many bandwidths is below double precision.
const KERNEL_REACH: f64 = 8.5;

/// Resubstitution entropy estimate with a Gaussian kernel and Silverman bandwidth.
pub fn marginal_diff_entropy(values: &[f64]) -> Result<EntropyEstimate> {
    let n = values.len();
    if n < MIN_KDE_ROWS {
        return Err(Error::TooFewRows {
            needed: MIN_KDE_ROWS,
            found: n,
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("entropy input"));
    }
    let sd = variance(values).sqrt();
    if sd == 0.0 {
        return Err(Error::ConstantColumn("entropy input".into()));
    }
    let bandwidth = 1.06 * sd * (n as f64).powf(-0.2);
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);

    let reach = KERNEL_REACH * bandwidth;
    let norm = (n as f64) * bandwidth * (2.0 * std::f64::consts::PI).sqrt();
    let mut start = 0;
    let mut end = 0;
    let mut total_log = 0.0;
    for &x in &sorted {
        while sorted[start] < x - reach {
            start += 1;
        }
        while end < n && sorted[end] <= x + reach {
            end += 1;
        }
        let density: f64 = sorted[start..end]
            .iter()
            .map(|&v| {
                let t = (x - v) / bandwidth;
                (-0.5 * t * t).exp()
            })
            .sum::<f64>()
            / norm;
        total_log += density.ln();
    }
    Ok(EntropyEstimate {
        value: -total_log / n as f64,
        kind: EntropyKind::Differential,
        n_used: n,
        bandwidth: Some(bandwidth),
    })
}

/// Unbiased sample variance.
pub fn sample_variance(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            found: values.len(),
        });
    }
    Ok(variance(values))
}
