//! Theoretical-best performance implied by a mutual-information estimate.

use std::f64::consts::{E, LN_2, PI};

use serde::Serialize;

use crate::data::{Column, ColumnData, Dataset};
use crate::entropy::{
    class_counts, entropy_of_probabilities, hbar_q_inverse, marginal_diff_entropy,
    sample_variance, RangePolicy,
};
use crate::error::{Error, Result};
use crate::mi::{mutual_information_between, MiEngine, MiEstimate, SolverConfig};
use crate::numerics::mean;

fn check_mi(mi: f64) -> Result<()> {
    if !mi.is_finite() {
        return Err(Error::NonFinite("mutual information"));
    }
    if mi < 0.0 {
        return Err(Error::OutOfDomain {
            what: "mutual information",
            value: mi,
        });
    }
    Ok(())
}

/// Highest generalized R²: `1 − e^{−2 I}`.
pub fn best_r2(mi: f64) -> Result<f64> {
    check_mi(mi)?;
    Ok(-(-2.0 * mi).exp_m1())
}

/// Lowest achievable RMSE: `sqrt(Var(y) e^{−2 I})`.
pub fn best_rmse(mi: f64, variance: f64) -> Result<f64> {
    check_mi(mi)?;
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(Error::OutOfDomain {
            what: "variance",
            value: variance,
        });
    }
    Ok((variance * (-2.0 * mi).exp()).sqrt())
}

fn check_frequencies(freqs: &[f64]) -> Result<()> {
    if freqs.len() < 2 {
        return Err(Error::OutOfDomain {
            what: "number of classes",
            value: freqs.len() as f64,
        });
    }
    if freqs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidArgument("class frequencies must lie in [0, 1]".into()));
    }
    let total: f64 = freqs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::OutOfDomain {
            what: "sum of class frequencies",
            value: total,
        });
    }
    Ok(())
}

/// Highest achievable accuracy: the flat-tail inverse of `H(y) − I`, never
/// below the majority-class rate.
pub fn best_accuracy(mi: f64, class_frequencies: &[f64]) -> Result<f64> {
    check_mi(mi)?;
    check_frequencies(class_frequencies)?;
    let q = class_frequencies.len();
    let h = entropy_of_probabilities(class_frequencies);
    let conditional = (h - mi).clamp(0.0, (q as f64).ln());
    let a = hbar_q_inverse(conditional, q, RangePolicy::Clamp)?;
    let majority = class_frequencies.iter().copied().fold(0.0, f64::max);
    Ok(a.max(majority))
}

/// Highest expected log-likelihood per observation: `−h(y) + I`.
pub fn best_log_likelihood(mi: f64, target_entropy: f64) -> Result<f64> {
    check_mi(mi)?;
    if !target_entropy.is_finite() {
        return Err(Error::NonFinite("target entropy"));
    }
    Ok(mi - target_entropy)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Diagnostics {
    pub hellman_raviv_lower: Option<f64>,
    pub brillinger_mse_lower: Option<f64>,
}

/// Companion bounds. Pass `variance` for regression targets and `classes`
/// for classification targets.
///
/// The entropy power `e^{2h}/(2πe)` never exceeds the variance in theory, so
/// kernel-estimate noise above it is clipped to keep the bound coherent.
pub fn diagnostics_bounds(
    mi: f64,
    target_entropy: f64,
    variance: Option<f64>,
    classes: Option<usize>,
) -> Diagnostics {
    let hellman_raviv_lower =
        classes.map(|_| (1.0 - (target_entropy - mi).max(0.0) / (2.0 * LN_2)).clamp(0.0, 1.0));
    let brillinger_mse_lower = variance.map(|v| {
        let power = ((2.0 * target_entropy).exp() / (2.0 * PI * E)).min(v);
        power * (-2.0 * mi).exp()
    });
    Diagnostics {
        hellman_raviv_lower,
        brillinger_mse_lower,
    }
}

/// Summary statistics of the target needed to turn MI into metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetProfile {
    pub name: String,
    /// Shannon entropy for categorical targets, differential otherwise.
    pub entropy: f64,
    pub variance: Option<f64>,
    pub mean: Option<f64>,
    pub class_frequencies: Option<Vec<f64>>,
}

impl TargetProfile {
    pub fn of(dataset: &Dataset) -> Result<Self> {
        Self::of_column(dataset.target())
    }

    pub fn of_column(column: &Column) -> Result<Self> {
        match &column.data {
            ColumnData::Continuous(values) => Ok(Self {
                name: column.name().to_string(),
                entropy: marginal_diff_entropy(values)
                    .map_err(|e| match e {
                        Error::ConstantColumn(_) => Error::ConstantColumn(column.name().to_string()),
                        other => other,
                    })?
                    .value,
                variance: Some(sample_variance(values)?),
                mean: Some(mean(values)),
                class_frequencies: None,
            }),
            ColumnData::Categorical { codes, labels } => {
                let mut counts = class_counts(codes);
                counts.resize(labels.len().max(2), 0);
                let n = codes.len() as f64;
                let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
                Ok(Self {
                    name: column.name().to_string(),
                    entropy: entropy_of_probabilities(&freqs),
                    variance: None,
                    mean: None,
                    class_frequencies: Some(freqs),
                })
            }
        }
    }

    pub fn classes(&self) -> Option<usize> {
        self.class_frequencies.as_ref().map(Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AchievablePerformance {
    pub target: String,
    pub features: Vec<String>,
    pub mi: MiEstimate,
    pub best_r2: f64,
    /// Classification only: `best_r2` over its ceiling `1 − e^{−2 log q}`.
    pub best_r2_normalized: Option<f64>,
    pub best_rmse: Option<f64>,
    pub best_accuracy: Option<f64>,
    pub best_log_likelihood: f64,
    pub target_entropy: f64,
    pub target_variance: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl AchievablePerformance {
    pub fn from_mi(profile: &TargetProfile, features: Vec<String>, mi: MiEstimate) -> Result<Self> {
        let r2 = best_r2(mi.value)?;
        let best_accuracy = profile
            .class_frequencies
            .as_deref()
            .map(|f| best_accuracy(mi.value, f))
            .transpose()?;
        let best_rmse = profile
            .variance
            .map(|v| best_rmse(mi.value, v))
            .transpose()?;
        let best_r2_normalized = profile.classes().map(|q| r2 / best_r2((q as f64).ln()).unwrap_or(1.0));
        Ok(Self {
            target: profile.name.clone(),
            features,
            best_r2: r2,
            best_r2_normalized,
            best_rmse,
            best_accuracy,
            best_log_likelihood: best_log_likelihood(mi.value, profile.entropy)?,
            target_entropy: profile.entropy,
            target_variance: profile.variance,
            diagnostics: diagnostics_bounds(mi.value, profile.entropy, profile.variance, profile.classes()),
            mi,
        })
    }

    pub fn metric(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::R2 => Some(self.best_r2),
            Metric::Rmse => self.best_rmse,
            Metric::Accuracy => self.best_accuracy,
            Metric::LogLikelihood => Some(self.best_log_likelihood),
        }
    }
}

/// Achievable performance of the dataset's target from `features`.
pub fn value<S: AsRef<str>>(
    dataset: &Dataset,
    features: &[S],
    cfg: &SolverConfig,
) -> Result<AchievablePerformance> {
    let engine = MiEngine::new(dataset, cfg)?;
    value_with(&engine, &TargetProfile::of(dataset)?, features)
}

/// As [`value`], reusing an engine's caches and a precomputed profile.
pub fn value_with<S: AsRef<str>>(
    engine: &MiEngine<'_>,
    profile: &TargetProfile,
    features: &[S],
) -> Result<AchievablePerformance> {
    let names: Vec<String> = features.iter().map(|s| s.as_ref().to_string()).collect();
    let mi = if names.is_empty() {
        MiEstimate::zero(engine.config().method)
    } else {
        engine.mutual_information(&names)?
    };
    AchievablePerformance::from_mi(profile, names, mi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    R2,
    Rmse,
    Accuracy,
    LogLikelihood,
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "r2" => Ok(Metric::R2),
            "rmse" => Ok(Metric::Rmse),
            "accuracy" => Ok(Metric::Accuracy),
            "log_likelihood" | "loglik" => Ok(Metric::LogLikelihood),
            other => Err(format!("unknown metric '{other}'")),
        }
    }
}

impl Metric {
    pub fn higher_is_better(self) -> bool {
        !matches!(self, Metric::Rmse)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::R2 => "r2",
            Metric::Rmse => "rmse",
            Metric::Accuracy => "accuracy",
            Metric::LogLikelihood => "log_likelihood",
        }
    }
}

/// Headroom between a trained model and the theoretical best. Positive means
/// room to improve; negative means the model claims more than is achievable.
pub fn suboptimality_gap(model_perf: f64, achievable: &AchievablePerformance, metric: Metric) -> Result<f64> {
    let best = achievable
        .metric(metric)
        .ok_or_else(|| Error::MissingMetric(metric.as_str().to_string()))?;
    if !model_perf.is_finite() {
        return Err(Error::NonFinite("model performance"));
    }
    Ok(if metric.higher_is_better() {
        best - model_perf
    } else {
        model_perf - best
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Boost {
    pub mi: f64,
    pub best_r2: f64,
    /// Reduction in RMSE.
    pub best_rmse: Option<f64>,
    pub best_accuracy: Option<f64>,
    pub best_log_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncrementalValue {
    pub old: AchievablePerformance,
    pub combined: AchievablePerformance,
    pub boost: Boost,
}

/// Value added by `new_features` on top of `old_features`.
pub fn incremental_value<S: AsRef<str>, T: AsRef<str>>(
    dataset: &Dataset,
    old_features: &[S],
    new_features: &[T],
    cfg: &SolverConfig,
) -> Result<IncrementalValue> {
    let engine = MiEngine::new(dataset, cfg)?;
    let profile = TargetProfile::of(dataset)?;
    let mut old: Vec<String> = Vec::new();
    for f in old_features {
        if !old.iter().any(|o| o == f.as_ref()) {
            old.push(f.as_ref().to_string());
        }
    }
    let mut combined = old.clone();
    for f in new_features {
        if !combined.iter().any(|o| o == f.as_ref()) {
            combined.push(f.as_ref().to_string());
        }
    }
    let old_perf = value_with(&engine, &profile, &old)?;
    let combined_perf = value_with(&engine, &profile, &combined)?;
    let boost = Boost {
        mi: combined_perf.mi.value - old_perf.mi.value,
        best_r2: (combined_perf.best_r2 - old_perf.best_r2).max(0.0),
        best_rmse: old_perf.best_rmse.zip(combined_perf.best_rmse).map(|(a, b)| a - b),
        best_accuracy: old_perf
            .best_accuracy
            .zip(combined_perf.best_accuracy)
            .map(|(a, b)| (b - a).max(0.0)),
        best_log_likelihood: combined_perf.best_log_likelihood - old_perf.best_log_likelihood,
    };
    Ok(IncrementalValue {
        old: old_perf,
        combined: combined_perf,
        boost,
    })
}

/// Best accuracy of the binary problem "class `class_index` or not".
pub fn one_vs_rest_accuracy<S: AsRef<str>>(
    dataset: &Dataset,
    features: &[S],
    class_index: u32,
    cfg: &SolverConfig,
) -> Result<f64> {
    let target = dataset.target();
    let (codes, q) = match (target.as_codes(), target.cardinality()) {
        (Some(c), Some(q)) => (c, q),
        _ => {
            return Err(Error::InvalidArgument(
                "one-vs-rest accuracy needs a categorical target".into(),
            ))
        }
    };
    if q <= 2 {
        return Err(Error::InvalidArgument(
            "one-vs-rest is only meaningful with more than two classes".into(),
        ));
    }
    if class_index as usize >= q {
        return Err(Error::InvalidArgument(format!(
            "class index {class_index} out of range for {q} classes"
        )));
    }
    let binary: Vec<&str> = codes
        .iter()
        .map(|&c| if c == class_index { "in" } else { "out" })
        .collect();
    let mut column = Column::categorical(format!("{}_vs_rest", target.name()), &binary);
    if dataset.column(column.name()).is_ok() {
        column.schema.name = format!("{}_{class_index}_vs_rest", target.name());
    }
    let binary_ds = dataset.with_target(column)?;
    let perf = value(&binary_ds, features, cfg)?;
    perf.best_accuracy
        .ok_or_else(|| Error::MissingMetric("accuracy".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralizedMetrics {
    pub mi: MiEstimate,
    pub generalized_r2: f64,
    /// Classification only: against the ceiling `1 − e^{−2 log q}`.
    pub generalized_r2_normalized: Option<f64>,
    /// Regression only: `Var(y) e^{−2 I} + (E[y − z])²`.
    pub generalized_mse: Option<f64>,
}

/// Generalized R² and MSE of a model's predictions `z` for targets `y`.
pub fn model_generalized_metrics(y: &Column, z: &Column, cfg: &SolverConfig) -> Result<GeneralizedMetrics> {
    if y.data.len() != z.data.len() {
        return Err(Error::DimensionMismatch {
            expected: y.data.len(),
            found: z.data.len(),
        });
    }
    let mi = mutual_information_between(y, z, cfg)?;
    let r2 = best_r2(mi.value)?;
    match (&y.data, &z.data) {
        (ColumnData::Continuous(yv), ColumnData::Continuous(zv)) => {
            let bias = mean(yv) - mean(zv);
            let mse = sample_variance(yv)? * (-2.0 * mi.value).exp() + bias * bias;
            Ok(GeneralizedMetrics {
                mi,
                generalized_r2: r2,
                generalized_r2_normalized: None,
                generalized_mse: Some(mse),
            })
        }
        (ColumnData::Categorical { labels, .. }, ColumnData::Categorical { .. }) => {
            let q = labels.len().max(2);
            Ok(GeneralizedMetrics {
                mi,
                generalized_r2: r2,
                generalized_r2_normalized: Some(r2 / best_r2((q as f64).ln())?),
                generalized_mse: None,
            })
        }
        _ => Err(Error::InvalidArgument(
            "targets and predictions must both be continuous or both categorical".into(),
        )),
    }
}
