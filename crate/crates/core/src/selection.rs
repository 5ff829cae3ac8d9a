//! Greedy forward selection driven by mutual information.
//!
//! Every achievable metric is monotone in MI, so the argmax at each step is
//! taken over MI directly and the choice does not depend on the metric.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{Column, ColumnData, Dataset};
use crate::error::{Error, Result};
use crate::mi::{MiEngine, MiEstimate, SolverConfig};
use crate::valuation::{value_with, AchievablePerformance, TargetProfile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectConfig {
    /// Maximum number of variables to select; `None` means all of them.
    pub capacity: Option<usize>,
    /// Stop once running best R² reaches this share of the full-set value.
    /// The rule is disabled at 1.0 or above.
    pub fraction: f64,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self {
            capacity: None,
            fraction: 0.95,
        }
    }
}

impl SelectConfig {
    /// Rank every feature: no capacity limit, no fraction rule.
    pub fn exhaustive() -> Self {
        Self {
            capacity: None,
            fraction: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.capacity == Some(0) {
            return Err(Error::InvalidArgument("capacity must be at least 1".into()));
        }
        if !(self.fraction > 0.0 && self.fraction.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "fraction must be positive, got {}",
                self.fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Capacity,
    FractionReached,
    Exhausted,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Capacity => "capacity",
            StopReason::FractionReached => "fraction_reached",
            StopReason::Exhausted => "exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionStep {
    pub order: usize,
    pub variable: String,
    pub running_mi: f64,
    pub running_best_r2: f64,
    pub running_best_rmse: Option<f64>,
    pub running_best_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedCandidate {
    pub order: usize,
    pub variable: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionTrace {
    pub target: String,
    pub steps: Vec<SelectionStep>,
    pub stop_reason: StopReason,
    /// Present only when the fraction rule was active.
    pub full_set: Option<AchievablePerformance>,
    pub skipped: Vec<SkippedCandidate>,
}

impl SelectionTrace {
    pub fn order(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.variable.as_str()).collect()
    }

    /// 1-based position of `variable`, if it was selected.
    pub fn rank(&self, variable: &str) -> Option<usize> {
        self.steps.iter().position(|s| s.variable == variable).map(|p| p + 1)
    }
}

/// Greedy forward selection over the dataset's features.
pub fn greedy_select(dataset: &Dataset, select: &SelectConfig, cfg: &SolverConfig) -> Result<SelectionTrace> {
    select.validate()?;
    let engine = MiEngine::new(dataset, cfg)?;
    let profile = TargetProfile::of(dataset)?;
    greedy_select_with(&engine, &profile, select)
}

pub fn greedy_select_with(
    engine: &MiEngine<'_>,
    profile: &TargetProfile,
    select: &SelectConfig,
) -> Result<SelectionTrace> {
    select.validate()?;
    let mut remaining: Vec<String> = engine
        .dataset()
        .feature_names()
        .into_iter()
        .map(str::to_string)
        .collect();
    if remaining.is_empty() {
        return Err(Error::EmptyFeatures);
    }
    let capacity = select.capacity.unwrap_or(remaining.len());
    let full_set = if select.fraction < 1.0 {
        Some(value_with(engine, profile, &remaining)?)
    } else {
        None
    };

    let mut selected: Vec<String> = Vec::new();
    let mut steps = Vec::new();
    let mut skipped = Vec::new();
    let stop_reason = loop {
        if remaining.is_empty() {
            break StopReason::Exhausted;
        }
        if selected.len() >= capacity {
            break StopReason::Capacity;
        }
        let order = selected.len() + 1;
        let results: Vec<Result<MiEstimate>> = remaining
            .par_iter()
            .map(|candidate| {
                let mut set = selected.clone();
                set.push(candidate.clone());
                engine.mutual_information(&set)
            })
            .collect();

        let mut best: Option<(usize, MiEstimate)> = None;
        let mut first_error = None;
        for (i, result) in results.into_iter().enumerate() {
            match result {
                Ok(mi) => {
                    // `remaining` stays in schema order, so strict improvement keeps the earliest on ties
                    if best.as_ref().is_none_or(|(_, b)| mi.value > b.value) {
                        best = Some((i, mi));
                    }
                }
                Err(e) => {
                    skipped.push(SkippedCandidate {
                        order,
                        variable: remaining[i].clone(),
                        error: e.to_string(),
                    });
                    first_error.get_or_insert(e);
                }
            }
        }
        let Some((index, mi)) = best else {
            return Err(first_error.unwrap_or(Error::EmptyFeatures));
        };
        let variable = remaining.remove(index);
        selected.push(variable.clone());
        let perf = AchievablePerformance::from_mi(profile, selected.clone(), mi)?;
        steps.push(SelectionStep {
            order,
            variable,
            running_mi: perf.mi.value,
            running_best_r2: perf.best_r2,
            running_best_rmse: perf.best_rmse,
            running_best_accuracy: perf.best_accuracy,
        });
        if let Some(full) = &full_set {
            if perf.best_r2 >= select.fraction * full.best_r2 {
                break StopReason::FractionReached;
            }
        }
    };

    Ok(SelectionTrace {
        target: profile.name.clone(),
        steps,
        stop_reason,
        full_set,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnderusedVariable {
    pub variable: String,
    pub rank_for_target: usize,
    /// `None` when the prediction trace could not be computed.
    pub rank_for_predictions: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnderusedReport {
    pub target_trace: SelectionTrace,
    pub prediction_trace: Option<SelectionTrace>,
    pub underused: Vec<UnderusedVariable>,
    pub warning: Option<String>,
}

/// Minimum rank improvement for a variable to count as underused.
pub const UNDERUSED_RANK_GAP: usize = 2;

/// Compare how the target and a model's predictions rank the features.
/// Variables the target ranks much higher are ones the model neglects.
pub fn underused_variables(dataset: &Dataset, predictions: &Column, cfg: &SolverConfig) -> Result<UnderusedReport> {
    if predictions.data.len() != dataset.n() {
        return Err(Error::DimensionMismatch {
            expected: dataset.n(),
            found: predictions.data.len(),
        });
    }
    let select = SelectConfig::exhaustive();
    let target_trace = greedy_select(dataset, &select, cfg)?;

    let mut renamed = predictions.clone();
    while dataset.feature_position(renamed.name()).is_some() {
        renamed.schema.name = format!("_{}", renamed.name());
    }
    let prediction_trace = dataset
        .with_target(renamed)
        .and_then(|ds| greedy_select(&ds, &select, cfg));

    match prediction_trace {
        Ok(pred) => {
            let worst = dataset.feature_names().len() + 1;
            let mut underused: Vec<UnderusedVariable> = target_trace
                .steps
                .iter()
                .filter_map(|step| {
                    let rank_pred = pred.rank(&step.variable).unwrap_or(worst);
                    (rank_pred >= step.order + UNDERUSED_RANK_GAP).then(|| UnderusedVariable {
                        variable: step.variable.clone(),
                        rank_for_target: step.order,
                        rank_for_predictions: Some(rank_pred),
                    })
                })
                .collect();
            // largest neglect first, then target order
            underused.sort_by_key(|u| {
                (
                    std::cmp::Reverse(u.rank_for_predictions.unwrap_or(0) - u.rank_for_target),
                    u.rank_for_target,
                )
            });
            Ok(UnderusedReport {
                target_trace,
                prediction_trace: Some(pred),
                underused,
                warning: None,
            })
        }
        Err(e) => {
            let underused = target_trace
                .steps
                .iter()
                .map(|s| UnderusedVariable {
                    variable: s.variable.clone(),
                    rank_for_target: s.order,
                    rank_for_predictions: None,
                })
                .collect();
            Ok(UnderusedReport {
                target_trace,
                prediction_trace: None,
                underused,
                warning: Some(format!("selection on predictions failed: {e}")),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualIteration {
    pub dataset: Dataset,
    pub valuation: AchievablePerformance,
}

/// Replace a continuous target by `y − predictions` and value the result.
pub fn residual_iteration(dataset: &Dataset, predictions: &[f64], cfg: &SolverConfig) -> Result<ResidualIteration> {
    let y = match &dataset.target().data {
        ColumnData::Continuous(v) => v,
        ColumnData::Categorical { .. } => {
            return Err(Error::InvalidArgument(
                "residuals need a continuous target".into(),
            ))
        }
    };
    if predictions.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: predictions.len(),
        });
    }
    if predictions.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("predictions"));
    }
    let residual: Vec<f64> = y.iter().zip(predictions).map(|(a, b)| a - b).collect();
    let mut name = format!("{}_residual", dataset.target_name());
    while dataset.feature_position(&name).is_some() {
        name.insert(0, '_');
    }
    let residual_ds = dataset.with_target(Column::continuous(name, residual))?;
    let engine = MiEngine::new(&residual_ds, cfg)?;
    let profile = TargetProfile::of(&residual_ds)?;
    let valuation = value_with(&engine, &profile, &residual_ds.feature_names())?;
    drop(engine);
    Ok(ResidualIteration {
        dataset: residual_ds,
        valuation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn additive(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cols: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(n)).collect();
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let x: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
            let e: f64 = rng.sample(StandardNormal);
            y.push(3.0 * x[1] + 1.0 * x[0] + 0.3 * e);
            for (c, v) in cols.iter_mut().zip(x) {
                c.push(v);
            }
        }
        let mut columns: Vec<Column> = cols
            .into_iter()
            .enumerate()
            .map(|(i, v)| Column::continuous(format!("x{i}"), v))
            .collect();
        columns.push(Column::continuous("y", y));
        Dataset::new(columns, "y").unwrap()
    }

    #[test]
    fn picks_strongest_first_and_ranks_all() {
        let ds = additive(1500, 4);
        let trace = greedy_select(&ds, &SelectConfig::exhaustive(), &SolverConfig::default()).unwrap();
        assert_eq!(trace.order(), vec!["x1", "x0", "x2"]);
        assert_eq!(trace.stop_reason, StopReason::Exhausted);
        let orders: Vec<usize> = trace.steps.iter().map(|s| s.order).collect();
        assert_eq!(orders, vec![1, 2, 3]);
        for w in trace.steps.windows(2) {
            assert!(w[1].running_mi >= w[0].running_mi - 0.03, "{:?}", trace.steps);
        }
    }

    #[test]
    fn capacity_and_fraction_stop() {
        let ds = additive(1500, 4);
        let cfg = SolverConfig::default();
        let trace = greedy_select(&ds, &SelectConfig { capacity: Some(1), fraction: 1.0 }, &cfg).unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.stop_reason, StopReason::Capacity);
        let trace = greedy_select(&ds, &SelectConfig { capacity: None, fraction: 0.5 }, &cfg).unwrap();
        assert_eq!(trace.stop_reason, StopReason::FractionReached);
        assert!(trace.steps.len() < 3);
        assert!(greedy_select(&ds, &SelectConfig { capacity: Some(0), fraction: 1.0 }, &cfg).is_err());
    }

    #[test]
    fn residual_of_zero_model_matches_original() {
        let ds = additive(800, 9);
        let cfg = SolverConfig::default();
        let original = crate::valuation::value(&ds, &ds.feature_names(), &cfg).unwrap();
        let res = residual_iteration(&ds, &vec![0.0; ds.n()], &cfg).unwrap();
        assert!((res.valuation.mi.value - original.mi.value).abs() < 1e-9);
        assert_eq!(res.dataset.target_name(), "y_residual");
    }

    #[test]
    fn residual_needs_continuous_target() {
        let a: Vec<f64> = (0..100).map(f64::from).collect();
        let labels: Vec<&str> = (0..100).map(|i| if i % 2 == 0 { "a" } else { "b" }).collect();
        let ds = Dataset::new(vec![Column::continuous("a", a), Column::categorical("y", &labels)], "y").unwrap();
        assert!(matches!(
            residual_iteration(&ds, &[0.0; 100], &SolverConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
    }
}
