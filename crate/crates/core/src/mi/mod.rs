//! Mutual information between the target and a set of features.
//!
//! Continuous parts go through copula entropies, categorical parts through
//! conditioning on their blocks, and all-categorical problems through
//! plug-in Shannon entropies.

mod dual;
mod gaussian;

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use serde::Serialize;

pub use dual::{
    copula_entropy_mind, dual_objective, DualSolution, MAX_COPULA_DIMENSION, MIN_COPULA_ROWS,
};
pub use gaussian::{gaussian_copula_entropy, implied_correlation, EIGEN_FLOOR};

use crate::copula::{rank_transform, to_copula, FeatureKind, FeatureMapSpec};
use crate::data::{Column, ColumnData, ColumnKind, Dataset};
use crate::entropy::{class_counts, entropy_of_counts, marginal_diff_entropy};
use crate::error::{Error, Result};
use crate::numerics::normal_quantile;

/// Smallest conditional block that gets its own entropy estimate.
pub const MIN_BLOCK_ROWS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Maximum-entropy dual solved numerically.
    MindDual,
    /// Closed form under a Gaussian copula.
    GaussianCopula,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mind" | "mind_dual" => Ok(Method::MindDual),
            "gaussian" | "gaussian_copula" => Ok(Method::GaussianCopula),
            other => Err(format!("unknown method '{other}' (expected mind or gaussian)")),
        }
    }
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::MindDual => "mind",
            Method::GaussianCopula => "gaussian",
        }
    }
}

/// Descent method for the dual problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DualSolver {
    /// Exact Hessian with a small ridge; few, costlier iterations.
    #[default]
    Newton,
    Lbfgs,
}

impl FromStr for DualSolver {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "newton" => Ok(DualSolver::Newton),
            "lbfgs" | "l-bfgs" => Ok(DualSolver::Lbfgs),
            other => Err(format!("unknown solver '{other}' (expected newton or lbfgs)")),
        }
    }
}

/// Which statistics the dual solver matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureChoice {
    /// Normal-score polynomials whose degree shrinks as the dimension grows.
    #[default]
    Auto,
    Fixed(FeatureKind),
}

impl FromStr for FeatureChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "auto" => return Ok(FeatureChoice::Auto),
            "pairwise" | "pairwise_products" => {
                return Ok(FeatureChoice::Fixed(FeatureKind::PairwiseProducts))
            }
            "pairwise_tails" | "pairwise_products_plus_tails" => {
                return Ok(FeatureChoice::Fixed(FeatureKind::PairwiseProductsPlusTails))
            }
            _ => {}
        }
        if let Some(degree) = s.strip_prefix("normal_scores:") {
            let degree: u32 = degree
                .parse()
                .map_err(|_| format!("invalid normal-score degree '{degree}'"))?;
            if degree == 0 {
                return Err("normal-score degree must be positive".into());
            }
            return Ok(FeatureChoice::Fixed(FeatureKind::NormalScores { degree }));
        }
        Err(format!(
            "unknown feature map '{s}' (expected auto, pairwise, pairwise_tails or normal_scores:<degree>)"
        ))
    }
}

impl std::fmt::Display for FeatureChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatureChoice::Auto => f.write_str("auto"),
            FeatureChoice::Fixed(kind) => kind.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub quadrature_points: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Floor for copula entropies; near-deterministic dependence lands here.
    pub min_entropy: f64,
    /// Largest joint categorical cardinality handled by conditioning.
    pub max_blocks: usize,
    pub method: Method,
    pub feature_map: FeatureChoice,
    pub solver: DualSolver,
    pub quadrature_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            quadrature_points: 1 << 14,
            max_iters: 500,
            grad_tol: 1e-6,
            min_entropy: -8.0,
            max_blocks: 32,
            method: Method::MindDual,
            feature_map: FeatureChoice::Auto,
            solver: DualSolver::Newton,
            quadrature_seed: 0x5eed,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("invalid solver setting: {what}")));
        if self.quadrature_points == 0 || self.quadrature_points as u64 > 1 << 32 {
            return bad("quadrature_points");
        }
        if self.max_iters == 0 {
            return bad("max_iters");
        }
        if !(self.grad_tol.is_finite() && self.grad_tol > 0.0) {
            return bad("grad_tol");
        }
        if !(self.min_entropy.is_finite() && self.min_entropy < 0.0) {
            return bad("min_entropy");
        }
        if self.max_blocks == 0 {
            return bad("max_blocks");
        }
        Ok(())
    }

    /// Feature family used for every copula whose dimension is at most
    /// `max_dimension`. One family per estimator keeps nested feature sets
    /// comparable.
    pub fn feature_kind(&self, max_dimension: usize) -> FeatureKind {
        match self.feature_map {
            FeatureChoice::Auto => FeatureKind::auto(max_dimension),
            FeatureChoice::Fixed(kind) => kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiComponent {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiEstimate {
    /// Nats, never negative.
    pub value: f64,
    pub method: Method,
    pub components: Vec<MiComponent>,
    /// Some copula entropy hit the configured floor.
    pub degenerate: bool,
}

impl MiEstimate {
    pub fn zero(method: Method) -> Self {
        Self {
            value: 0.0,
            method,
            components: Vec::new(),
            degenerate: false,
        }
    }
}

fn component(name: &str, value: f64) -> MiComponent {
    MiComponent {
        name: name.to_string(),
        value,
    }
}

/// A set of row indices with a stable key used for caching.
#[derive(Debug, Clone)]
struct Rows {
    key: String,
    idx: Arc<Vec<usize>>,
}

impl Rows {
    fn len(&self) -> usize {
        self.idx.len()
    }
}

/// Per-call bookkeeping.
#[derive(Default)]
struct CallState {
    degenerate: bool,
}

/// Mutual-information estimator bound to one dataset, caching entropy terms
/// so repeated queries over overlapping feature sets stay cheap.
///
/// Safe to share across threads; every result is independent of call order.
pub struct MiEngine<'a> {
    dataset: &'a Dataset,
    cfg: SolverConfig,
    kind: FeatureKind,
    scores: Mutex<HashMap<String, Arc<Vec<f64>>>>,
    terms: Mutex<HashMap<String, (f64, bool)>>,
}

/// How one feature enters the computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Continuous,
    Categorical,
}

impl<'a> MiEngine<'a> {
    pub fn new(dataset: &'a Dataset, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let target_dims = usize::from(dataset.target().kind() == ColumnKind::Continuous);
        let widest = (dataset.features().count() + target_dims).clamp(2, MAX_COPULA_DIMENSION);
        Ok(Self {
            dataset,
            cfg: cfg.clone(),
            kind: cfg.feature_kind(widest),
            scores: Mutex::new(HashMap::new()),
            terms: Mutex::new(HashMap::new()),
        })
    }

    pub fn dataset(&self) -> &Dataset {
        self.dataset
    }

    /// Feature family shared by every copula this engine fits.
    pub fn feature_kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Full-sample normal scores of a column; categorical columns are first
    /// ordered by descending frequency.
    fn scores(&self, key: &str) -> Result<Arc<Vec<f64>>> {
        if let Some(s) = self.scores.lock().expect("score cache poisoned").get(key) {
            return Ok(Arc::clone(s));
        }
        let (name, ordinal) = match key.strip_prefix("ord:") {
            Some(name) => (name, true),
            None => (key, false),
        };
        let column = self.dataset.column(name)?;
        let values: Vec<f64> = match (&column.data, ordinal) {
            (ColumnData::Continuous(v), _) => v.clone(),
            (ColumnData::Categorical { codes, .. }, true) => frequency_ordinal(codes),
            (ColumnData::Categorical { .. }, false) => {
                return Err(Error::InvalidArgument(format!(
                    "column '{name}' is categorical"
                )))
            }
        };
        let scores: Vec<f64> = rank_transform(&values)
            .into_iter()
            .map(normal_quantile)
            .collect();
        let scores = Arc::new(scores);
        self.scores
            .lock()
            .expect("score cache poisoned")
            .insert(key.to_string(), Arc::clone(&scores));
        Ok(scores)
    }

    fn cached(
        &self,
        key: String,
        state: &mut CallState,
        compute: impl FnOnce() -> Result<(f64, bool)>,
    ) -> Result<f64> {
        if let Some(&(v, degenerate)) = self.terms.lock().expect("term cache poisoned").get(&key) {
            state.degenerate |= degenerate;
            return Ok(v);
        }
        let (v, degenerate) = compute()?;
        self.terms
            .lock()
            .expect("term cache poisoned")
            .insert(key, (v, degenerate));
        state.degenerate |= degenerate;
        Ok(v)
    }

    fn restricted(&self, key: &str, rows: &Rows) -> Result<Vec<f64>> {
        let scores = self.scores(key)?;
        Ok(rows.idx.iter().map(|&i| scores[i]).collect())
    }

    /// Copula entropy of the given score columns over `rows`.
    fn copula_entropy(&self, cols: &[String], rows: &Rows, state: &mut CallState) -> Result<f64> {
        if cols.len() <= 1 {
            return Ok(0.0);
        }
        let mut sorted = cols.to_vec();
        sorted.sort();
        sorted.dedup();
        if sorted.len() <= 1 {
            return Ok(0.0);
        }
        let key = format!("copula|{}|{}", rows.key, sorted.join(","));
        self.cached(key, state, || {
            if sorted.len() > MAX_COPULA_DIMENSION {
                return Err(Error::DimensionBudget {
                    dimension: sorted.len(),
                    max: MAX_COPULA_DIMENSION,
                });
            }
            if rows.len() < MIN_COPULA_ROWS {
                return Err(Error::InsufficientRows {
                    block: rows.key.clone(),
                    rows: rows.len(),
                    needed: MIN_COPULA_ROWS,
                });
            }
            let data: Vec<Vec<f64>> = sorted
                .iter()
                .map(|c| self.restricted(c, rows))
                .collect::<Result<_>>()?;
            let named: Vec<(&str, &[f64])> = sorted
                .iter()
                .zip(&data)
                .map(|(c, d)| (c.strip_prefix("ord:").unwrap_or(c), d.as_slice()))
                .collect();
            let sample = to_copula(&named)?;
            match self.cfg.method {
                Method::MindDual => {
                    let spec = FeatureMapSpec::new(self.kind, sample.dimension())?;
                    let (h, solution) = copula_entropy_mind(&sample, &spec, &self.cfg)?;
                    Ok((h, solution.degenerate))
                }
                Method::GaussianCopula => {
                    let h = gaussian_copula_entropy(&sample)?.max(self.cfg.min_entropy);
                    Ok((h, h <= self.cfg.min_entropy))
                }
            }
        })
    }

    fn marginal_entropy(&self, col: &str, rows: &Rows, state: &mut CallState) -> Result<f64> {
        let key = format!("marginal|{}|{}", rows.key, col);
        self.cached(key, state, || {
            let values = self.restricted(col, rows)?;
            marginal_diff_entropy(&values)
                .map(|e| (e.value, false))
                .map_err(|e| match e {
                    Error::ConstantColumn(_) => Error::ConstantColumn(col.to_string()),
                    other => other,
                })
        })
    }

    /// Differential entropy of the score vector, as copula entropy plus marginals.
    fn joint_entropy(&self, cols: &[String], rows: &Rows, state: &mut CallState) -> Result<f64> {
        let mut total = self.copula_entropy(cols, rows, state)?;
        for c in cols {
            total += self.marginal_entropy(c, rows, state)?;
        }
        Ok(total)
    }

    /// Continuous target, continuous features.
    fn continuous_continuous(
        &self,
        target: &str,
        features: &[String],
        rows: &Rows,
        state: &mut CallState,
    ) -> Result<(f64, Vec<MiComponent>)> {
        let feature_part = self.copula_entropy(features, rows, state)?;
        let mut joint_cols = features.to_vec();
        joint_cols.push(target.to_string());
        let joint = self.copula_entropy(&joint_cols, rows, state)?;
        Ok((
            feature_part - joint,
            vec![
                component("feature_copula_entropy", feature_part),
                component("joint_copula_entropy", joint),
            ],
        ))
    }

    /// Categorical target, continuous features.
    fn categorical_continuous(
        &self,
        target_codes: &[u32],
        features: &[String],
        rows: &Rows,
        state: &mut CallState,
    ) -> Result<(f64, Vec<MiComponent>)> {
        let groups = pool_blocks(group_rows(rows, |i| target_codes[i]), rows)?;
        if groups.len() < 2 {
            return Ok((0.0, vec![component("pooled_to_single_class", 0.0)]));
        }
        let unconditional = self.joint_entropy(features, rows, state)?;
        let mut conditional = 0.0;
        for group in &groups {
            let weight = group.len() as f64 / rows.len() as f64;
            conditional += weight * self.joint_entropy(features, group, state)?;
        }
        Ok((
            unconditional - conditional,
            vec![
                component("feature_entropy", unconditional),
                component("conditional_feature_entropy", conditional),
            ],
        ))
    }

    /// Continuous target, categorical features given as joint block codes.
    fn continuous_categorical(
        &self,
        target: &str,
        block_codes: &[u32],
        rows: &Rows,
        state: &mut CallState,
    ) -> Result<(f64, Vec<MiComponent>)> {
        let groups = pool_blocks(group_rows(rows, |i| block_codes[i]), rows)?;
        if groups.len() < 2 {
            return Ok((0.0, vec![component("pooled_to_single_block", 0.0)]));
        }
        let unconditional = self.marginal_entropy(target, rows, state)?;
        let mut conditional = 0.0;
        for group in &groups {
            let weight = group.len() as f64 / rows.len() as f64;
            conditional += weight * self.marginal_entropy(target, group, state)?;
        }
        Ok((
            unconditional - conditional,
            vec![
                component("target_entropy", unconditional),
                component("conditional_target_entropy", conditional),
            ],
        ))
    }

    /// Estimates the mutual information between the target and `features`.
    pub fn mutual_information<S: AsRef<str>>(&self, features: &[S]) -> Result<MiEstimate> {
        let target = self.dataset.target();
        let mut continuous = Vec::new();
        let mut categorical = Vec::new();
        for name in features {
            let name = name.as_ref();
            if name == target.name() {
                continue;
            }
            let role = match self.dataset.column(name)?.kind() {
                crate::data::ColumnKind::Continuous => Role::Continuous,
                crate::data::ColumnKind::Categorical => Role::Categorical,
            };
            let list = if role == Role::Continuous {
                &mut continuous
            } else {
                &mut categorical
            };
            if !list.iter().any(|n: &String| n == name) {
                list.push(name.to_string());
            }
        }
        if continuous.is_empty() && categorical.is_empty() {
            return Err(Error::EmptyFeatures);
        }
        // a column with the same ranks as an earlier one is the same copula
        // coordinate; keeping it would make every copula singular
        let mut distinct: Vec<(String, Arc<Vec<f64>>)> = Vec::with_capacity(continuous.len());
        for name in continuous {
            let s = self.scores(&name)?;
            if !distinct.iter().any(|(_, t)| t == &s) {
                distinct.push((name, s));
            }
        }
        let mut continuous: Vec<String> = distinct.into_iter().map(|(name, _)| name).collect();

        let n = self.dataset.n();
        let all = Rows {
            key: "*".into(),
            idx: Arc::new((0..n).collect()),
        };
        let mut state = CallState::default();
        let target_codes = target.as_codes();
        let target_entropy = target_codes.map(|c| entropy_of_counts(&class_counts(c)));
        if target_entropy == Some(0.0) {
            return Ok(MiEstimate::zero(self.cfg.method));
        }

        let block_codes = (!categorical.is_empty()).then(|| self.joint_codes(&categorical));
        let cardinality = block_codes
            .as_ref()
            .map(|c| c.iter().map(|&v| v as usize + 1).max().unwrap_or(0))
            .unwrap_or(0);
        let condition = !categorical.is_empty()
            && (cardinality <= self.cfg.max_blocks
                || (continuous.is_empty() && target_codes.is_some()));
        if !condition {
            // too many blocks: order categories by frequency and treat them as continuous
            continuous.extend(categorical.iter().map(|c| format!("ord:{c}")));
            categorical.clear();
        }

        let (raw, components) = match (target_codes, block_codes.filter(|_| condition)) {
            (Some(y), None) => self.categorical_continuous(y, &continuous, &all, &mut state)?,
            (None, None) => self.continuous_continuous(target.name(), &continuous, &all, &mut state)?,
            (Some(y), Some(blocks)) => {
                let discrete = plug_in_mi(y, &blocks);
                let mut parts = vec![
                    component("target_entropy", target_entropy.unwrap_or(0.0)),
                    component("categorical_part", discrete),
                ];
                let mut total = discrete;
                if !continuous.is_empty() {
                    let cond = self.conditional_part(&blocks, &all, &mut state, |rows, st| {
                        self.categorical_continuous(y, &continuous, rows, st)
                    })?;
                    parts.push(component("conditional_continuous_part", cond));
                    total += cond;
                }
                (total, parts)
            }
            (None, Some(blocks)) => {
                let (discrete, mut parts) =
                    self.continuous_categorical(target.name(), &blocks, &all, &mut state)?;
                let mut total = discrete;
                if !continuous.is_empty() {
                    parts.push(component("categorical_part", discrete));
                    let cond = self.conditional_part(&blocks, &all, &mut state, |rows, st| {
                        self.continuous_continuous(target.name(), &continuous, rows, st)
                    })?;
                    parts.push(component("conditional_continuous_part", cond));
                    total += cond;
                }
                (total, parts)
            }
        };

        let mut value = raw.max(0.0);
        if let Some(h) = target_entropy {
            value = value.min(h);
        }
        Ok(MiEstimate {
            value,
            method: self.cfg.method,
            components,
            degenerate: state.degenerate,
        })
    }

    /// `Σ_b P(b) I(y; x_c | b)` over pooled categorical blocks.
    fn conditional_part(
        &self,
        blocks: &[u32],
        rows: &Rows,
        state: &mut CallState,
        within: impl Fn(&Rows, &mut CallState) -> Result<(f64, Vec<MiComponent>)>,
    ) -> Result<f64> {
        let groups = pool_blocks(group_rows(rows, |i| blocks[i]), rows)?;
        let mut total = 0.0;
        for group in &groups {
            let weight = group.len() as f64 / rows.len() as f64;
            let (v, _) = within(group, state)?;
            total += weight * v.max(0.0);
        }
        Ok(total)
    }

    /// Dense codes for the combination of several categorical columns.
    fn joint_codes(&self, columns: &[String]) -> Vec<u32> {
        let code_columns: Vec<&[u32]> = columns
            .iter()
            .map(|c| {
                self.dataset
                    .column(c)
                    .ok()
                    .and_then(Column::as_codes)
                    .expect("categorical column resolved earlier")
            })
            .collect();
        let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
        (0..self.dataset.n())
            .map(|i| {
                let key: Vec<u32> = code_columns.iter().map(|c| c[i]).collect();
                let next = index.len() as u32;
                *index.entry(key).or_insert(next)
            })
            .collect()
    }
}

fn frequency_ordinal(codes: &[u32]) -> Vec<f64> {
    let counts = class_counts(codes);
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut position = vec![0.0; counts.len()];
    for (rank, &code) in order.iter().enumerate() {
        position[code] = rank as f64;
    }
    codes.iter().map(|&c| position[c as usize]).collect()
}

/// Plug-in `H(a) + H(b) − H(a, b)`.
fn plug_in_mi(a: &[u32], b: &[u32]) -> f64 {
    let qb = b.iter().map(|&v| v as usize + 1).max().unwrap_or(0);
    let joint: Vec<u32> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| x * qb as u32 + y)
        .collect();
    let h = |codes: &[u32]| {
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for &c in codes {
            *counts.entry(c).or_default() += 1;
        }
        let mut values: Vec<usize> = counts.into_values().collect();
        values.sort_unstable();
        entropy_of_counts(&values)
    };
    (h(a) + h(b) - h(&joint)).max(0.0)
}

/// Groups `rows` by a label, in ascending label order.
fn group_rows(rows: &Rows, label: impl Fn(usize) -> u32) -> Vec<(Vec<u32>, Vec<usize>)> {
    let mut groups: std::collections::BTreeMap<u32, Vec<usize>> = Default::default();
    for &i in rows.idx.iter() {
        groups.entry(label(i)).or_default().push(i);
    }
    groups.into_iter().map(|(k, v)| (vec![k], v)).collect()
}

/// Merges blocks below [`MIN_BLOCK_ROWS`] into one "other" block; if that is
/// still too small it joins the smallest adequate block.
fn pool_blocks(groups: Vec<(Vec<u32>, Vec<usize>)>, parent: &Rows) -> Result<Vec<Rows>> {
    let mut big: Vec<(Vec<u32>, Vec<usize>)> = Vec::new();
    let mut other: (Vec<u32>, Vec<usize>) = (Vec::new(), Vec::new());
    for (labels, idx) in groups {
        if idx.len() >= MIN_BLOCK_ROWS {
            big.push((labels, idx));
        } else {
            other.0.extend(labels);
            other.1.extend(idx);
        }
    }
    if !other.1.is_empty() {
        if other.1.len() >= MIN_BLOCK_ROWS {
            big.push(other);
        } else if let Some(smallest) = big
            .iter_mut()
            .enumerate()
            .min_by_key(|(pos, g)| (g.1.len(), *pos))
            .map(|(_, g)| g)
        {
            smallest.0.extend(other.0);
            smallest.1.extend(other.1);
        } else {
            return Err(Error::InsufficientRows {
                block: parent.key.clone(),
                rows: other.1.len(),
                needed: MIN_BLOCK_ROWS,
            });
        }
    }
    Ok(big
        .into_iter()
        .map(|(mut labels, mut idx)| {
            labels.sort_unstable();
            idx.sort_unstable();
            let names: Vec<String> = labels.iter().map(u32::to_string).collect();
            Rows {
                key: format!("{}/{}", parent.key, names.join("+")),
                idx: Arc::new(idx),
            }
        })
        .collect())
}

/// Mutual information between the dataset's target and `features`.
pub fn mutual_information<S: AsRef<str>>(
    dataset: &Dataset,
    features: &[S],
    cfg: &SolverConfig,
) -> Result<MiEstimate> {
    MiEngine::new(dataset, cfg)?.mutual_information(features)
}

/// Mutual information between two aligned columns.
pub fn mutual_information_between(y: &Column, z: &Column, cfg: &SolverConfig) -> Result<MiEstimate> {
    let mut z = z.clone();
    if z.name() == y.name() {
        z.schema.name = format!("{}_other", z.name());
    }
    let name = z.name().to_string();
    let ds = Dataset::new(vec![z, y.clone()], y.name())?;
    mutual_information(&ds, &[name], cfg)
}
