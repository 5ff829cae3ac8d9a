//! Maximum-entropy copula entropy through its convex dual.
//!
//! The dual of "maximise entropy subject to matching the sample means of the
//! statistics" is `inf_θ −⟨θ, μ⟩ + log ∫ exp⟨θ, φ(u)⟩ du`, whose optimum is the
//! copula entropy of the fitted density. The integral is a quasi-Monte Carlo
//! average over a shifted Sobol set. The default solver takes damped Newton
//! steps; L-BFGS is available but slow on polynomial statistics.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use nalgebra::{DMatrix, DVector};

use super::{DualSolver, SolverConfig};
use crate::copula::{feature_moments, CopulaSample, FeatureKind, FeatureMapSpec};
use crate::error::{Error, Result};
use crate::quadrature::Quadrature;

/// Largest copula dimension the solver accepts.
pub const MAX_COPULA_DIMENSION: usize = 12;

/// Fewest rows a copula entropy is estimated from.
pub const MIN_COPULA_ROWS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualSolution {
    /// Natural parameters on the raw statistics; the normaliser is implicit.
    pub theta: Vec<f64>,
    pub objective: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub quadrature_points: usize,
    /// The objective fell through the entropy floor before converging.
    pub degenerate: bool,
}

/// Objective and gradient of the discretised dual at `theta`.
pub fn dual_objective(
    theta: &[f64],
    sample_moments: &[f64],
    quadrature: &Quadrature,
    spec: &FeatureMapSpec,
) -> Result<(f64, Vec<f64>)> {
    let m = spec.feature_count();
    if theta.len() != m || sample_moments.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: if theta.len() != m { theta.len() } else { sample_moments.len() },
        });
    }
    if quadrature.dimension() != spec.dimension() {
        return Err(Error::DimensionMismatch {
            expected: spec.dimension(),
            found: quadrature.dimension(),
        });
    }
    if quadrature.is_empty() {
        return Err(Error::InvalidArgument("empty quadrature".into()));
    }
    if theta.iter().chain(sample_moments).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("dual objective input"));
    }
    let mut rows = vec![0.0; quadrature.len() * m];
    for (row, u) in rows.chunks_exact_mut(m).zip(quadrature.rows()) {
        spec.evaluate(u, row);
    }
    let mut gradient = vec![0.0; m];
    let value = evaluate(theta, sample_moments, &rows, m, &mut gradient);
    Ok((value, gradient))
}

/// Shared kernel: fills `gradient` and returns the objective. Log-sum-exp is
/// shifted by the largest exponent so large `theta` cannot overflow.
fn evaluate(theta: &[f64], moments: &[f64], rows: &[f64], m: usize, gradient: &mut [f64]) -> f64 {
    let mut weights = Vec::new();
    evaluate_weighted(theta, moments, rows, m, gradient, &mut weights)
}

/// As [`evaluate`], also leaving the normalised point weights in `weights`.
fn evaluate_weighted(
    theta: &[f64],
    moments: &[f64],
    rows: &[f64],
    m: usize,
    gradient: &mut [f64],
    weights: &mut Vec<f64>,
) -> f64 {
    let count = rows.len() / m;
    weights.clear();
    let mut shift = f64::NEG_INFINITY;
    for row in rows.chunks_exact(m) {
        let a: f64 = row.iter().zip(theta).map(|(p, t)| p * t).sum();
        shift = shift.max(a);
        weights.push(a);
    }
    gradient.iter_mut().for_each(|g| *g = 0.0);
    let mut total = 0.0;
    for (row, w) in rows.chunks_exact(m).zip(weights.iter_mut()) {
        *w = (*w - shift).exp();
        total += *w;
        for (g, p) in gradient.iter_mut().zip(row) {
            *g += *w * p;
        }
    }
    weights.iter_mut().for_each(|w| *w /= total);
    for (g, mu) in gradient.iter_mut().zip(moments) {
        *g = *g / total - mu;
    }
    let linear: f64 = theta.iter().zip(moments).map(|(t, mu)| t * mu).sum();
    -linear + (total / count as f64).ln() + shift
}

/// Statistics on the quadrature set, each column centred and scaled to unit
/// variance. The affine change leaves the optimal value untouched and makes
/// the problem far better conditioned.
struct FeatureTable {
    m: usize,
    rows: Vec<f64>,
    offset: Vec<f64>,
    scale: Vec<f64>,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct TableKey {
    kind: FeatureKindKey,
    dimension: usize,
    points: usize,
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum FeatureKindKey {
    Pairwise,
    PairwiseTails,
    Normal(u32),
}

impl From<FeatureKind> for FeatureKindKey {
    fn from(kind: FeatureKind) -> Self {
        match kind {
            FeatureKind::PairwiseProducts => Self::Pairwise,
            FeatureKind::PairwiseProductsPlusTails => Self::PairwiseTails,
            FeatureKind::NormalScores { degree } => Self::Normal(degree),
        }
    }
}

fn table_cache() -> &'static Mutex<HashMap<TableKey, Arc<FeatureTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<FeatureTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn feature_table(spec: &FeatureMapSpec, cfg: &SolverConfig) -> Result<Arc<FeatureTable>> {
    let key = TableKey {
        kind: spec.kind().into(),
        dimension: spec.dimension(),
        points: cfg.quadrature_points,
        seed: cfg.quadrature_seed,
    };
    if let Some(table) = table_cache().lock().expect("table cache poisoned").get(&key) {
        return Ok(Arc::clone(table));
    }
    let quadrature = Quadrature::sobol(spec.dimension(), cfg.quadrature_points, cfg.quadrature_seed)?;
    let m = spec.feature_count();
    let count = quadrature.len();
    let mut rows = vec![0.0; count * m];
    for (row, u) in rows.chunks_exact_mut(m).zip(quadrature.rows()) {
        spec.evaluate(u, row);
    }
    let mut offset = vec![0.0; m];
    for row in rows.chunks_exact(m) {
        for (o, v) in offset.iter_mut().zip(row) {
            *o += v;
        }
    }
    offset.iter_mut().for_each(|o| *o /= count as f64);
    let mut scale = vec![0.0; m];
    for row in rows.chunks_exact(m) {
        for ((s, v), o) in scale.iter_mut().zip(row).zip(&offset) {
            *s += (v - o) * (v - o);
        }
    }
    for s in &mut scale {
        *s = (*s / count as f64).sqrt();
        if *s == 0.0 || !s.is_finite() {
            *s = 1.0;
        }
    }
    for row in rows.chunks_exact_mut(m) {
        for ((v, o), s) in row.iter_mut().zip(&offset).zip(&scale) {
            *v = (*v - o) / s;
        }
    }
    let table = Arc::new(FeatureTable {
        m,
        rows,
        offset,
        scale,
    });
    table_cache()
        .lock()
        .expect("table cache poisoned")
        .insert(key, Arc::clone(&table));
    Ok(table)
}

const HISTORY: usize = 10;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 50;

struct Outcome {
    theta: Vec<f64>,
    objective: f64,
    gradient_norm: f64,
    iterations: usize,
    converged: bool,
    degenerate: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limited-memory BFGS from the origin with backtracking Armijo steps.
fn minimise_lbfgs(
    objective: &mut dyn FnMut(&[f64], &mut [f64]) -> f64,
    m: usize,
    cfg: &SolverConfig,
) -> Outcome {
    let mut theta = vec![0.0; m];
    let mut grad = vec![0.0; m];
    let mut value = objective(&theta, &mut grad);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(HISTORY);
    let mut trial = vec![0.0; m];
    let mut trial_grad = vec![0.0; m];
    let mut iterations = 0;

    loop {
        let gnorm = norm(&grad);
        if gnorm <= cfg.grad_tol {
            return Outcome {
                theta,
                objective: value,
                gradient_norm: gnorm,
                iterations,
                converged: true,
                degenerate: false,
            };
        }
        if value < cfg.min_entropy {
            return Outcome {
                theta,
                objective: value,
                gradient_norm: gnorm,
                iterations,
                converged: true,
                degenerate: true,
            };
        }
        if iterations >= cfg.max_iters {
            return Outcome {
                theta,
                objective: value,
                gradient_norm: gnorm,
                iterations,
                converged: false,
                degenerate: false,
            };
        }
        iterations += 1;

        // two-loop recursion for the quasi-Newton direction
        let mut direction: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let alpha = rho * dot(s, &direction);
            for (d, yi) in direction.iter_mut().zip(y) {
                *d -= alpha * yi;
            }
            alphas.push(alpha);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            direction.iter_mut().for_each(|d| *d *= gamma);
        } else {
            // first step: unit length, the statistics being standardised
            let scale = 1.0 / gnorm.max(1.0);
            direction.iter_mut().for_each(|d| *d *= scale);
        }
        for ((s, y, rho), alpha) in history.iter().zip(alphas.iter().rev()) {
            let beta = rho * dot(y, &direction);
            for (d, si) in direction.iter_mut().zip(s) {
                *d += (alpha - beta) * si;
            }
        }
        let mut slope = dot(&grad, &direction);
        if slope >= 0.0 {
            history.clear();
            direction = grad.iter().map(|g| -g / gnorm.max(1.0)).collect();
            slope = dot(&grad, &direction);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            for ((t, x), d) in trial.iter_mut().zip(&theta).zip(&direction) {
                *t = x + step * d;
            }
            let f = objective(&trial, &mut trial_grad);
            // a few ulps of slack so round-off near the optimum is not fatal
            let slack = 4.0 * f64::EPSILON * value.abs().max(1.0);
            if f.is_finite() && f <= value + ARMIJO * step * slope + slack {
                accepted = Some(f);
                break;
            }
            step *= 0.5;
        }
        let Some(new_value) = accepted else {
            // no representable decrease along a descent direction
            return Outcome {
                theta,
                objective: value,
                gradient_norm: gnorm,
                iterations,
                converged: false,
                degenerate: false,
            };
        };

        let s: Vec<f64> = trial.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = trial_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
            if history.len() == HISTORY {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        std::mem::swap(&mut theta, &mut trial);
        std::mem::swap(&mut grad, &mut trial_grad);
        value = new_value;
    }
}

/// Damped Newton from the origin. The Hessian of the dual is the covariance
/// of the statistics under the current exponential-family weights.
fn minimise_newton(rows: &[f64], moments: &[f64], m: usize, cfg: &SolverConfig) -> Outcome {
    let mut theta = vec![0.0; m];
    let mut grad = vec![0.0; m];
    let mut weights = Vec::new();
    let mut value = evaluate_weighted(&theta, moments, rows, m, &mut grad, &mut weights);
    let mut trial = vec![0.0; m];
    let mut trial_grad = vec![0.0; m];
    let mut trial_weights = Vec::new();
    let mut hessian = vec![0.0; m * m];
    let mut centred = vec![0.0; m];
    let mut iterations = 0;

    loop {
        let gnorm = norm(&grad);
        let (objective, done) = (value, iterations);
        let stop = move |converged, degenerate, theta: Vec<f64>| Outcome {
            theta,
            objective,
            gradient_norm: gnorm,
            iterations: done,
            converged,
            degenerate,
        };
        if gnorm <= cfg.grad_tol {
            return stop(true, false, theta);
        }
        if value < cfg.min_entropy {
            return stop(true, true, theta);
        }
        if iterations >= cfg.max_iters {
            return stop(false, false, theta);
        }
        iterations += 1;

        // weighted mean of the statistics is gradient + moments
        let mean: Vec<f64> = grad.iter().zip(moments).map(|(g, mu)| g + mu).collect();
        hessian.iter_mut().for_each(|h| *h = 0.0);
        for (row, &w) in rows.chunks_exact(m).zip(&weights) {
            if w == 0.0 {
                continue;
            }
            for ((c, r), mu) in centred.iter_mut().zip(row).zip(&mean) {
                *c = r - mu;
            }
            for a in 0..m {
                let wa = w * centred[a];
                let line = &mut hessian[a * m..(a + 1) * m];
                for b in a..m {
                    line[b] += wa * centred[b];
                }
            }
        }
        let trace: f64 = (0..m).map(|a| hessian[a * m + a]).sum();
        let hess = DMatrix::from_fn(m, m, |a, b| hessian[a.min(b) * m + a.max(b)]);
        let rhs = DVector::from_iterator(m, grad.iter().map(|g| -g));
        let mut ridge = 1e-10 * (trace / m as f64).max(f64::MIN_POSITIVE);
        let mut direction = None;
        for _ in 0..12 {
            let damped = &hess + DMatrix::identity(m, m) * ridge;
            if let Some(chol) = damped.cholesky() {
                direction = Some(chol.solve(&rhs).iter().copied().collect::<Vec<f64>>());
                break;
            }
            ridge *= 100.0;
        }
        let mut direction = direction.unwrap_or_else(|| grad.iter().map(|g| -g).collect());
        let mut slope = dot(&grad, &direction);
        if slope.is_nan() || slope >= 0.0 || direction.iter().any(|d| !d.is_finite()) {
            direction = grad.iter().map(|g| -g).collect();
            slope = -gnorm * gnorm;
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            for ((t, x), d) in trial.iter_mut().zip(&theta).zip(&direction) {
                *t = x + step * d;
            }
            let f = evaluate_weighted(&trial, moments, rows, m, &mut trial_grad, &mut trial_weights);
            let slack = 4.0 * f64::EPSILON * value.abs().max(1.0);
            if f.is_finite() && f <= value + ARMIJO * step * slope + slack {
                accepted = Some(f);
                break;
            }
            step *= 0.5;
        }
        let Some(new_value) = accepted else {
            return stop(false, false, theta);
        };
        std::mem::swap(&mut theta, &mut trial);
        std::mem::swap(&mut grad, &mut trial_grad);
        std::mem::swap(&mut weights, &mut trial_weights);
        value = new_value;
    }
}

/// Copula entropy (nats, never positive) of the maximum-entropy density
/// matching the sample means of the statistics in `spec`.
pub fn copula_entropy_mind(
    sample: &CopulaSample,
    spec: &FeatureMapSpec,
    cfg: &SolverConfig,
) -> Result<(f64, DualSolution)> {
    let d = sample.dimension();
    if d > MAX_COPULA_DIMENSION {
        return Err(Error::DimensionBudget {
            dimension: d,
            max: MAX_COPULA_DIMENSION,
        });
    }
    if sample.n() < MIN_COPULA_ROWS {
        return Err(Error::TooFewRows {
            needed: MIN_COPULA_ROWS,
            found: sample.n(),
        });
    }
    let m = spec.feature_count();
    if d <= 1 {
        // a one-dimensional copula is uniform
        return Ok((
            0.0,
            DualSolution {
                theta: vec![0.0; m],
                objective: 0.0,
                gradient_norm: 0.0,
                iterations: 0,
                quadrature_points: 0,
                degenerate: false,
            },
        ));
    }
    let raw = feature_moments(sample, spec)?;
    let table = feature_table(spec, cfg)?;
    debug_assert_eq!(table.m, m);
    let moments: Vec<f64> = raw
        .iter()
        .zip(&table.offset)
        .zip(&table.scale)
        .map(|((v, o), s)| (v - o) / s)
        .collect();
    let rows = &table.rows;
    let outcome = match cfg.solver {
        DualSolver::Newton => minimise_newton(rows, &moments, m, cfg),
        DualSolver::Lbfgs => {
            let mut objective =
                |theta: &[f64], grad: &mut [f64]| evaluate(theta, &moments, rows, m, grad);
            minimise_lbfgs(&mut objective, m, cfg)
        }
    };

    let theta = outcome
        .theta
        .iter()
        .zip(&table.scale)
        .map(|(t, s)| t / s)
        .collect();
    let solution = DualSolution {
        theta,
        objective: outcome.objective.min(0.0),
        gradient_norm: outcome.gradient_norm,
        iterations: outcome.iterations,
        quadrature_points: cfg.quadrature_points,
        degenerate: outcome.degenerate,
    };
    if !outcome.converged {
        return Err(Error::NonConvergence {
            best: Box::new(solution),
        });
    }
    let entropy = if outcome.degenerate {
        cfg.min_entropy
    } else {
        outcome.objective.clamp(cfg.min_entropy, 0.0)
    };
    Ok((entropy, solution))
}
