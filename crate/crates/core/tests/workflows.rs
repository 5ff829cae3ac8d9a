use leanml::data::{read_csv, Column, Dataset, IngestConfig};
use leanml::mi::SolverConfig;
use leanml::selection::{greedy_select, residual_iteration, underused_variables, SelectConfig};
use leanml::synth::{generate, SynthFunction, SynthKind, SynthSpec};
use leanml::valuation::{incremental_value, model_generalized_metrics, one_vs_rest_accuracy, value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform_columns(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..d).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect()
}

fn noise(n: usize, seed: u64, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| scale * (rng.random::<f64>() - 0.5)).collect()
}

fn ols_fit(xs: &[&[f64]], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let p = xs.len() + 1;
    let design = nalgebra::DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { xs[j - 1][i] });
    let target = nalgebra::DVector::from_column_slice(y);
    let beta = (design.transpose() * &design)
        .lu()
        .solve(&(design.transpose() * target))
        .unwrap();
    (&design * beta).iter().copied().collect()
}

#[test]
fn underused_flags_the_variable_a_model_ignores() {
    let n = 2000;
    let x = uniform_columns(n, 3, 11);
    let eps = noise(n, 12, 0.2);
    let y: Vec<f64> = (0..n).map(|i| 3.0 * x[0][i] + x[1][i] + 0.5 * x[2][i] + eps[i]).collect();
    let ds = Dataset::new(
        vec![
            Column::continuous("x1", x[0].clone()),
            Column::continuous("x2", x[1].clone()),
            Column::continuous("x3", x[2].clone()),
            Column::continuous("y", y),
        ],
        "y",
    )
    .unwrap();
    let preds: Vec<f64> = (0..n).map(|i| x[1][i] + 0.5 * x[2][i]).collect();
    let report = underused_variables(&ds, &Column::continuous("pred", preds), &SolverConfig::default()).unwrap();
    assert_eq!(report.target_trace.order()[0], "x1");
    assert!(report.warning.is_none());
    assert_eq!(report.underused.len(), 1, "{:?}", report.underused);
    assert_eq!(report.underused[0].variable, "x1");
    assert_eq!(report.underused[0].rank_for_target, 1);
    assert_eq!(report.underused[0].rank_for_predictions, Some(3));
}

#[test]
fn residual_of_linear_fit_keeps_nonlinear_signal() {
    let spec = SynthSpec::new(SynthFunction::F3, 2, SynthKind::Regression { sigma: 0.3 }, 5);
    let ds = generate(&spec).unwrap();
    let x1 = ds.column("x1").unwrap().as_continuous().unwrap();
    let x2 = ds.column("x2").unwrap().as_continuous().unwrap();
    let y = ds.target().as_continuous().unwrap();
    let fitted = ols_fit(&[x1, x2], y);
    let cfg = SolverConfig::default();
    let residual = residual_iteration(&ds, &fitted, &cfg).unwrap();
    assert_eq!(residual.dataset.target_name(), "y_residual");
    // |x − 1/2| cubed is orthogonal to linear terms but not independent of x
    assert!(residual.valuation.mi.value > 0.1, "{}", residual.valuation.mi.value);
    assert!(residual.valuation.best_r2 > 0.15);
}

#[test]
fn one_vs_rest_accuracy_on_three_classes() {
    let n = 3000;
    let x = uniform_columns(n, 2, 21);
    let labels: Vec<&str> = (0..n)
        .map(|i| match x[0][i] {
            v if v < 1.0 / 3.0 => "a",
            v if v < 2.0 / 3.0 => "b",
            _ => "c",
        })
        .collect();
    let ds = Dataset::new(
        vec![
            Column::continuous("x1", x[0].clone()),
            Column::continuous("x2", x[1].clone()),
            Column::categorical("class", &labels),
        ],
        "class",
    )
    .unwrap();
    let cfg = SolverConfig::default();
    let a = ds.target().encode("a").unwrap();
    let informative = one_vs_rest_accuracy(&ds, &["x1"], a, &cfg).unwrap();
    let blind = one_vs_rest_accuracy(&ds, &["x2"], a, &cfg).unwrap();
    assert!(informative > 0.95, "{informative}");
    assert!((blind - 2.0 / 3.0).abs() < 0.05, "{blind}");
    assert!(one_vs_rest_accuracy(&ds, &["x1"], 7, &cfg).is_err());

    let binary = generate(&SynthSpec::new(SynthFunction::F1, 1, SynthKind::Classification { flip_probability: 0.1 }, 1)).unwrap();
    assert!(one_vs_rest_accuracy(&binary, &["x1"], 0, &cfg).is_err());
}

#[test]
fn incremental_value_ignores_repeats() {
    let ds = generate(&SynthSpec::new(SynthFunction::F1, 3, SynthKind::Regression { sigma: 0.4 }, 2)).unwrap();
    let cfg = SolverConfig::default();
    let repeat = incremental_value(&ds, &["x1", "x2"], &["x2", "x1"], &cfg).unwrap();
    assert_eq!(repeat.boost.mi, 0.0);
    assert_eq!(repeat.boost.best_r2, 0.0);
    let gain = incremental_value(&ds, &["x2"], &["x1"], &cfg).unwrap();
    assert!(gain.boost.best_r2 > 0.2, "{:?}", gain.boost);
    assert!(gain.boost.best_rmse.unwrap() > 0.0);
    let from_nothing = incremental_value(&ds, &[] as &[&str], &["x1"], &cfg).unwrap();
    assert_eq!(from_nothing.old.mi.value, 0.0);
}

#[test]
fn duplicated_column_adds_nothing_in_selection() {
    let n = 2000;
    let x = uniform_columns(n, 2, 31);
    let eps = noise(n, 32, 0.3);
    let y: Vec<f64> = (0..n).map(|i| x[0][i] + 0.5 * x[1][i] + eps[i]).collect();
    let ds = Dataset::new(
        vec![
            Column::continuous("x1", x[0].clone()),
            Column::continuous("x1_copy", x[0].clone()),
            Column::continuous("x2", x[1].clone()),
            Column::continuous("y", y),
        ],
        "y",
    )
    .unwrap();
    let trace = greedy_select(&ds, &SelectConfig::exhaustive(), &SolverConfig::default()).unwrap();
    let order = trace.order();
    assert_eq!(order[1], "x2", "{order:?}");
    let last = &trace.steps[2];
    let before = trace.steps[1].running_mi;
    assert!((last.running_mi - before).abs() < 0.05, "{} vs {before}", last.running_mi);
}

#[test]
fn generalized_metrics_of_an_exact_model() {
    let n = 1500;
    let x = uniform_columns(n, 1, 41);
    let y = Column::continuous("y", x[0].clone());
    let eps = noise(n, 42, 0.05);
    let z = Column::continuous("z", x[0].iter().zip(&eps).map(|(a, e)| a + e + 1.0).collect());
    let g = model_generalized_metrics(&y, &z, &SolverConfig::default()).unwrap();
    assert!(g.generalized_r2 > 0.97, "{}", g.generalized_r2);
    // the constant offset shows up as squared bias
    let mse = g.generalized_mse.unwrap();
    assert!((mse - 1.0).abs() < 0.02, "{mse}");
    assert!(g.generalized_r2_normalized.is_none());

    let bad = Column::continuous("z", vec![0.0; 10]);
    assert!(model_generalized_metrics(&y, &bad, &SolverConfig::default()).is_err());
}

#[test]
fn synth_csv_round_trip() {
    for kind in [SynthKind::Regression { sigma: 1.0 }, SynthKind::Classification { flip_probability: 0.2 }] {
        let mut spec = SynthSpec::new(SynthFunction::F2, 3, kind, 9);
        spec.rows = Some(400);
        let ds = generate(&spec).unwrap();
        let mut buf = Vec::new();
        ds.to_csv(&mut buf).unwrap();
        let back = read_csv(buf.as_slice(), &IngestConfig::default()).unwrap();
        assert_eq!(back.n(), 400);
        assert_eq!(back.feature_names(), ds.feature_names());
        assert_eq!(back.target().kind(), ds.target().kind());
        for (a, b) in ds.columns().iter().zip(back.columns()) {
            if let (Some(u), Some(v)) = (a.as_continuous(), b.as_continuous()) {
                assert_eq!(u, v);
            }
        }
        let cfg = SolverConfig::default();
        let lhs = value(&ds, &ds.feature_names(), &cfg).unwrap();
        let rhs = value(&back, &back.feature_names(), &cfg).unwrap();
        assert_eq!(lhs.mi.value, rhs.mi.value);
    }
}

#[test]
fn seeds_reproduce_and_replicates_differ() {
    let mut spec = SynthSpec::new(SynthFunction::F4, 2, SynthKind::Regression { sigma: 0.5 }, 77);
    spec.rows = Some(200);
    let a = generate(&spec).unwrap();
    let b = generate(&spec).unwrap();
    assert_eq!(a, b);
    spec.replicate = 1;
    let c = generate(&spec).unwrap();
    assert_eq!(a.column("x1").unwrap(), c.column("x1").unwrap());
    assert_ne!(a.target(), c.target());
}
