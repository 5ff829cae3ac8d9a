//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 3 and 4 need the Bank Note authentication data. Point
//! `LEANML_BANKNOTE_CSV` at the UCI file (headerless, five columns) or at a
//! CSV with a header; without it both criteria report FAIL.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use leanml::data::{read_csv, Column, Dataset, IngestConfig};
use leanml::entropy::{entropy_of_probabilities, hbar_q, hbar_q_inverse, RangePolicy};
use leanml::mi::{mutual_information, MiEngine, SolverConfig};
use leanml::monitor::{batch_analysis, Direction, EpochRecord, MonitorConfig, RunRecord};
use leanml::selection::{greedy_select, SelectConfig};
use leanml::synth::{generate, sigma_for_target_r2, SynthFunction, SynthKind, SynthSpec};
use leanml::valuation::{value, AchievablePerformance};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("synthetic regression recovery", synthetic_regression),
        ("synthetic classification recovery", synthetic_classification),
        ("bank note selection trace", banknote_trace),
        ("bank note without variance", banknote_without_variance),
        ("mutual information oracles", mi_oracles),
        ("flat-tail entropy suite", flat_tail_suite),
        ("invariance suite", invariance_suite),
        ("monitor simulation", monitor_simulation),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}; {secs:.1}s)", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} {name}: FAIL ({detail}; {secs:.1}s)", i + 1)
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn all_features(ds: &Dataset) -> Vec<String> {
    ds.feature_names().into_iter().map(str::to_string).collect()
}

fn synthetic_regression() -> Outcome {
    let (mut worst_r2, mut worst_rmse) = (0.0f64, 0.0f64);
    let mut misses = Vec::new();
    for d in [1usize, 2] {
        for function in [SynthFunction::F1, SynthFunction::F2] {
            for truth in [0.75, 0.5, 0.25] {
                let sigma = sigma_for_target_r2(truth).map_err(|e| e.to_string())?;
                let (mut r2, mut rmse) = (0.0, 0.0);
                for replicate in 0..10 {
                    let spec = SynthSpec {
                        replicate,
                        ..SynthSpec::new(function, d, SynthKind::Regression { sigma }, 2024)
                    };
                    let ds = generate(&spec).map_err(|e| e.to_string())?;
                    let perf = value(&ds, &all_features(&ds), &cfg()).map_err(|e| e.to_string())?;
                    r2 += perf.best_r2 / 10.0;
                    rmse += perf.best_rmse.unwrap_or(f64::NAN) / 10.0;
                }
                let (e_r2, e_rmse) = ((r2 - truth).abs(), (rmse - sigma).abs());
                worst_r2 = worst_r2.max(e_r2);
                worst_rmse = worst_rmse.max(e_rmse);
                if !(e_r2 <= 0.05 && e_rmse <= 0.06) {
                    misses.push(format!("{function:?} d={d} R²={truth}: {r2:.4}/{rmse:.4}"));
                }
            }
        }
    }
    let detail = format!("worst |R² error| {worst_r2:.4} (tol 0.05), worst |RMSE error| {worst_rmse:.4} (tol 0.06)");
    if misses.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; misses: {}", misses.join(", ")))
    }
}

fn synthetic_classification() -> Outcome {
    let mut worst = 0.0f64;
    let mut misses = Vec::new();
    for d in [1usize, 2] {
        for function in [SynthFunction::F1, SynthFunction::F2] {
            for flip in [0.0, 0.25] {
                let mut acc = 0.0;
                for replicate in 0..10 {
                    let spec = SynthSpec {
                        replicate,
                        ..SynthSpec::new(function, d, SynthKind::Classification { flip_probability: flip }, 2024)
                    };
                    let ds = generate(&spec).map_err(|e| e.to_string())?;
                    let perf = value(&ds, &all_features(&ds), &cfg()).map_err(|e| e.to_string())?;
                    acc += perf.best_accuracy.unwrap_or(f64::NAN) / 10.0;
                }
                let err = (acc - (1.0 - flip)).abs();
                worst = worst.max(err);
                if err.is_nan() || err > 0.05 {
                    misses.push(format!("{function:?} d={d} p_e={flip}: {acc:.4}"));
                }
            }
        }
    }
    let detail = format!("worst |accuracy error| {worst:.4} (tol 0.05)");
    if misses.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; misses: {}", misses.join(", ")))
    }
}

const BANKNOTE_COLUMNS: &str = "variance,skewness,kurtosis,entropy,class";

fn banknote_path() -> Option<PathBuf> {
    std::env::var_os("LEANML_BANKNOTE_CSV")
        .map(PathBuf::from)
        .or_else(|| {
            let bundled = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/data_banknote_authentication.txt");
            bundled.exists().then_some(bundled)
        })
}

fn banknote() -> Result<Dataset, String> {
    let path = banknote_path().ok_or_else(|| {
        "Bank Note data not available: set LEANML_BANKNOTE_CSV to the UCI banknote authentication file".to_string()
    })?;
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let first = text.lines().next().unwrap_or("");
    let headerless = first.split(',').all(|c| c.trim().parse::<f64>().is_ok());
    let text = if headerless {
        format!("{BANKNOTE_COLUMNS}\n{text}")
    } else {
        text
    };
    let ingest = IngestConfig {
        target: Some(text.lines().next().unwrap_or("").rsplit(',').next().unwrap_or("class").trim().to_string()),
        categorical: Vec::new(),
        continuous: Vec::new(),
        max_rows: None,
    };
    read_csv(text.as_bytes(), &ingest).map_err(|e| e.to_string())
}

fn check_trace(
    ds: &Dataset,
    expected_order: &[&str],
    accuracy: &[f64],
    r2: Option<&[f64]>,
    tolerance_acc: f64,
) -> Outcome {
    let trace = greedy_select(ds, &SelectConfig::exhaustive(), &cfg()).map_err(|e| e.to_string())?;
    let order: Vec<String> = trace.order().iter().map(|s| s.to_lowercase()).collect();
    let accs: Vec<f64> = trace.steps.iter().map(|s| s.running_best_accuracy.unwrap_or(f64::NAN)).collect();
    let r2s: Vec<f64> = trace.steps.iter().map(|s| s.running_best_r2).collect();
    let detail = format!(
        "order {:?}, running accuracy {:?}, running R² {:?}",
        order,
        accs.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>(),
        r2s.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>()
    );
    let order_ok = order.len() == expected_order.len()
        && order.iter().zip(expected_order).all(|(a, b)| a.starts_with(&b[..4]));
    let acc_ok = accuracy.iter().zip(&accs).all(|(e, g)| (e - g).abs() <= tolerance_acc);
    let r2_ok = r2.is_none_or(|r| r.iter().zip(&r2s).all(|(e, g)| (e - g).abs() <= 0.04));
    if order_ok && acc_ok && r2_ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn banknote_trace() -> Outcome {
    let ds = banknote()?;
    let start = Instant::now();
    let result = check_trace(
        &ds,
        &["variance", "skewness", "kurtosis", "entropy"],
        &[0.90, 0.93, 1.00, 1.00],
        Some(&[0.51, 0.58, 0.75, 0.75]),
        0.03,
    );
    if start.elapsed().as_secs_f64() >= 60.0 {
        return Err(format!("runtime over 60 s; {}", result.unwrap_or_else(|e| e)));
    }
    result
}

fn banknote_without_variance() -> Outcome {
    let ds = banknote()?;
    let keep: Vec<String> = all_features(&ds).into_iter().filter(|f| !f.eq_ignore_ascii_case("variance")).collect();
    let ds = ds.subset(&keep).map_err(|e| e.to_string())?;
    let trace = greedy_select(&ds, &SelectConfig::exhaustive(), &cfg()).map_err(|e| e.to_string())?;
    let order: Vec<String> = trace.order().iter().map(|s| s.to_lowercase()).collect();
    let final_acc = trace.steps.last().and_then(|s| s.running_best_accuracy).unwrap_or(f64::NAN);
    let detail = format!("order {order:?}, final accuracy {final_acc:.3}");
    let expected = ["skew", "entr", "kurt"];
    let order_ok = order.len() == 3 && order.iter().zip(expected).all(|(a, b)| a.starts_with(b));
    if order_ok && (final_acc - 0.99).abs() <= 0.02 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn mi_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut parts = Vec::new();
    let mut ok = true;
    for rho in [0.3f64, 0.6, 0.9] {
        let n = 5000;
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for _ in 0..n {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            a.push(z1);
            b.push(rho * z1 + (1.0 - rho * rho).sqrt() * z2);
        }
        let ds = Dataset::new(vec![Column::continuous("a", a), Column::continuous("b", b)], "b")
            .map_err(|e| e.to_string())?;
        let mi = mutual_information(&ds, &["a"], &cfg()).map_err(|e| e.to_string())?.value;
        let truth = -0.5 * (1.0 - rho * rho).ln();
        ok &= (mi - truth).abs() <= 0.07;
        parts.push(format!("rho {rho}: {mi:.4} vs {truth:.4}"));
    }
    let n = 10_000;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let bit = rng.random::<bool>();
        let flip = rng.random::<f64>() < 0.25;
        x.push(if bit { "1" } else { "0" });
        y.push(if bit != flip { "1" } else { "0" });
    }
    let ds = Dataset::new(vec![Column::categorical("x", &x), Column::categorical("y", &y)], "y")
        .map_err(|e| e.to_string())?;
    let mi = mutual_information(&ds, &["x"], &cfg()).map_err(|e| e.to_string())?.value;
    let truth = 2f64.ln() - hbar_q(0.75, 2).map_err(|e| e.to_string())?;
    ok &= (mi - truth).abs() <= 0.02;
    parts.push(format!("binary channel: {mi:.4} vs {truth:.4}"));
    let detail = parts.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn tails(q: usize, remaining: i64, cap: i64, acc: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if acc.len() == q - 2 {
        if remaining <= cap {
            let mut full = acc.clone();
            full.push(remaining);
            out.push(full);
        }
        return;
    }
    for v in 0..=remaining.min(cap) {
        acc.push(v);
        tails(q, remaining - v, cap, acc, out);
        acc.pop();
    }
}

fn flat_tail_suite() -> Outcome {
    let mut worst = 0.0f64;
    for q in 2..=26usize {
        let lo = 1.0 / q as f64;
        for i in 0..100 {
            let a = lo + (1.0 - lo) * i as f64 / 99.0;
            let h = hbar_q(a, q).map_err(|e| e.to_string())?;
            let back = hbar_q_inverse(h, q, RangePolicy::Strict).map_err(|e| e.to_string())?;
            worst = worst.max((back - a).abs());
        }
    }
    if worst > 1e-8 {
        return Err(format!("round trip error {worst:.2e}"));
    }
    let mut checked = 0usize;
    for q in 2..=4usize {
        let start = 100 / q as i64 + i64::from(100 % q as i64 != 0);
        for top in start..=100 {
            let a = top as f64 / 100.0;
            let bound = hbar_q(a, q).map_err(|e| e.to_string())?;
            let mut all = Vec::new();
            tails(q, 100 - top, top, &mut Vec::new(), &mut all);
            for tail in all {
                let mut p = vec![a];
                p.extend(tail.iter().map(|&t| t as f64 / 100.0));
                checked += 1;
                if entropy_of_probabilities(&p) > bound + 1e-12 {
                    return Err(format!("distribution {p:?} beats the flat tail"));
                }
            }
        }
    }
    Ok(format!("round trip max error {worst:.1e}; {checked} grid distributions checked"))
}

fn metrics(perf: &AchievablePerformance) -> Vec<f64> {
    let mut v = vec![perf.mi.value, perf.best_r2, perf.best_log_likelihood];
    v.extend(perf.best_r2_normalized);
    v.extend(perf.best_rmse);
    v.extend(perf.best_accuracy);
    v.extend(perf.diagnostics.hellman_raviv_lower);
    v.extend(perf.diagnostics.brillinger_mse_lower);
    v
}

fn transformed(ds: &Dataset) -> Result<Dataset, String> {
    let transforms: [fn(f64) -> f64; 3] = [|x| (3.0 * x).exp(), |x| x * x * x - 7.0, |x| 1.0 / (1.0 + (-4.0 * x).exp())];
    let mut columns = Vec::new();
    for (i, c) in ds.features().enumerate() {
        let values = c.as_continuous().ok_or("expected continuous features")?;
        let t = transforms[i % transforms.len()];
        columns.push(Column::continuous(c.name(), values.iter().map(|&x| t(x)).collect()));
    }
    columns.push(ds.target().clone());
    Dataset::new(columns, ds.target_name()).map_err(|e| e.to_string())
}

fn invariance_suite() -> Outcome {
    let specs = [
        SynthSpec::new(SynthFunction::F3, 2, SynthKind::Regression { sigma: 0.5 }, 5),
        SynthSpec::new(SynthFunction::F4, 2, SynthKind::Classification { flip_probability: 0.1 }, 6),
    ];
    let mut worst = 0.0f64;
    for spec in &specs {
        let ds = generate(spec).map_err(|e| e.to_string())?;
        let moved = transformed(&ds)?;
        for features in [vec!["x1"], vec!["x2"], vec!["x1", "x2"]] {
            let a = metrics(&value(&ds, &features, &cfg()).map_err(|e| e.to_string())?);
            let b = metrics(&value(&moved, &features, &cfg()).map_err(|e| e.to_string())?);
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    if worst >= 1e-9 {
        return Err(format!("monotone transform moved a metric by {worst:.2e}"));
    }

    let spec = SynthSpec {
        rows: Some(3000),
        ..SynthSpec::new(SynthFunction::F2, 5, SynthKind::Regression { sigma: 0.5 }, 9)
    };
    let ds = generate(&spec).map_err(|e| e.to_string())?;
    let engine = MiEngine::new(&ds, &cfg()).map_err(|e| e.to_string())?;
    let names = all_features(&ds);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst_drop = f64::NEG_INFINITY;
    for _ in 0..50 {
        let mut shuffled = names.clone();
        shuffled.shuffle(&mut rng);
        let outer = rng.random_range(2..=names.len());
        let inner = rng.random_range(1..outer);
        let big = &shuffled[..outer];
        let small = &shuffled[..inner];
        let mi_big = engine.mutual_information(big).map_err(|e| e.to_string())?.value;
        let mi_small = engine.mutual_information(small).map_err(|e| e.to_string())?.value;
        worst_drop = worst_drop.max(mi_small - mi_big);
    }
    let detail = format!("max transform change {worst:.1e}; worst nesting drop {worst_drop:.4} nats over 50 pairs");
    if worst_drop <= 0.03 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn monitor_simulation() -> Outcome {
    const BEST: f64 = 0.82;
    const EPOCHS: u64 = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut runs = Vec::new();
    let mut overshooting = Vec::new();
    for r in 0..100 {
        let overshoot = r % 4 != 0;
        let rate = rng.random_range(0.05..0.15);
        let (ceiling, holdout_final) = if overshoot {
            (rng.random_range(0.95..0.99), rng.random_range(0.70..0.78))
        } else {
            (rng.random_range(0.74..0.80), 0.0)
        };
        let mut epochs = Vec::new();
        for e in 1..=EPOCHS {
            let progress = 1.0 - (-rate * e as f64).exp();
            let train = 0.5 + (ceiling - 0.5) * progress;
            epochs.push(EpochRecord {
                index: e,
                train_metric: train,
                holdout_metric: None,
            });
        }
        let final_train = epochs.last().map(|e| e.train_metric).unwrap_or(0.0);
        let final_holdout = if overshoot {
            holdout_final
        } else {
            final_train - rng.random_range(0.0..0.02)
        };
        if overshoot {
            overshooting.push(format!("run{r}"));
        }
        runs.push(RunRecord {
            run_id: format!("run{r}"),
            epochs,
            terminated_at: None,
            final_train,
            final_holdout: Some(final_holdout),
        });
    }
    let config = MonitorConfig::new(BEST, Direction::HigherIsBetter);
    let analysis = batch_analysis(&runs, &config, 0.10).map_err(|e| e.to_string())?;
    let all_terminated = analysis
        .runs
        .iter()
        .filter(|o| overshooting.contains(&o.run_id))
        .all(|o| o.terminated_at.is_some());
    let detail = format!(
        "overfit rate {:.2}, regret {:.2}, opportunity cost {:.3}, {} of {} overshooting runs terminated",
        analysis.overfit_rate,
        analysis.regret,
        analysis.opportunity_cost,
        analysis.runs.iter().filter(|o| overshooting.contains(&o.run_id) && o.terminated_at.is_some()).count(),
        overshooting.len()
    );
    if analysis.regret == 0.0 && all_terminated && analysis.opportunity_cost >= 0.5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn leanml(args: &[&str], threads: &str, stdin: Option<&Path>) -> Result<(i32, Vec<u8>), String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_leanml"));
    cmd.args(args).env("LEANVIZ_THREADS", threads);
    if let Some(path) = stdin {
        cmd.stdin(std::fs::File::open(path).map_err(|e| e.to_string())?);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| dir.path().join(name).display().to_string();
    let data = p("data.csv");
    let (code, _) = leanml(&["synth", "--function", "f3", "--dimension", "3", "--sigma", "0.7", "--seed", "4", "--out", &data], "1", None)?;
    if code != 0 {
        return Err(format!("synth exited {code}"));
    }
    let runs_path = p("runs.jsonl");
    let mut runs = String::new();
    for r in 0..5 {
        let epochs: Vec<String> = (1..=6)
            .map(|e| format!("{{\"index\":{e},\"train_metric\":{}}}", 0.5 + 0.1 * (e + r) as f64 / 2.0))
            .collect();
        runs.push_str(&format!(
            "{{\"run_id\":\"r{r}\",\"epochs\":[{}],\"final_train\":{},\"final_holdout\":0.7}}\n",
            epochs.join(","),
            0.5 + 0.1 * (6 + r) as f64 / 2.0
        ));
    }
    std::fs::write(&runs_path, runs).map_err(|e| e.to_string())?;
    let protocol = dir.path().join("protocol.txt");
    std::fs::write(&protocol, "epoch=1 metric=0.5\nepoch=2 metric=0.9\n").map_err(|e| e.to_string())?;

    let commands: Vec<(&str, Vec<&str>, bool)> = vec![
        ("synth", vec!["synth", "--function", "f2", "--dimension", "2", "--flip-probability", "0.2", "--seed", "8"], false),
        ("value", vec!["value", "--data", &data], false),
        ("select", vec!["select", "--data", &data, "--fraction", "1"], false),
        ("improve", vec!["improve", "--data", &data, "--new-features", "x3"], false),
        ("monitor batch", vec!["monitor", "--best", "0.8", "--runs", &runs_path], false),
        ("monitor protocol", vec!["monitor", "--best", "0.8"], true),
    ];
    let mut checked = Vec::new();
    for (label, args, uses_stdin) in &commands {
        let mut outputs = Vec::new();
        for (k, threads) in ["1", "4"].iter().enumerate() {
            let out = p(&format!("{}-{k}.out", label.replace(' ', "_")));
            let mut full = args.clone();
            full.extend(["--out", out.as_str()]);
            let (code, _) = leanml(&full, threads, uses_stdin.then_some(protocol.as_path()))?;
            if code != 0 && code != 10 {
                return Err(format!("{label} exited {code}"));
            }
            outputs.push(std::fs::read(&out).map_err(|e| format!("{label}: {e}"))?);
        }
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            return Err(format!("{label}: machine-readable output differs between reruns"));
        }
        checked.push(*label);
    }
    Ok(format!("byte-identical reruns (1 vs 4 threads) for {}", checked.join(", ")))
}
