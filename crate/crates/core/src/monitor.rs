//! Early termination of training runs that beat the theoretical best, plus
//! ex-post analysis of a batch of runs.
//!
//! The monitored metric is the training-set metric: a model whose training
//! performance is already beyond what the data can support is overfitting.

use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "higher" | "higher_is_better" | "max" => Ok(Direction::HigherIsBetter),
            "lower" | "lower_is_better" | "min" => Ok(Direction::LowerIsBetter),
            other => Err(format!("unknown direction '{other}' (expected higher or lower)")),
        }
    }
}

impl Direction {
    /// How far `value` is better than `reference` (negative when worse).
    fn advantage(self, value: f64, reference: f64) -> f64 {
        match self {
            Direction::HigherIsBetter => value - reference,
            Direction::LowerIsBetter => reference - value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorConfig {
    pub best_value: f64,
    pub direction: Direction,
    /// Absolute margin the metric must exceed the best value by.
    pub threshold: f64,
    /// Consecutive violations needed before terminating.
    pub patience: usize,
}

impl MonitorConfig {
    pub fn new(best_value: f64, direction: Direction) -> Self {
        Self {
            best_value,
            direction,
            threshold: 0.0,
            patience: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.best_value.is_finite() {
            return Err(Error::NonFinite("best value"));
        }
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(Error::OutOfDomain {
                what: "threshold",
                value: self.threshold,
            });
        }
        if self.patience == 0 {
            return Err(Error::InvalidArgument("patience must be at least 1".into()));
        }
        Ok(())
    }

    fn violates(&self, metric: f64) -> bool {
        self.direction.advantage(metric, self.best_value) > self.threshold
    }
}

pub const TERMINATE_REASON: &str = "beyond_theoretical_best";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Continue,
    Terminate { reason: String },
}

impl Decision {
    pub fn is_terminate(&self) -> bool {
        matches!(self, Decision::Terminate { .. })
    }
}

/// Per-run monitor state.
#[derive(Debug, Clone)]
pub struct Monitor {
    config: MonitorConfig,
    streak: usize,
    observed: usize,
    terminated: bool,
}

impl Monitor {
    pub fn new(config: MonitorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            streak: 0,
            observed: 0,
            terminated: false,
        })
    }

    pub fn config(&self) -> &MonitorConfig {
        &self.config
    }

    pub fn observations(&self) -> usize {
        self.observed
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    /// Feed one training metric. Once terminated, stays terminated.
    pub fn observe(&mut self, metric: f64) -> Result<Decision> {
        if !metric.is_finite() {
            return Err(Error::NonFinite("metric"));
        }
        self.observed += 1;
        if !self.terminated {
            if self.config.violates(metric) {
                self.streak += 1;
            } else {
                self.streak = 0;
            }
            self.terminated = self.streak >= self.config.patience;
        }
        Ok(if self.terminated {
            Decision::Terminate {
                reason: TERMINATE_REASON.to_string(),
            }
        } else {
            Decision::Continue
        })
    }
}

/// One `epoch=<int> metric=<float>` line.
pub fn parse_protocol_line(line: &str, line_no: usize) -> Result<(u64, f64)> {
    let bad = |message: String| Error::Protocol {
        line: line_no,
        message,
    };
    let (mut epoch, mut metric) = (None, None);
    for token in line.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got '{token}'")))?;
        match key {
            "epoch" => {
                epoch = Some(value.parse::<u64>().map_err(|_| bad(format!("invalid epoch '{value}'")))?)
            }
            "metric" => {
                let m = value
                    .parse::<f64>()
                    .map_err(|_| bad(format!("invalid metric '{value}'")))?;
                if !m.is_finite() {
                    return Err(bad(format!("non-finite metric '{value}'")));
                }
                metric = Some(m)
            }
            other => return Err(bad(format!("unknown key '{other}'"))),
        }
    }
    match (epoch, metric) {
        (Some(e), Some(m)) => Ok((e, m)),
        _ => Err(bad("expected 'epoch=<int> metric=<float>'".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionEnd {
    Terminated { epoch: u64 },
    EndOfInput,
}

/// Run the line protocol: one reply per input line, stopping after TERMINATE.
/// Blank lines are ignored.
pub fn run_protocol<R: BufRead, W: Write>(config: MonitorConfig, input: R, mut output: W) -> Result<SessionEnd> {
    let mut monitor = Monitor::new(config)?;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (epoch, metric) = parse_protocol_line(&line, i + 1)?;
        match monitor.observe(metric)? {
            Decision::Continue => writeln!(output, "CONTINUE")?,
            Decision::Terminate { reason } => {
                writeln!(output, "TERMINATE reason={reason}")?;
                output.flush()?;
                return Ok(SessionEnd::Terminated { epoch });
            }
        }
        output.flush()?;
    }
    Ok(SessionEnd::EndOfInput)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub index: u64,
    pub train_metric: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holdout_metric: Option<f64>,
}

/// Full history of one training run, as stored one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub epochs: Vec<EpochRecord>,
    #[serde(default)]
    pub terminated_at: Option<u64>,
    pub final_train: f64,
    #[serde(default)]
    pub final_holdout: Option<f64>,
}

impl RunRecord {
    fn validate(&self) -> Result<()> {
        if self.epochs.windows(2).any(|w| w[1].index <= w[0].index) {
            return Err(Error::InvalidArgument(format!(
                "run '{}': epoch indices must be strictly increasing",
                self.run_id
            )));
        }
        Ok(())
    }

    /// Epochs that would have run under termination.
    pub fn executed_epochs(&self) -> usize {
        match self.terminated_at {
            Some(t) => self.epochs.iter().filter(|e| e.index <= t).count(),
            None => self.epochs.len(),
        }
    }
}

/// Replay the monitor over a run's training metrics and record where it stops.
pub fn apply_early_termination(run: &RunRecord, config: &MonitorConfig) -> Result<RunRecord> {
    run.validate()?;
    let mut monitor = Monitor::new(*config)?;
    let mut out = run.clone();
    out.terminated_at = None;
    for epoch in &run.epochs {
        if monitor.observe(epoch.train_metric)?.is_terminate() {
            out.terminated_at = Some(epoch.index);
            break;
        }
    }
    Ok(out)
}

pub fn read_runs<R: BufRead>(input: R) -> Result<Vec<RunRecord>> {
    let mut runs = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let run: RunRecord = serde_json::from_str(&line).map_err(|e| Error::Protocol {
            line: i + 1,
            message: e.to_string(),
        })?;
        runs.push(run);
    }
    Ok(runs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub run_id: String,
    pub overfit: bool,
    pub terminated_at: Option<u64>,
    pub executed_epochs: usize,
    pub total_epochs: usize,
    /// Terminated, yet its holdout metric beat the best value.
    pub regretted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchAnalysis {
    pub runs: Vec<RunOutcome>,
    pub overfit_rate: f64,
    pub terminated: usize,
    pub regret: f64,
    pub opportunity_cost: f64,
}

pub const DEFAULT_OVERFIT_MARGIN: f64 = 0.10;

/// Overfitting, regret and resource savings across a batch of runs.
///
/// Runs that already carry `terminated_at` keep it; the rest are replayed
/// through the monitor. A run overfits when its holdout metric is worse than
/// its training metric by at least `overfit_margin` relative to the training
/// metric's magnitude.
pub fn batch_analysis(runs: &[RunRecord], config: &MonitorConfig, overfit_margin: f64) -> Result<BatchAnalysis> {
    config.validate()?;
    if runs.is_empty() {
        return Err(Error::InvalidArgument("no runs to analyse".into()));
    }
    if !(overfit_margin.is_finite() && overfit_margin >= 0.0) {
        return Err(Error::OutOfDomain {
            what: "overfit margin",
            value: overfit_margin,
        });
    }
    let mut outcomes = Vec::with_capacity(runs.len());
    let (mut executed, mut total) = (0usize, 0usize);
    for run in runs {
        let holdout = run
            .final_holdout
            .ok_or_else(|| Error::MissingMetric(format!("holdout for run '{}'", run.run_id)))?;
        let run = if run.terminated_at.is_some() {
            run.validate()?;
            run.clone()
        } else {
            apply_early_termination(run, config)?
        };
        let loss = -config.direction.advantage(holdout, run.final_train);
        let overfit = loss >= overfit_margin * run.final_train.abs();
        let terminated = run.terminated_at.is_some();
        let regretted = terminated && config.direction.advantage(holdout, config.best_value) > 0.0;
        let done = run.executed_epochs();
        executed += done;
        total += run.epochs.len();
        outcomes.push(RunOutcome {
            run_id: run.run_id.clone(),
            overfit,
            terminated_at: run.terminated_at,
            executed_epochs: done,
            total_epochs: run.epochs.len(),
            regretted,
        });
    }
    let n = outcomes.len() as f64;
    let terminated = outcomes.iter().filter(|o| o.terminated_at.is_some()).count();
    let regretted = outcomes.iter().filter(|o| o.regretted).count();
    Ok(BatchAnalysis {
        overfit_rate: outcomes.iter().filter(|o| o.overfit).count() as f64 / n,
        terminated,
        regret: if terminated == 0 {
            0.0
        } else {
            regretted as f64 / terminated as f64
        },
        opportunity_cost: if total == 0 {
            0.0
        } else {
            1.0 - executed as f64 / total as f64
        },
        runs: outcomes,
    })
}
