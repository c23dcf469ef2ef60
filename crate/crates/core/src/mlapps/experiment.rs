//! Periodic retraining under drift: each step retrains on the maintained
//! sample, scores the incoming batch, then feeds it to the sampler.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::data::{DriftDataset, Example, Mode, ModeSchedule};
use super::knn::{miss_rate, DEFAULT_K};
use super::linreg::{linreg_fit, linreg_mse};
use crate::batch::Batch;
use crate::error::{Error, Result};
use crate::harness::dynamics::BatchLaw;
use crate::harness::stats::expected_shortfall;
use crate::randkit::{purpose, RandomStream};
use crate::samplers::{Brs, SlidingWindow, TemporalSampler};
use crate::Rtbs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Knn,
    Regression,
}

impl Task {
    pub fn metric(self) -> &'static str {
        match self {
            Task::Knn => "miss_pct",
            Task::Regression => "mse",
        }
    }
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knn" => Ok(Task::Knn),
            "regression" | "linreg" => Ok(Task::Regression),
            _ => Err(Error::Parse(format!("unknown task '{s}'"))),
        }
    }
}

/// How the training sample is maintained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Policy {
    /// R-TBS with the experiment's decay rate.
    Rtbs,
    /// The last `n` items.
    Sliding,
    /// A uniform reservoir over everything seen.
    Uniform,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Rtbs, Policy::Sliding, Policy::Uniform];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Rtbs => "rtbs",
            Policy::Sliding => "sw",
            Policy::Uniform => "unif",
        }
    }

    fn build(self, lambda: f64, n: usize) -> Result<Box<dyn TemporalSampler<Example>>> {
        Ok(match self {
            Policy::Rtbs => Box::new(Rtbs::new(lambda, n)?),
            Policy::Sliding => Box::new(SlidingWindow::new(n)?),
            Policy::Uniform => Box::new(Brs::new(n)?),
        })
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rtbs" => Ok(Policy::Rtbs),
            "sw" | "sliding" => Ok(Policy::Sliding),
            "unif" | "uniform" | "brs" => Ok(Policy::Uniform),
            _ => Err(Error::Parse(format!("unknown policy '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub schedule: ModeSchedule,
    pub law: BatchLaw,
    pub lambda: f64,
    pub n: usize,
    pub scoring_steps: u32,
    pub replications: u64,
    pub seed: u64,
    pub policies: Vec<Policy>,
    /// Shortfall level in percent.
    pub shortfall_level: f64,
    /// First scoring step included in the shortfall.
    pub shortfall_from: u32,
}

impl ExperimentConfig {
    /// Defaults: kNN, periodic 10/10 after 100 warm-up batches of 100 items,
    /// `lambda = 0.07`, `n = 1000`, 100 scoring steps, 30 replications.
    pub fn standard(task: Task) -> Self {
        ExperimentConfig {
            task,
            schedule: ModeSchedule {
                pattern: super::data::Pattern::Periodic { normal: 10, abnormal: 10 },
                warmup_batches: 100,
            },
            law: BatchLaw::Deterministic(100),
            lambda: 0.07,
            n: 1000,
            scoring_steps: 100,
            replications: 30,
            seed: 0,
            policies: Policy::ALL.to_vec(),
            shortfall_level: 10.0,
            shortfall_from: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub rep: u64,
    pub step: u32,
    pub policy: Policy,
    pub metric: &'static str,
    pub value: f64,
}

/// Per-policy averages over replications.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolicySummary {
    pub policy: Policy,
    pub mean_error: f64,
    pub expected_shortfall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub rows: Vec<TraceRow>,
    pub summaries: Vec<PolicySummary>,
}

impl ExperimentResult {
    pub fn summary(&self, policy: Policy) -> Option<&PolicySummary> {
        self.summaries.iter().find(|s| s.policy == policy)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rep,step,policy,metric,value\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.rep, r.step, r.policy, r.metric, r.value));
        }
        out
    }
}

fn score(task: Task, sample: &[&Example], batch: &[Example]) -> Result<f64> {
    match task {
        Task::Knn => miss_rate(sample, batch, DEFAULT_K),
        Task::Regression => Ok(linreg_mse(linreg_fit(sample)?, batch)),
    }
}

fn run_replication(cfg: &ExperimentConfig, rep: u64) -> Result<Vec<Vec<f64>>> {
    let mut data_rng = RandomStream::with_path(cfg.seed, &[rep, purpose::DATA]);
    let dataset = match cfg.task {
        Task::Knn => DriftDataset::classification(&mut data_rng),
        Task::Regression => DriftDataset::Regression,
    };
    let warmup = cfg.schedule.warmup_batches;
    let total = u64::from(warmup + cfg.scoring_steps);
    let sizes = crate::harness::dynamics::batch_sizes(&cfg.law, total, cfg.seed, rep);
    let mut next_id = 0u64;
    let batches: Vec<Vec<Example>> = sizes
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let t = i as u32 + 1;
            let mode = if t <= warmup { Mode::Normal } else { cfg.schedule.pattern.mode_at(t - warmup) };
            let batch = dataset.generate_batch(mode, b, next_id, &mut data_rng);
            next_id += b as u64;
            batch
        })
        .collect();

    let mut out = Vec::with_capacity(cfg.policies.len());
    for (pi, &policy) in cfg.policies.iter().enumerate() {
        let pi = pi as u64;
        let mut sampler = policy.build(cfg.lambda, cfg.n)?;
        let mut rng = RandomStream::with_path(cfg.seed, &[rep, purpose::POLICY, pi, purpose::SAMPLER]);
        let mut realize_rng = RandomStream::with_path(cfg.seed, &[rep, purpose::POLICY, pi, purpose::REALIZE]);
        let scorer = |sample: &[&Example], batch: &[Example]| score(cfg.task, sample, batch);
        out.push(evaluate_policy(sampler.as_mut(), &batches, warmup as usize, &mut rng, &mut realize_rng, scorer)?);
    }
    Ok(out)
}

/// Feeds `batches` (at times 1, 2, ...) to `sampler`. From batch `warmup`
/// on, the realized sample is scored against each batch before the batch is
/// observed. Returns one score per scored batch.
pub fn evaluate_policy<F>(
    sampler: &mut dyn TemporalSampler<Example>,
    batches: &[Vec<Example>],
    warmup: usize,
    rng: &mut RandomStream,
    realize_rng: &mut RandomStream,
    mut scorer: F,
) -> Result<Vec<f64>>
where
    F: FnMut(&[&Example], &[Example]) -> Result<f64>,
{
    let mut scores = Vec::with_capacity(batches.len().saturating_sub(warmup));
    for (i, batch) in batches.iter().enumerate() {
        if i >= warmup {
            let sample = sampler.realize(realize_rng);
            scores.push(scorer(&sample, batch)?);
        }
        sampler.observe(Batch::new((i + 1) as f64, batch.clone()), rng)?;
    }
    Ok(scores)
}

/// Runs every policy on identical data for each replication. Replications
/// run in parallel; results do not depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    if cfg.policies.is_empty() || cfg.replications == 0 || cfg.scoring_steps == 0 {
        return Err(Error::param("experiment needs a policy, a replication and a scoring step"));
    }
    if cfg.shortfall_from == 0 || cfg.shortfall_from > cfg.scoring_steps {
        return Err(Error::param("shortfall window must start within the scoring steps"));
    }
    let per_rep: Vec<Vec<Vec<f64>>> =
        (0..cfg.replications).into_par_iter().map(|rep| run_replication(cfg, rep)).collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (rep, errs) in per_rep.iter().enumerate() {
        for (pi, &policy) in cfg.policies.iter().enumerate() {
            for (s, &value) in errs[pi].iter().enumerate() {
                rows.push(TraceRow { rep: rep as u64, step: s as u32 + 1, policy, metric: cfg.task.metric(), value });
            }
        }
    }
    let reps = cfg.replications as f64;
    let mut summaries = Vec::with_capacity(cfg.policies.len());
    for (pi, &policy) in cfg.policies.iter().enumerate() {
        let mut mean_error = 0.0;
        let mut es = 0.0;
        for errs in &per_rep {
            let e = &errs[pi];
            mean_error += e.iter().sum::<f64>() / e.len() as f64;
            es += expected_shortfall(&e[cfg.shortfall_from as usize - 1..], cfg.shortfall_level)?;
        }
        summaries.push(PolicySummary { policy, mean_error: mean_error / reps, expected_shortfall: es / reps });
    }
    Ok(ExperimentResult { rows, summaries })
}
