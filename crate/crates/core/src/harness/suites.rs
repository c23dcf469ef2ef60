//! The named verification suites behind `tbs verify` and the acceptance test.
//! Each suite returns machine-readable checks plus any data files it emits.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::dynamics::{size_dynamics, BatchLaw, DynamicsConfig, TRACE_HEADER};
use super::exact::{downsample_oracle, enumerate_downsample, ratio_f64, Rational};
use super::inclusion::{check_ratio, estimate_inclusion, InclusionEstimate};
use super::report::CheckReport;
use super::stats::chi_square_homogeneity;
use crate::batch::numbered_stream;
use crate::distsim::{
    apply_plan, plan_centralized, plan_distributed, CostLedger, DistributedRtbs, ItemId, PartitionedBatch,
    PartitionedReservoir, Strategy,
};
use crate::error::{Error, Result};
use crate::mlapps::{run_experiment, ExperimentConfig, Policy, Task};
use crate::randkit::{purpose, RandomSource, RandomStream};
use crate::rtbs::decide_step;
use crate::samplers::{theorem1_bounds, ttbs_expected_size, Bchao, BoundDirection, SamplerConfig, SamplerKind, TemporalSampler};

/// Suite names in run order.
pub const SUITES: [&str; 11] = [
    "ratio",
    "rtbs-exact",
    "downsample",
    "ttbs-mean",
    "ttbs-tail",
    "hard-bound",
    "size-traces",
    "bchao",
    "distributed",
    "cost",
    "ml",
];

/// A data file produced by a suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SuiteOutput {
    pub reports: Vec<CheckReport>,
    pub artifacts: Vec<Artifact>,
}

impl SuiteOutput {
    fn checks(reports: Vec<CheckReport>) -> Self {
        SuiteOutput { reports, artifacts: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteOutput> {
    match name {
        "ratio" => ratio_suite(seed),
        "rtbs-exact" => rtbs_exact_suite(seed),
        "downsample" => downsample_suite(),
        "ttbs-mean" => ttbs_mean_suite(seed),
        "ttbs-tail" => ttbs_tail_suite(seed),
        "hard-bound" => hard_bound_suite(seed),
        "size-traces" => size_traces_suite(seed),
        "bchao" => bchao_suite(seed),
        "distributed" => distributed_suite(seed),
        "cost" => cost_suite(seed),
        "ml" => ml_suite(seed),
        _ => Err(Error::param(format!("unknown suite '{name}' (known: {})", SUITES.join(", ")))),
    }
}

type Factory = dyn Fn() -> Result<Box<dyn TemporalSampler<u64>>> + Sync;

fn sampler_factory(cfg: SamplerConfig) -> impl Fn() -> Result<Box<dyn TemporalSampler<u64>>> + Sync {
    move || cfg.build::<u64>()
}

/// Relative inclusion across arrival gaps 1, 5 and 10.
pub fn ratio_suite(seed: u64) -> Result<SuiteOutput> {
    const LAMBDA: f64 = 0.1;
    const REPS: u64 = 100_000;
    let stream = numbered_stream(&[20; 20]);
    let mut reports = Vec::new();
    for kind in [SamplerKind::Btbs, SamplerKind::Ttbs, SamplerKind::Rtbs] {
        let factory = sampler_factory(SamplerConfig::new(kind, LAMBDA, 50, 20.0));
        let est = estimate_inclusion(&factory, &stream, REPS, seed, &[stream.len() - 1])?;
        let r = check_ratio(&est[0], LAMBDA, &[1.0, 5.0, 10.0])?;
        let failed = r.pairs.iter().filter(|p| !p.pass).count();
        reports.push(
            CheckReport::at_least(format!("ratio/{kind}"), r.pass_fraction(), 0.99)
                .with_detail(format!("{} pairs, {failed} outside 3 std errors, {REPS} replications", r.pairs.len())),
        );
    }
    Ok(SuiteOutput::checks(reports))
}

/// Stream shared by the per-item inclusion checks.
pub const EXACT_STREAM: [usize; 10] = [3, 0, 5, 2, 8, 1, 0, 4, 6, 2];
const EXACT_N: usize = 8;
const EXACT_LAMBDA: f64 = 0.2;

fn per_item_check(name: &str, factory: &Factory, seed: u64) -> Result<CheckReport> {
    const REPS: u64 = 100_000;
    let stream = numbered_stream(&EXACT_STREAM);
    let est = estimate_inclusion(factory, &stream, REPS, seed, &[stream.len() - 1])?;
    let row: &[InclusionEstimate] = &est[0];
    let mut worst: f64 = 0.0;
    let mut outside = 0;
    for e in row {
        let a = e.analytic.ok_or_else(|| Error::InsufficientData(format!("no closed form for item {}", e.item)))?;
        let z = if e.std_error > 0.0 {
            (e.frequency - a).abs() / e.std_error
        } else if (e.frequency - a).abs() <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z);
        if e.within(3.0) != Some(true) {
            outside += 1;
        }
    }
    Ok(CheckReport::at_most(name, worst, 3.0)
        .with_detail(format!("max |z| over {} items, {outside} outside, {REPS} replications", row.len())))
}

/// Per-item R-TBS inclusion against `(C/W) exp(-lambda age)`.
pub fn rtbs_exact_suite(seed: u64) -> Result<SuiteOutput> {
    let factory = sampler_factory(SamplerConfig::new(SamplerKind::Rtbs, EXACT_LAMBDA, EXACT_N, 0.0));
    Ok(SuiteOutput::checks(vec![per_item_check("rtbs-exact/items", &factory, seed)?]))
}

/// The implementation's downsampling against the closed-form oracle on a
/// grid of weights.
pub fn downsample_suite() -> Result<SuiteOutput> {
    let mut worst: f64 = 0.0;
    let mut worst_mass: f64 = 0.0;
    let mut cases = 0;
    for twice in 1..=8i64 {
        let from = Rational::new(twice, 2);
        for sixteenth in 1..16 * twice / 2 {
            let to = Rational::new(sixteenth, 16);
            if to >= from {
                continue;
            }
            let exact = downsample_oracle(from, to)?;
            let (got, mass) = enumerate_downsample(ratio_f64(from), ratio_f64(to))?;
            let k = from.floor().to_integer() as usize;
            for (i, &p) in got.iter().enumerate() {
                let want = if i < k { exact.full } else { exact.partial.expect("partial item present") };
                worst = worst.max((p - ratio_f64(want)).abs());
            }
            worst_mass = worst_mass.max((mass - 1.0).abs());
            cases += 1;
        }
    }
    Ok(SuiteOutput::checks(vec![
        CheckReport::at_most("downsample/oracle", worst, 1e-12)
            .with_detail(format!("max abs difference over {cases} (C, C') pairs")),
        CheckReport::at_most("downsample/mass", worst_mass, 1e-12),
    ]))
}

/// T-TBS mean size from a full and from an empty start.
pub fn ttbs_mean_suite(seed: u64) -> Result<SuiteOutput> {
    const N: usize = 100;
    const LAMBDA: f64 = 0.05;
    let mut reports = Vec::new();
    for (label, c0) in [("full-start", N), ("empty-start", 0)] {
        let cfg = DynamicsConfig {
            sampler: SamplerConfig::new(SamplerKind::Ttbs, LAMBDA, N, 100.0),
            law: BatchLaw::Deterministic(100),
            steps: 50,
            replications: 10_000,
            seed,
            initial_size: c0,
        };
        let trace = size_dynamics(&cfg)?;
        let worst = (1..=cfg.steps)
            .map(|t| {
                let want = ttbs_expected_size(N as f64, LAMBDA, c0 as f64, t as u32);
                (trace.mean(t) - want).abs() / trace.std_error(t)
            })
            .fold(0.0, f64::max);
        reports.push(
            CheckReport::at_most(format!("ttbs-mean/{label}"), worst, 3.0)
                .with_detail("max |z| of step mean against n + p^t (C0 - n) over 50 steps"),
        );
    }
    Ok(SuiteOutput::checks(reports))
}

/// Upper tail of the T-TBS size against the doubled Chernoff bound.
pub fn ttbs_tail_suite(seed: u64) -> Result<SuiteOutput> {
    const LAMBDA: f64 = 0.1;
    let mut reports = Vec::new();
    for n in [20usize, 50] {
        let cfg = DynamicsConfig {
            sampler: SamplerConfig::new(SamplerKind::Ttbs, LAMBDA, n, n as f64),
            law: BatchLaw::Deterministic(n),
            steps: 100,
            replications: 20_000,
            seed,
            initial_size: n,
        };
        let trace = size_dynamics(&cfg)?;
        let threshold = 1.5 * n as f64;
        let worst = (1..=cfg.steps).map(|t| trace.tail_frequency(t, threshold)).fold(0.0, f64::max);
        let bound = 2.0 * theorem1_bounds(n, 0.5, 1.0, BoundDirection::Upper)?.bound;
        reports.push(
            CheckReport::at_most(format!("ttbs-tail/n={n}"), worst, bound)
                .with_detail("max over 100 steps of P[C_t >= 1.5n], 20000 replications"),
        );
    }
    Ok(SuiteOutput::checks(reports))
}

/// R-TBS never realizes more than `n` items.
pub fn hard_bound_suite(seed: u64) -> Result<SuiteOutput> {
    const N: usize = 1000;
    let regimes = [
        ("grow", BatchLaw::Geometric { base: 100.0, factor: 1.002, onset: 200 }, 0.05),
        ("uniform", BatchLaw::Uniform { lo: 0, hi: 200 }, 0.1),
        ("decay", BatchLaw::Geometric { base: 100.0, factor: 0.8, onset: 200 }, 0.01),
    ];
    let mut violations = 0usize;
    let mut steps = 0usize;
    for (i, (_, law, lambda)) in regimes.iter().enumerate() {
        let cfg = DynamicsConfig {
            sampler: SamplerConfig::new(SamplerKind::Rtbs, *lambda, N, 100.0),
            law: *law,
            steps: 1000,
            replications: 334,
            seed: seed ^ (i as u64) << 32,
            initial_size: 0,
        };
        let trace = size_dynamics(&cfg)?;
        violations += trace.sizes.iter().filter(|&&s| s as usize > N).count();
        steps += trace.sizes.len();
    }
    let names: Vec<&str> = regimes.iter().map(|r| r.0).collect();
    Ok(SuiteOutput::checks(vec![CheckReport::at_most("hard-bound/violations", violations as f64, 0.0)
        .with_detail(format!("{steps} realized steps across regimes {}", names.join(", ")))]))
}

/// Growth and decay size trajectories of T-TBS and R-TBS.
pub fn size_traces_suite(seed: u64) -> Result<SuiteOutput> {
    const N: usize = 1000;
    const REPS: usize = 20;
    let run = |kind: SamplerKind, law: BatchLaw, lambda: f64, steps: usize| {
        size_dynamics(&DynamicsConfig {
            sampler: SamplerConfig::new(kind, lambda, N, 100.0),
            law,
            steps,
            replications: REPS,
            seed,
            initial_size: 0,
        })
    };
    let n = N as f64;
    let mut reports = Vec::new();
    let mut artifacts = Vec::new();

    let grow = BatchLaw::Geometric { base: 100.0, factor: 1.002, onset: 0 };
    let (tt, rt) = (run(SamplerKind::Ttbs, grow, 0.05, 400)?, run(SamplerKind::Rtbs, grow, 0.05, 400)?);
    reports.push(CheckReport::at_least("size-traces/grow-ttbs-final", tt.mean(400), 2.0 * n));
    reports.push(CheckReport::at_most("size-traces/grow-rtbs-max", f64::from(rt.max()), n));
    reports.push(CheckReport::at_least("size-traces/grow-rtbs-final", rt.mean(400), n));
    artifacts.push(Artifact {
        name: "trace_grow.csv".into(),
        contents: format!("{TRACE_HEADER}\n{}{}", tt.csv_rows("ttbs", seed), rt.csv_rows("rtbs", seed)),
    });

    let decay = BatchLaw::Geometric { base: 100.0, factor: 0.8, onset: 200 };
    let (tt, rt) = (run(SamplerKind::Ttbs, decay, 0.01, 600)?, run(SamplerKind::Rtbs, decay, 0.01, 600)?);
    for (name, t) in [("ttbs", &tt), ("rtbs", &rt)] {
        let ratio = t.mean(600) / t.mean(200);
        reports.push(
            CheckReport::at_most(format!("size-traces/decay-{name}-shrink"), ratio, 0.5)
                .with_detail("mean size at step 600 over mean size at step 200"),
        );
    }
    artifacts.push(Artifact {
        name: "trace_decay.csv".into(),
        contents: format!("{TRACE_HEADER}\n{}{}", tt.csv_rows("ttbs", seed), rt.csv_rows("rtbs", seed)),
    });
    Ok(SuiteOutput { reports, artifacts })
}

/// B-Chao treats the batches seen before the reservoir fills alike, whatever
/// their age.
pub fn bchao_suite(seed: u64) -> Result<SuiteOutput> {
    const LAMBDA: f64 = 0.1;
    const REPS: u64 = 100_000;
    let stream = numbered_stream(&[30; 10]);
    let factory = || -> Result<Box<dyn TemporalSampler<u64>>> { Ok(Box::new(Bchao::new(LAMBDA, 100)?)) };
    let est = estimate_inclusion(&factory, &stream, REPS, seed, &[stream.len() - 1])?;
    let total = |t: f64| est[0].iter().filter(|e| e.arrival_time == t).map(|e| e.frequency).sum::<f64>();
    let ratio = total(1.0) / total(2.0);
    let ok = (0.95..=1.05).contains(&ratio);
    Ok(SuiteOutput::checks(vec![CheckReport::new("bchao/prefill-ratio", ratio, 1.0, ok).with_detail(format!(
        "batch 1 over batch 2 inclusion, accepted range [0.95, 1.05]; time-biased value would be {:.5}",
        (-LAMBDA).exp()
    ))]))
}

type Outcome = (Vec<Vec<ItemId>>, Option<ItemId>);

fn outcome(r: &PartitionedReservoir) -> Outcome {
    let parts = r
        .partitions()
        .iter()
        .map(|p| {
            let mut p = p.clone();
            p.sort_unstable();
            p
        })
        .collect();
    (parts, r.partial().map(|(id, _)| id))
}

/// Outcome counts of `plans` independent one-step plans from `start`.
fn plan_outcomes(
    start: &PartitionedReservoir,
    batch: &PartitionedBatch,
    n: usize,
    decay: f64,
    distributed: bool,
    plans: u64,
    seed: u64,
) -> Result<BTreeMap<Outcome, u64>> {
    let one = |i: u64| -> Result<Outcome> {
        let step = RandomStream::with_path(seed, &[u64::from(distributed), i]);
        let mut coord = step.substream(u64::MAX).substream(purpose::COORDINATOR);
        let d = decide_step(n, start.weight(), start.total_weight(), decay, batch.len(), &mut coord)?;
        let plan = if distributed {
            let mut workers: Vec<RandomStream> =
                (0..batch.k()).map(|p| step.substream(p as u64).substream(purpose::WORKER)).collect();
            plan_distributed(start, batch, &d, &mut coord, &mut workers)?
        } else {
            plan_centralized(start, batch, &d, &mut coord)?
        };
        let mut r = start.clone();
        apply_plan(&mut r, batch, &plan)?;
        Ok(outcome(&r))
    };
    (0..plans)
        .into_par_iter()
        .try_fold(BTreeMap::new, |mut m, i| {
            *m.entry(one(i)?).or_insert(0) += 1;
            Ok::<_, Error>(m)
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            Ok(a)
        })
}

fn homogeneity(
    name: &str,
    start: &PartitionedReservoir,
    batch: &PartitionedBatch,
    n: usize,
    decay: f64,
    seed: u64,
) -> Result<CheckReport> {
    const PLANS: u64 = 1_000_000;
    let cent = plan_outcomes(start, batch, n, decay, false, PLANS, seed)?;
    let dist = plan_outcomes(start, batch, n, decay, true, PLANS, seed)?;
    let mut keys: Vec<&Outcome> = cent.keys().chain(dist.keys()).collect();
    keys.sort();
    keys.dedup();
    let a: Vec<u64> = keys.iter().map(|k| cent.get(*k).copied().unwrap_or(0)).collect();
    let b: Vec<u64> = keys.iter().map(|k| dist.get(*k).copied().unwrap_or(0)).collect();
    let chi = chi_square_homogeneity(&a, &b)?;
    Ok(CheckReport::at_least(name, chi.p_value, 0.001).with_detail(format!(
        "chi-square {:.3} on {} df over {} outcomes, {PLANS} plans each",
        chi.statistic,
        chi.df,
        keys.len()
    )))
}

/// Centralized and distributed planning give the same outcome law, and the
/// partitioned sampler meets the per-item inclusion target end to end.
pub fn distributed_suite(seed: u64) -> Result<SuiteOutput> {
    let batch = PartitionedBatch::new(1.0, vec![vec![4], vec![5]])?;
    // Saturated: C = n = 4, W' = 4 e^-lambda + 2 = 16/3, so m is 1 or 2.
    let saturated = PartitionedReservoir::from_parts(vec![vec![0, 1], vec![2, 3]], None, 4.0, 4.0)?;
    let mut reports = vec![homogeneity("distributed/saturated", &saturated, &batch, 4, 5.0 / 6.0, seed)?];
    // Unsaturated with a partial item: shrink to 2.45, insert, shrink to 4.
    let partial = PartitionedReservoir::from_parts(vec![vec![0, 1], vec![2]], Some((3, 1)), 3.5, 3.5)?;
    reports.push(homogeneity("distributed/partial", &partial, &batch, 4, 0.7, seed)?);

    let factory = || -> Result<Box<dyn TemporalSampler<u64>>> {
        Ok(Box::new(DistributedRtbs::new(EXACT_LAMBDA, EXACT_N, 2, Strategy::DistCp)?))
    };
    reports.push(per_item_check("distributed/items", &factory, seed)?);
    Ok(SuiteOutput::checks(reports))
}

/// Cross-partition moves of the four update strategies on one workload.
pub fn cost_suite(seed: u64) -> Result<SuiteOutput> {
    const K: usize = 8;
    const STEPS: u64 = 300;
    let law = BatchLaw::Uniform { lo: 0, hi: 200 };
    let mut data = RandomStream::with_path(seed, &[purpose::DATA]);
    let mut next: ItemId = 0;
    let mut batches = Vec::new();
    for t in 1..=STEPS {
        let mut parts = vec![Vec::new(); K];
        for _ in 0..law.size(t, &mut data) {
            parts[data.index(K)].push(next);
            next += 1;
        }
        batches.push(PartitionedBatch::new(t as f64, parts)?);
    }
    let mut totals = Vec::new();
    for s in Strategy::ALL {
        let mut d = DistributedRtbs::new(0.1, 1000, K, s)?;
        for (t, b) in batches.iter().enumerate() {
            d.step(b, &RandomStream::with_path(seed, &[purpose::SAMPLER, t as u64]))?;
        }
        totals.push(*d.ledger());
    }
    let moves = |s: Strategy| -> f64 {
        let i = Strategy::ALL.iter().position(|&x| x == s).expect("listed");
        totals[i].cross_partition_moves as f64
    };
    let (rj, cj, cp, dcp) =
        (moves(Strategy::CentKvRj), moves(Strategy::CentKvCj), moves(Strategy::CentCp), moves(Strategy::DistCp));
    let reduction = (rj - cj) / rj;
    let total: Vec<f64> =
        totals.iter().map(|l| (l.cross_partition_moves + l.coordinator_messages) as f64).collect();
    let strictly_falling = total.windows(2).all(|w| w[0] > w[1]);
    let ledger_detail = |l: &CostLedger| serde_json::to_string(l).expect("ledger serializes");
    Ok(SuiteOutput {
        reports: vec![
            CheckReport::new("cost/rj-over-cj", rj, cj, rj > cj),
            CheckReport::new("cost/cj-over-cp", cj, cp, cj > cp),
            CheckReport::at_least("cost/cp-vs-dist-cp", cp, dcp),
            CheckReport::new("cost/rj-to-cj-reduction", reduction, 0.5, (0.4..=0.6).contains(&reduction))
                .with_detail("accepted range [0.4, 0.6]"),
            CheckReport::new("cost/total-ordering", total[0], total[3], strictly_falling).with_detail(format!(
                "moves plus coordinator messages, cent-kv-rj > cent-kv-cj > cent-cp > dist-cp: {total:?}"
            )),
        ],
        artifacts: vec![Artifact {
            name: "cost_totals.jsonl".into(),
            contents: Strategy::ALL
                .iter()
                .zip(&totals)
                .map(|(s, l)| format!("{{\"strategy\":\"{s}\",\"ledger\":{}}}\n", ledger_detail(l)))
                .collect(),
        }],
    })
}

/// Retraining on R-TBS, sliding-window and uniform samples under periodic drift.
pub fn ml_suite(seed: u64) -> Result<SuiteOutput> {
    let mut reports = Vec::new();
    let mut artifacts = Vec::new();
    for task in [Task::Knn, Task::Regression] {
        let cfg = ExperimentConfig { seed, ..ExperimentConfig::standard(task) };
        let res = run_experiment(&cfg)?;
        let get = |p: Policy| res.summary(p).expect("policy was run").clone();
        let (r, sw, u) = (get(Policy::Rtbs), get(Policy::Sliding), get(Policy::Uniform));
        match task {
            Task::Knn => {
                reports.push(CheckReport::new("ml/knn-mean-rtbs-below-unif", r.mean_error, u.mean_error, r.mean_error < u.mean_error));
                let ratio = sw.expected_shortfall / r.expected_shortfall;
                reports.push(CheckReport::at_least("ml/knn-es-sw-over-rtbs", ratio, 1.3));
            }
            Task::Regression => {
                let es = r.expected_shortfall;
                reports.push(CheckReport::new("ml/mse-es-rtbs-below-sw", es, sw.expected_shortfall, es < sw.expected_shortfall));
                reports.push(CheckReport::new("ml/mse-es-rtbs-below-unif", es, u.expected_shortfall, es < u.expected_shortfall));
            }
        }
        artifacts.push(Artifact {
            name: format!("ml_{}_summary.json", cfg.task.metric()),
            contents: serde_json::to_string(&res.summaries).expect("summaries serialize") + "\n",
        });
    }
    Ok(SuiteOutput { reports, artifacts })
}
