//! One function per subcommand. Each builds its table, echoes its
//! configuration and writes the result.

use std::time::Instant;

use anyhow::{bail, Result};
use serde_json::{json, Value};
use tbs_core::distsim::{DistributedRtbs, PartitionedBatch, Strategy};
use tbs_core::harness::{
    downsample_oracle, enumerate_downsample, parse_rational, ratio_f64, run_suite, size_dynamics, BatchLaw,
    DynamicsConfig, SUITES,
};
use tbs_core::harness::stats::binomial_std_error;
use tbs_core::mlapps::{run_experiment, ExperimentConfig, ModeSchedule, Pattern, Policy, Task};
use tbs_core::randkit::{purpose, RandomStream};
use tbs_core::rtbs::{downsample, frc, LatentSample};
use tbs_core::{Batch, Error, SamplerConfig, SamplerKind};

use crate::output::{emit, render, Table};
use crate::{
    BenchArgs, DistsimArgs, DownsampleArgs, Globals, MlArgs, Outcome, SimulateArgs, VerifyArgs,
};

fn kinds(list: &str) -> Result<Vec<SamplerKind>> {
    list.split(',').map(|s| s.trim().parse::<SamplerKind>().map_err(Into::into)).collect()
}

fn write(g: &Globals, config: Value, table: &Table) -> Result<()> {
    emit(g.out.as_deref(), &render(&config, table, g.format))
}

/// Human-readable lines go to standard output unless it carries the data.
fn note(g: &Globals, line: &str) {
    if g.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

pub fn simulate(g: &Globals, a: &SimulateArgs) -> Result<Outcome> {
    let law = BatchLaw::parse(&a.batch, a.base)?;
    let mut table = Table::new(&["step", "algo", "sample_size", "total_weight", "seed"]);
    let algos = kinds(&a.algo)?;
    for kind in &algos {
        let cfg = DynamicsConfig {
            sampler: SamplerConfig::new(*kind, a.lambda, a.n, law.mean_hint()),
            law,
            steps: a.steps,
            replications: a.reps,
            seed: g.seed,
            initial_size: a.initial,
        };
        let trace = size_dynamics(&cfg)?;
        for t in 1..=a.steps {
            table.push(vec![
                json!(t),
                json!(kind.as_str()),
                json!(trace.mean(t)),
                json!(trace.mean_total_weight(t)),
                json!(g.seed),
            ]);
        }
    }
    let config = json!({
        "command": "simulate",
        "algo": algos.iter().map(|k| k.as_str()).collect::<Vec<_>>(),
        "batch": law.to_string(),
        "steps": a.steps,
        "lambda": a.lambda,
        "n": a.n,
        "reps": a.reps,
        "initial": a.initial,
        "seed": g.seed,
    });
    write(g, config, &table)?;
    Ok(Outcome::Ok)
}

pub fn verify(g: &Globals, a: &VerifyArgs) -> Result<Outcome> {
    let names: Vec<&str> = if a.suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&a.suite.as_str()) {
        vec![a.suite.as_str()]
    } else {
        return Err(Error::InvalidParameter(format!("unknown suite '{}' (known: all, {})", a.suite, SUITES.join(", "))).into());
    };
    let mut table = Table::new(&["suite", "name", "statistic", "bound", "pass", "detail"]);
    let mut all_pass = true;
    for name in &names {
        let out = run_suite(name, g.seed)?;
        for r in &out.reports {
            note(g, &r.to_string());
            table.push(vec![json!(name), json!(r.name), json!(r.statistic), json!(r.bound), json!(r.pass), json!(r.detail)]);
        }
        if let Some(dir) = &a.artifacts {
            std::fs::create_dir_all(dir)?;
            for art in &out.artifacts {
                std::fs::write(dir.join(&art.name), &art.contents)?;
            }
        }
        all_pass &= out.passed();
    }
    write(g, json!({ "command": "verify", "suites": names, "seed": g.seed }), &table)?;
    Ok(if all_pass { Outcome::Ok } else { Outcome::ChecksFailed })
}

pub fn distsim(g: &Globals, a: &DistsimArgs) -> Result<Outcome> {
    let law: BatchLaw = a.batch_gen.parse()?;
    let strategies: Vec<Strategy> =
        if a.strategy == "all" { Strategy::ALL.to_vec() } else { vec![a.strategy.parse()?] };
    let sizes = tbs_core::harness::batch_sizes(&law, a.steps as u64, g.seed, 0);
    let mut next = 0u64;
    let batches = sizes
        .iter()
        .enumerate()
        .map(|(t, &b)| {
            let items = (next..next + b as u64).collect();
            next += b as u64;
            PartitionedBatch::round_robin(Batch::new((t + 1) as f64, items), a.partitions)
        })
        .collect::<tbs_core::Result<Vec<_>>>()?;
    let mut table = Table::new(&[
        "step",
        "strategy",
        "batch_size",
        "sample_weight",
        "cross_partition_moves",
        "retrieval_moves",
        "coordinator_messages",
        "slot_numbers_generated_centrally",
    ]);
    for s in &strategies {
        let mut d = DistributedRtbs::new(a.lambda, a.n, a.partitions, *s)?;
        for (t, b) in batches.iter().enumerate() {
            let c = d.step(b, &RandomStream::with_path(g.seed, &[purpose::SAMPLER, t as u64]))?;
            table.push(vec![
                json!(t + 1),
                json!(s.as_str()),
                json!(b.len()),
                json!(d.reservoir().weight()),
                json!(c.cross_partition_moves),
                json!(c.retrieval_moves),
                json!(c.coordinator_messages),
                json!(c.slot_numbers_generated_centrally),
            ]);
        }
        let l = d.ledger();
        note(g, &format!("{s}: {} cross-partition moves, {} coordinator messages", l.cross_partition_moves, l.coordinator_messages));
    }
    let config = json!({
        "command": "distsim",
        "partitions": a.partitions,
        "strategy": strategies.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
        "steps": a.steps,
        "batch_gen": law.to_string(),
        "lambda": a.lambda,
        "n": a.n,
        "seed": g.seed,
    });
    write(g, config, &table)?;
    Ok(Outcome::Ok)
}

pub fn ml(g: &Globals, a: &MlArgs) -> Result<Outcome> {
    let task: Task = a.task.parse()?;
    let policies: Vec<Policy> = if a.policy == "all" {
        Policy::ALL.to_vec()
    } else {
        a.policy.split(',').map(|p| p.trim().parse()).collect::<tbs_core::Result<_>>()?
    };
    let pattern: Pattern = a.pattern.parse()?;
    let cfg = ExperimentConfig {
        task,
        schedule: ModeSchedule { pattern, warmup_batches: a.warmup },
        law: a.batch.parse()?,
        lambda: a.lambda,
        n: a.n,
        scoring_steps: a.steps,
        replications: a.reps,
        seed: g.seed,
        policies,
        ..ExperimentConfig::standard(task)
    };
    let res = run_experiment(&cfg)?;
    let mut table = Table::new(&["rep", "step", "policy", "metric", "value"]);
    for r in &res.rows {
        table.push(vec![json!(r.rep), json!(r.step), json!(r.policy.as_str()), json!(r.metric), json!(r.value)]);
    }
    for s in &res.summaries {
        note(g, &format!("{}: mean {} {:.4}, {}% ES {:.4}", s.policy, task.metric(), s.mean_error, cfg.shortfall_level, s.expected_shortfall));
    }
    let config = json!({
        "command": "ml",
        "task": task.metric(),
        "policy": cfg.policies.iter().map(|p| p.as_str()).collect::<Vec<_>>(),
        "lambda": a.lambda,
        "n": a.n,
        "pattern": pattern.to_string(),
        "batch": cfg.law.to_string(),
        "reps": a.reps,
        "steps": a.steps,
        "warmup": a.warmup,
        "seed": g.seed,
    });
    write(g, config, &table)?;
    Ok(Outcome::Ok)
}

pub fn downsample_check(g: &Globals, a: &DownsampleArgs) -> Result<Outcome> {
    let (from, to) = (parse_rational(&a.from)?, parse_rational(&a.to)?);
    let exact = downsample_oracle(from, to)?;
    let (cf, ct) = (ratio_f64(from), ratio_f64(to));
    let (enumerated, mass) = enumerate_downsample(cf, ct)?;
    let k = cf.floor() as u64;
    let has_partial = frc(cf) > 0.0;
    let mut hits = vec![0u64; enumerated.len()];
    for rep in 0..a.reps {
        let mut rng = RandomStream::with_path(g.seed, &[rep, purpose::SAMPLER]);
        let mut latent = LatentSample::new((0..k).collect(), has_partial.then_some(k), cf)?;
        downsample(&mut latent, ct, &mut rng)?;
        for &i in latent.realize(&mut rng) {
            hits[i as usize] += 1;
        }
    }
    let mut table = Table::new(&["item", "role", "exact", "enumerated", "monte_carlo", "std_error", "pass"]);
    let mut ok = (mass - 1.0).abs() <= 1e-12;
    for (i, &p) in enumerated.iter().enumerate() {
        let (role, want) = if (i as u64) < k { ("full", exact.full) } else { ("partial", exact.partial.expect("partial present")) };
        let want = ratio_f64(want);
        let pass = (p - want).abs() <= 1e-12;
        ok &= pass;
        let f = hits[i] as f64 / a.reps as f64;
        table.push(vec![json!(i), json!(role), json!(want), json!(p), json!(f), json!(binomial_std_error(f, a.reps)), json!(pass)]);
    }
    note(g, &format!("[{}] enumerated downsampling matches the exact oracle to 1e-12", if ok { "PASS" } else { "FAIL" }));
    let config = json!({ "command": "downsample-check", "from": a.from, "to": a.to, "reps": a.reps, "seed": g.seed });
    write(g, config, &table)?;
    Ok(if ok { Outcome::Ok } else { Outcome::ChecksFailed })
}

pub fn bench(g: &Globals, a: &BenchArgs) -> Result<Outcome> {
    let law: BatchLaw = a.batch.parse()?;
    if a.steps == 0 {
        bail!(Error::InvalidParameter("bench needs at least one step".into()));
    }
    let sizes = tbs_core::harness::batch_sizes(&law, a.steps as u64, g.seed, 0);
    let items: u64 = sizes.iter().map(|&b| b as u64).sum();
    let mut table = Table::new(&["algo", "n", "steps", "items", "seconds", "items_per_sec"]);
    for kind in kinds(&a.algo)? {
        let mut s = SamplerConfig::new(kind, a.lambda, a.n, law.mean_hint()).build::<u64>()?;
        let mut rng = RandomStream::with_path(g.seed, &[purpose::SAMPLER]);
        let mut next = 0u64;
        let start = Instant::now();
        for (t, &b) in sizes.iter().enumerate() {
            s.observe(Batch::new((t + 1) as f64, (next..next + b as u64).collect()), &mut rng)?;
            next += b as u64;
        }
        let secs = start.elapsed().as_secs_f64();
        table.push(vec![json!(kind.as_str()), json!(a.n), json!(a.steps), json!(items), json!(secs), json!(items as f64 / secs)]);
    }
    let config = json!({ "command": "bench", "algo": a.algo, "n": a.n, "batch": law.to_string(), "steps": a.steps, "lambda": a.lambda, "seed": g.seed });
    write(g, config, &table)?;
    Ok(Outcome::Ok)
}
