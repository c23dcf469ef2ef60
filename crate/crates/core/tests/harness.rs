//! The verification harness checked against known answers.

use tbs_core::batch::numbered_stream;
use tbs_core::harness::stats::binomial_std_error;
use tbs_core::harness::{check_ratio, estimate_inclusion, run_suite, size_dynamics, BatchLaw, DynamicsConfig};
use tbs_core::randkit::RandomSource;
use tbs_core::samplers::{Btbs, SamplerConfig, SamplerKind};
use tbs_core::{RandomStream, Result, TemporalSampler};

#[test]
fn three_sigma_intervals_cover_a_bernoulli_oracle() {
    let (p, reps, trials) = (0.3, 10_000u64, 1000);
    let mut rng = RandomStream::new(41);
    let covered = (0..trials)
        .filter(|_| {
            let f = (0..reps).filter(|_| rng.bernoulli(p)).count() as f64 / reps as f64;
            (f - p).abs() <= 3.0 * binomial_std_error(f, reps)
        })
        .count();
    assert!(covered as f64 >= 0.99 * trials as f64, "{covered}");
}

#[test]
fn btbs_long_run_ratios() {
    let lambda = 0.07;
    let stream = numbered_stream(&[10; 30]);
    let factory = move || -> Result<Box<dyn TemporalSampler<u64>>> { Ok(Box::new(Btbs::new(lambda)?)) };
    let est = estimate_inclusion(&factory, &stream, 50_000, 42, &[29]).unwrap();
    let r = check_ratio(&est[0], lambda, &[0.0, 1.0, 5.0, 10.0]).unwrap();
    assert!(r.pass_fraction() >= 0.99, "{}", r.pass_fraction());
    for e in &est[0] {
        assert!((e.analytic.unwrap() - (-lambda * (30.0 - e.arrival_time)).exp()).abs() < 1e-12);
    }
}

fn trace(kind: SamplerKind, law: BatchLaw, lambda: f64, steps: usize, reps: usize) -> tbs_core::harness::SizeTrace {
    size_dynamics(&DynamicsConfig {
        sampler: SamplerConfig::new(kind, lambda, 1000, 100.0),
        law,
        steps,
        replications: reps,
        seed: 43,
        initial_size: 0,
    })
    .unwrap()
}

#[test]
fn uniform_batches_spread_ttbs_more_than_rtbs() {
    let law = BatchLaw::Uniform { lo: 0, hi: 200 };
    let (tt, rt) = (trace(SamplerKind::Ttbs, law, 0.1, 200, 200), trace(SamplerKind::Rtbs, law, 0.1, 200, 200));
    for step in [100, 150, 200] {
        assert!(tt.variance(step) > rt.variance(step), "step {step}");
    }
}

#[test]
fn growth_overflows_ttbs_but_not_rtbs() {
    let law = BatchLaw::Geometric { base: 100.0, factor: 1.002, onset: 200 };
    let (tt, rt) = (trace(SamplerKind::Ttbs, law, 0.05, 600, 10), trace(SamplerKind::Rtbs, law, 0.05, 600, 10));
    assert!(tt.mean(600) > 1500.0, "{}", tt.mean(600));
    assert!(rt.max() <= 1000);
}

#[test]
fn suites_report_in_jsonl() {
    let out = run_suite("downsample", 1).unwrap();
    assert!(out.passed());
    for r in &out.reports {
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert!(v.get("name").is_some() && v.get("statistic").is_some() && v.get("pass").is_some());
    }
}
