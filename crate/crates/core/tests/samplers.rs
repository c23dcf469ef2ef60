//! Behavioural and Monte Carlo checks of the baseline samplers.

use std::collections::HashMap;

use tbs_core::batch::numbered_stream;
use tbs_core::harness::stats::binomial_std_error;
use tbs_core::harness::{chi_square_gof, estimate_inclusion, size_dynamics, BatchLaw, DynamicsConfig};
use tbs_core::samplers::{
    theorem1_bounds, ttbs_expected_size, Bchao, BoundDirection, Brs, Btbs, SamplerConfig, SamplerKind, SlidingWindow,
    Ttbs,
};
use tbs_core::{Batch, RandomStream, Result, TemporalSampler};

fn close(freq: f64, want: f64, reps: u64) -> bool {
    (freq - want).abs() <= 3.0 * binomial_std_error(freq, reps) + 1e-12
}

#[test]
fn btbs_item_forty_batches_later() {
    let lambda = 0.058;
    let mut stream = vec![Batch::new(0.0, vec![0u64])];
    stream.extend((1..=40).map(|t| Batch::new(t as f64, vec![])));
    let factory = move || -> Result<Box<dyn TemporalSampler<u64>>> { Ok(Box::new(Btbs::new(lambda)?)) };
    let est = estimate_inclusion(&factory, &stream, 100_000, 11, &[40]).unwrap();
    let e = &est[0][0];
    assert!((e.analytic.unwrap() - (-2.32f64).exp()).abs() < 1e-12);
    assert!(e.within(3.0).unwrap(), "{e:?}");
}

#[test]
fn btbs_size_decays_at_rate_lambda() {
    let lambda = 0.1;
    let reps = 200;
    let steps = 20;
    let mut mean = vec![0.0; steps + 1];
    for rep in 0..reps {
        let mut s = Btbs::with_initial(lambda, (0..1000u64).collect(), 0.0).unwrap();
        let mut rng = RandomStream::with_path(12, &[rep]);
        mean[0] += 1000.0;
        for (t, m) in mean.iter_mut().enumerate().skip(1) {
            s.observe(Batch::new(t as f64, vec![]), &mut rng).unwrap();
            *m += s.realize(&mut rng).len() as f64;
        }
    }
    // Least-squares slope of log mean size against time.
    let pts: Vec<(f64, f64)> = mean.iter().enumerate().map(|(t, m)| (t as f64, (m / reps as f64).ln())).collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + lambda).abs() <= 0.05 * lambda, "slope {slope}");
}

#[test]
fn brs_keeps_everything_below_capacity() {
    let mut s = Brs::new(10).unwrap();
    let mut rng = RandomStream::new(0);
    for b in numbered_stream(&[3, 4, 2]) {
        s.observe(b, &mut rng).unwrap();
    }
    let mut got: Vec<u64> = s.realize(&mut rng).into_iter().copied().collect();
    got.sort();
    assert_eq!(got, (0..9).collect::<Vec<_>>());
}

#[test]
fn brs_two_of_four_is_uniform() {
    let reps = 100_000u64;
    let mut subsets: HashMap<(u64, u64), u64> = HashMap::new();
    let mut per_item = [0u64; 4];
    for rep in 0..reps {
        let mut s = Brs::new(2).unwrap();
        let mut rng = RandomStream::with_path(13, &[rep]);
        for b in numbered_stream(&[1, 1, 1, 1]) {
            s.observe(b, &mut rng).unwrap();
        }
        let mut got: Vec<u64> = s.realize(&mut rng).into_iter().copied().collect();
        got.sort();
        per_item.iter_mut().enumerate().for_each(|(i, c)| *c += u64::from(got.contains(&(i as u64))));
        *subsets.entry((got[0], got[1])).or_insert(0) += 1;
    }
    for c in per_item {
        assert!(close(c as f64 / reps as f64, 0.5, reps), "{per_item:?}");
    }
    assert_eq!(subsets.len(), 6);
    let counts: Vec<u64> = subsets.values().copied().collect();
    let chi = chi_square_gof(&counts, &[1.0 / 6.0; 6]).unwrap();
    assert!(chi.p_value > 0.001, "{chi:?}");
}

#[test]
fn ttbs_mean_from_empty_at_step_ten() {
    let cfg = DynamicsConfig {
        sampler: SamplerConfig::new(SamplerKind::Ttbs, 0.1, 100, 100.0),
        law: BatchLaw::Deterministic(100),
        steps: 10,
        replications: 10_000,
        seed: 14,
        initial_size: 0,
    };
    let t = size_dynamics(&cfg).unwrap();
    let want = ttbs_expected_size(100.0, 0.1, 0.0, 10);
    assert!((want - 63.212).abs() < 1e-3);
    assert!((t.mean(10) - want).abs() <= 3.0 * t.std_error(10), "{} vs {want}", t.mean(10));
}

#[test]
fn ttbs_time_average_tracks_target() {
    let cfg = DynamicsConfig {
        sampler: SamplerConfig::new(SamplerKind::Ttbs, 0.05, 1000, 100.0),
        law: BatchLaw::Uniform { lo: 50, hi: 150 },
        steps: 2000,
        replications: 10,
        seed: 15,
        initial_size: 1000,
    };
    let avg = size_dynamics(&cfg).unwrap().time_average(1);
    assert!((avg - 1000.0).abs() <= 10.0, "{avg}");
}

#[test]
fn ttbs_rejects_infeasible_target() {
    assert!(Ttbs::<u64>::new(0.5, 1000, 10.0).is_err());
}

#[test]
fn bchao_accepts_everything_while_filling() {
    let mut s = Bchao::new(0.3, 50).unwrap();
    let mut rng = RandomStream::new(16);
    for b in numbered_stream(&[10, 20, 15]) {
        s.observe(b, &mut rng).unwrap();
        let mut got: Vec<u64> = s.realize(&mut rng).into_iter().copied().collect();
        got.sort();
        let seen = got.len() as u64;
        assert_eq!(got, (0..seen).collect::<Vec<_>>());
    }
    assert_eq!(s.len(), 45);
}

#[test]
fn bchao_without_decay_is_a_uniform_reservoir() {
    let reps = 100_000;
    let stream = numbered_stream(&[4, 4, 4, 4, 4]);
    let factory = || -> Result<Box<dyn TemporalSampler<u64>>> { Ok(Box::new(Bchao::new(0.0, 5)?)) };
    let est = estimate_inclusion(&factory, &stream, reps, 17, &[4]).unwrap();
    let ok = est[0].iter().filter(|e| close(e.frequency, 5.0 / 20.0, reps)).count();
    assert!(ok as f64 >= 0.99 * est[0].len() as f64, "{:?}", est[0]);
}

#[test]
fn sliding_window_examples() {
    let mut rng = RandomStream::new(0);
    let mut s = SlidingWindow::new(5).unwrap();
    s.observe(Batch::new(1.0, vec![1, 2, 3]), &mut rng).unwrap();
    assert_eq!(s.realize(&mut rng), vec![&1, &2, &3]);
    s.observe(Batch::new(2.0, (10..20).collect()), &mut rng).unwrap();
    assert_eq!(s.realize(&mut rng), vec![&15, &16, &17, &18, &19]);
}

#[test]
fn tail_bound_limits() {
    let b = theorem1_bounds(100, 1e-9, 1.0, BoundDirection::Upper).unwrap();
    assert!(b.nu < 1e-12 && (b.bound - 1.0).abs() < 1e-9);
    let l = theorem1_bounds(1, 0.5, 1.0, BoundDirection::Lower).unwrap();
    assert!((l.nu - 0.153_426).abs() < 1e-6);
}

#[test]
fn stale_timestamps_rejected_by_every_sampler() {
    for kind in SamplerKind::ALL {
        let mut s = SamplerConfig::new(kind, 0.1, 10, 5.0).build::<u64>().unwrap();
        let mut rng = RandomStream::new(0);
        s.observe(Batch::new(2.0, vec![1]), &mut rng).unwrap();
        assert!(s.observe(Batch::new(2.0, vec![2]), &mut rng).is_err(), "{kind}");
        assert!(s.observe(Batch::new(1.0, vec![3]), &mut rng).is_err(), "{kind}");
    }
}
