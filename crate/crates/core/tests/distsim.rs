//! Partitioned R-TBS: layout invariants, plan replay and the cost model.

use proptest::prelude::*;
use tbs_core::distsim::{
    apply_plan, plan_centralized, plan_cost, plan_distributed, DistributedRtbs, PartitionedBatch,
    PartitionedReservoir, PlanOp, Strategy, UpdatePlan,
};
use tbs_core::randkit::purpose;
use tbs_core::rtbs::decide_step;
use tbs_core::{Batch, RandomStream, Rtbs, TemporalSampler};

fn workload(k: usize, sizes: &[usize]) -> Vec<PartitionedBatch> {
    let mut next = 0u64;
    sizes
        .iter()
        .enumerate()
        .map(|(t, &b)| {
            let items = (next..next + b as u64).collect();
            next += b as u64;
            PartitionedBatch::round_robin(Batch::new((t + 1) as f64, items), k).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_strategy_keeps_the_layout_consistent(
        k in 1usize..6,
        n in 1usize..30,
        lambda in 0.0f64..1.0,
        sizes in prop::collection::vec(0usize..40, 1..25),
        seed in any::<u64>(),
    ) {
        for s in Strategy::ALL {
            let mut d = DistributedRtbs::new(lambda, n, k, s).unwrap();
            for (t, b) in workload(k, &sizes).iter().enumerate() {
                d.step(b, &RandomStream::with_path(seed, &[t as u64])).unwrap();
                let r = d.reservoir();
                prop_assert!(r.is_consistent());
                prop_assert_eq!(r.sizes().iter().sum::<u64>() as f64, r.weight().floor());
                prop_assert!(r.full_len() <= n);
                let mut ids = r.flatten();
                let len = ids.len();
                ids.sort_unstable();
                ids.dedup();
                prop_assert_eq!(ids.len(), len);
            }
        }
    }
}

#[test]
fn single_partition_matches_single_node_sampler() {
    let sizes = [5, 0, 9, 3, 12, 1, 7, 7, 2, 15, 4, 0, 6];
    let mut single: Rtbs<u64> = Rtbs::new(0.25, 8).unwrap();
    let mut d = DistributedRtbs::new(0.25, 8, 1, Strategy::CentCp).unwrap();
    for (t, b) in workload(1, &sizes).iter().enumerate() {
        let stream = RandomStream::with_path(3, &[t as u64]);
        d.step(b, &stream).unwrap();
        let mut coord = stream.substream(u64::MAX).substream(purpose::COORDINATOR);
        single.step(Batch::new(b.time, b.partitions()[0].clone()), &mut coord).unwrap();
        let mut a = d.reservoir().flatten();
        let mut s: Vec<u64> = single.latent().full().to_vec();
        a.sort_unstable();
        s.sort_unstable();
        assert_eq!(a, s, "step {t}");
        assert_eq!(d.reservoir().partial().map(|p| p.0), single.latent().partial().copied());
    }
}

#[test]
fn kv_store_sends_at_least_as_many_messages() {
    let k = 4;
    let batches = workload(k, &[30, 10, 50, 0, 25, 40, 5, 60, 20, 35]);
    let mut d = DistributedRtbs::new(0.2, 40, k, Strategy::CentCp).unwrap();
    let mut seen_nonempty = 0;
    for (t, b) in batches.iter().enumerate() {
        let stream = RandomStream::with_path(4, &[t as u64]);
        let mut coord = stream.substream(u64::MAX).substream(purpose::COORDINATOR);
        let r = d.reservoir().clone();
        let decay = if t == 0 { 1.0 } else { (-0.2f64).exp() };
        let dec = decide_step(40, r.weight(), r.total_weight(), decay, b.len(), &mut coord).unwrap();
        let plan = plan_centralized(&r, b, &dec, &mut coord).unwrap();
        if !plan.is_empty() {
            seen_nonempty += 1;
            let kv = plan_cost(&plan, b, Strategy::CentKvCj, k);
            let cp = plan_cost(&plan, b, Strategy::CentCp, k);
            let rj = plan_cost(&plan, b, Strategy::CentKvRj, k);
            assert!(kv.coordinator_messages >= cp.coordinator_messages);
            assert_eq!(kv.retrieval_moves, 0);
            assert_eq!(cp.cross_partition_moves, 0);
            if plan.ops.iter().any(|op| matches!(op, PlanOp::Insert { .. })) {
                assert!(rj.cross_partition_moves > 0, "step {t}");
            }
        }
        d.step(b, &stream).unwrap();
    }
    assert!(seen_nonempty > 5);
}

#[test]
fn distributed_plan_splits_counts_across_workers() {
    let start = PartitionedReservoir::from_parts(vec![vec![0, 1, 2], vec![3, 4], vec![5]], None, 6.0, 6.0).unwrap();
    let batch = PartitionedBatch::new(1.0, vec![vec![10, 11], vec![12], vec![13, 14]]).unwrap();
    let stream = RandomStream::new(5);
    let mut coord = stream.substream(u64::MAX).substream(purpose::COORDINATOR);
    let dec = decide_step(6, 6.0, 6.0, 0.5, batch.len(), &mut coord).unwrap();
    let mut workers: Vec<RandomStream> = (0..3).map(|p| stream.substream(p).substream(purpose::WORKER)).collect();
    let plan = plan_distributed(&start, &batch, &dec, &mut coord, &mut workers).unwrap();
    assert!(!plan.centralized);
    assert!(plan.count_messages > 0 && plan.count_messages.is_multiple_of(3));
    let mut r = start.clone();
    apply_plan(&mut r, &batch, &plan).unwrap();
    assert!(r.is_consistent());
}

#[test]
fn rejected_plan_leaves_reservoir_unchanged() {
    let start = PartitionedReservoir::from_parts(vec![vec![0, 1], vec![2, 3]], None, 4.0, 4.0).unwrap();
    let batch = PartitionedBatch::new(1.0, vec![vec![4], vec![5]]).unwrap();
    let bad = UpdatePlan {
        ops: vec![PlanOp::Delete { partition: 0, position: 0, item: 0 }, PlanOp::Delete { partition: 1, position: 0, item: 99 }],
        weight: 2.0,
        total_weight: 4.0,
        centralized: true,
        count_messages: 0,
    };
    let mut r = start.clone();
    assert!(apply_plan(&mut r, &batch, &bad).is_err());
    assert_eq!(r.flatten(), start.flatten());
    assert_eq!(r.weight(), start.weight());
}

#[test]
fn sampler_interface_realizes_at_most_n() {
    let mut d = DistributedRtbs::new(0.1, 20, 3, Strategy::DistCp).unwrap();
    let mut rng = RandomStream::new(6);
    let mut realize = RandomStream::new(7);
    for (t, b) in [30usize, 2, 17, 40, 0, 9].iter().enumerate() {
        let start = t as u64 * 100;
        d.observe(Batch::new((t + 1) as f64, (start..start + *b as u64).collect()), &mut rng).unwrap();
        assert!(d.realize(&mut realize).len() <= 20);
    }
    assert_eq!(d.name(), "d-rtbs");
    assert!(d.analytic_inclusion(6.0, 6.0).is_some());
}

#[test]
fn mismatched_partition_count_is_an_error() {
    let mut d = DistributedRtbs::new(0.1, 5, 2, Strategy::CentKvRj).unwrap();
    let b = PartitionedBatch::new(1.0, vec![vec![1], vec![2], vec![3]]).unwrap();
    assert!(d.step(&b, &RandomStream::new(0)).is_err());
}
