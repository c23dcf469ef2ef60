//! Network cost model for the four update strategies.
//!
//! Weights are a declared model, one unit per event:
//! - every centrally chosen slot number (victim, demotion, insert) costs one
//!   coordinator message;
//! - the distributed strategy instead sends one count message per partition
//!   for each count vector it splits;
//! - in the key-value variants every put or delete is one more message, the
//!   store places key `x` on partition `hash(x) mod k`, and an item counts as
//!   a cross-partition move whenever it has to travel to a different
//!   partition (retrieval for the join, then the write into the store);
//! - co-partitioned variants move nothing, since inserts and the partial item
//!   stay in the partition that holds them.

use std::ops::{Add, AddAssign};

use serde::Serialize;

use super::{ItemId, PartitionedBatch, PlanOp, Strategy, UpdatePlan};
use crate::randkit::hash64;
use crate::rtbs::PartialFate;

/// Store key under which the partial item is kept.
const PARTIAL_KEY: u64 = 0x5041_5254_4941_4C00;
/// Salt for hash-partitioning the insert-slot list in the repartition join.
const JOIN_SALT: u64 = 0x4A4F_494E;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CostLedger {
    pub cross_partition_moves: u64,
    /// Share of `cross_partition_moves` spent fetching insert items for the
    /// join, before writing them.
    pub retrieval_moves: u64,
    pub coordinator_messages: u64,
    pub slot_numbers_generated_centrally: u64,
}

impl AddAssign for CostLedger {
    fn add_assign(&mut self, o: Self) {
        self.cross_partition_moves += o.cross_partition_moves;
        self.retrieval_moves += o.retrieval_moves;
        self.coordinator_messages += o.coordinator_messages;
        self.slot_numbers_generated_centrally += o.slot_numbers_generated_centrally;
    }
}

impl Add for CostLedger {
    type Output = Self;

    fn add(mut self, o: Self) -> Self {
        self += o;
        self
    }
}

fn store_partition(key: u64, k: usize) -> usize {
    (hash64(key) % k as u64) as usize
}

/// Cost of carrying out `plan` under `strategy` on `k` partitions.
pub fn plan_cost(plan: &UpdatePlan, batch: &PartitionedBatch, strategy: Strategy, k: usize) -> CostLedger {
    let mut c = CostLedger::default();
    if strategy.is_centralized() {
        let chosen = plan
            .ops
            .iter()
            .filter(|op| matches!(op, PlanOp::Delete { .. } | PlanOp::Demote { .. } | PlanOp::Insert { .. }))
            .count() as u64;
        c.slot_numbers_generated_centrally += chosen;
        c.coordinator_messages += chosen;
    } else {
        c.coordinator_messages += plan.count_messages;
    }
    if !strategy.uses_kv_store() {
        return c;
    }

    let partial_home = store_partition(PARTIAL_KEY, k);
    fn moved(from: usize, to: usize, c: &mut CostLedger) {
        if from != to {
            c.cross_partition_moves += 1;
        }
    }
    for op in &plan.ops {
        match *op {
            PlanOp::Delete { .. } | PlanOp::DropPartial { .. } => c.coordinator_messages += 1,
            PlanOp::Demote { item, previous, displaced, .. } => {
                moved(store_partition(item, k), partial_home, &mut c);
                c.coordinator_messages += 2;
                if let Some(old) = displaced {
                    if previous == PartialFate::Promote {
                        moved(partial_home, store_partition(old, k), &mut c);
                    }
                    c.coordinator_messages += 1;
                }
            }
            PlanOp::PromotePartial { item } => {
                moved(partial_home, store_partition(item, k), &mut c);
                c.coordinator_messages += 1;
            }
            PlanOp::Insert { slot, partition, position } => {
                let item: ItemId = batch.partitions()[partition][position];
                let source = if strategy == Strategy::CentKvRj {
                    let joined_at = store_partition(slot as u64 ^ JOIN_SALT, k);
                    if joined_at != partition {
                        c.retrieval_moves += 1;
                    }
                    moved(partition, joined_at, &mut c);
                    joined_at
                } else {
                    partition
                };
                moved(source, store_partition(item, k), &mut c);
                c.coordinator_messages += 1;
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::batch::Batch;

    fn insert_plan(batch: &PartitionedBatch) -> UpdatePlan {
        let ops = (0..batch.len())
            .map(|slot| {
                let (partition, position) = batch.slot(slot).unwrap();
                PlanOp::Insert { slot, partition, position }
            })
            .collect();
        UpdatePlan { ops, weight: batch.len() as f64, total_weight: batch.len() as f64, centralized: true, count_messages: 0 }
    }

    #[test]
    fn empty_plan_costs_nothing() {
        let batch = PartitionedBatch::new(0.0, vec![vec![], vec![]]).unwrap();
        let plan = UpdatePlan { ops: vec![], weight: 0.0, total_weight: 0.0, centralized: true, count_messages: 0 };
        for s in Strategy::ALL {
            assert_eq!(plan_cost(&plan, &batch, s, 2), CostLedger::default());
        }
    }

    #[test]
    fn colocated_join_never_moves_for_retrieval() {
        let batch = PartitionedBatch::round_robin(Batch::new(0.0, (0..300).collect()), 3).unwrap();
        let plan = insert_plan(&batch);
        let cj = plan_cost(&plan, &batch, Strategy::CentKvCj, 3);
        let rj = plan_cost(&plan, &batch, Strategy::CentKvRj, 3);
        assert_eq!(cj.retrieval_moves, 0);
        assert!(rj.retrieval_moves > 0);
        assert!(rj.cross_partition_moves > cj.cross_partition_moves);
        assert_eq!(plan_cost(&plan, &batch, Strategy::CentCp, 3).cross_partition_moves, 0);
    }

    #[test]
    fn ledger_adds() {
        let a = CostLedger { cross_partition_moves: 1, retrieval_moves: 0, coordinator_messages: 2, slot_numbers_generated_centrally: 3 };
        assert_eq!((a + a).coordinator_messages, 4);
    }
}
