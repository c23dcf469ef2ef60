//! Turning a step decision into concrete per-partition edits.
//!
//! Both planners walk the phases of a [`StepDecision`] against a scratch copy
//! of the reservoir and record every edit as a [`PlanOp`]. Positions are
//! relative to the state after all earlier ops, so [`apply_plan`] can replay
//! them in order with `swap_remove`/`push` and land on exactly the planned
//! layout.

use super::{ItemId, PartitionedBatch, PartitionedReservoir};
use crate::error::{Error, Result};
use crate::randkit::{multivariate_hypergeometric, sample_indices, RandomSource};
use crate::rtbs::{DownsampleEdit, PartialFate, Phase, StepDecision};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanOp {
    /// Remove the full item `item` found at `position` of `partition`.
    Delete { partition: usize, position: usize, item: ItemId },
    /// Remove the full item at `position` and make it the partial item. The
    /// previous partial item, `displaced`, is dropped or promoted per
    /// `previous`.
    Demote { partition: usize, position: usize, item: ItemId, previous: PartialFate, displaced: Option<ItemId> },
    DropPartial { item: ItemId },
    /// The partial item becomes a full item of its owning partition.
    PromotePartial { item: ItemId },
    /// Batch slot `slot`, stored at `position` of batch partition `partition`,
    /// joins the reservoir as a full item of that partition.
    Insert { slot: usize, partition: usize, position: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpdatePlan {
    pub ops: Vec<PlanOp>,
    pub weight: f64,
    pub total_weight: f64,
    pub centralized: bool,
    /// Per-partition count messages the coordinator sent (distributed only).
    pub count_messages: u64,
}

impl UpdatePlan {
    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

struct Scratch<'a, C: ?Sized, W> {
    parts: Vec<Vec<ItemId>>,
    partial: Option<(ItemId, usize)>,
    batch: &'a PartitionedBatch,
    coord: &'a mut C,
    workers: Option<&'a mut [W]>,
    ops: Vec<PlanOp>,
    count_messages: u64,
}

fn locate(parts: &[Vec<ItemId>], mut j: usize) -> (usize, usize) {
    for (p, part) in parts.iter().enumerate() {
        if j < part.len() {
            return (p, j);
        }
        j -= part.len();
    }
    unreachable!("global index within total size")
}

impl<C: RandomSource + ?Sized, W: RandomSource> Scratch<'_, C, W> {
    fn full_len(&self) -> usize {
        self.parts.iter().map(Vec::len).sum()
    }

    /// Chooses `count` distinct full items; returns `(partition, position)`
    /// pairs in removal order, already removed from the scratch state.
    fn pick_full(&mut self, count: usize) -> Result<Vec<(usize, usize, ItemId)>> {
        if count > self.full_len() {
            return Err(Error::PlanMismatch(format!(
                "{count} removals requested from {} full items",
                self.full_len()
            )));
        }
        let mut picked = Vec::with_capacity(count);
        match self.workers.as_deref_mut() {
            None => {
                for _ in 0..count {
                    let (p, r) = locate(&self.parts, self.coord.index(self.full_len()));
                    picked.push((p, r, self.parts[p].swap_remove(r)));
                }
            }
            Some(workers) => {
                if count == 0 {
                    return Ok(picked);
                }
                let sizes: Vec<u64> = self.parts.iter().map(|p| p.len() as u64).collect();
                let counts = multivariate_hypergeometric(count as u64, &sizes, &mut *self.coord)?;
                self.count_messages += sizes.len() as u64;
                for (p, &c) in counts.iter().enumerate() {
                    for _ in 0..c {
                        let r = workers[p].index(self.parts[p].len());
                        picked.push((p, r, self.parts[p].swap_remove(r)));
                    }
                }
            }
        }
        Ok(picked)
    }

    fn downsample(&mut self, edit: &DownsampleEdit) -> Result<()> {
        for (partition, position, item) in self.pick_full(edit.deletes)? {
            self.ops.push(PlanOp::Delete { partition, position, item });
        }
        if edit.demote {
            let (partition, position, item) = self.pick_full(1)?[0];
            let displaced = self.partial.map(|(old, _)| old);
            if let (PartialFate::Promote, Some((old, owner))) = (edit.partial, self.partial) {
                self.parts[owner].push(old);
            }
            self.partial = Some((item, partition));
            self.ops.push(PlanOp::Demote { partition, position, item, previous: edit.partial, displaced });
        } else if let Some((item, owner)) = self.partial {
            match edit.partial {
                PartialFate::Keep => {}
                PartialFate::Drop => {
                    self.partial = None;
                    self.ops.push(PlanOp::DropPartial { item });
                }
                PartialFate::Promote => {
                    self.partial = None;
                    self.parts[owner].push(item);
                    self.ops.push(PlanOp::PromotePartial { item });
                }
            }
        }
        Ok(())
    }

    fn insert_slots(&mut self, slots: impl IntoIterator<Item = usize>) {
        for slot in slots {
            let (partition, position) = self.batch.slot(slot).expect("slot within batch");
            self.parts[partition].push(self.batch.partitions()[partition][position]);
            self.ops.push(PlanOp::Insert { slot, partition, position });
        }
    }

    fn pick_inserts(&mut self, m: usize) -> Result<Vec<usize>> {
        let b = self.batch.len();
        match self.workers.as_deref_mut() {
            None => Ok(sample_indices(b, m, &mut *self.coord)),
            Some(workers) => {
                let sizes: Vec<u64> = self.batch.partitions().iter().map(|p| p.len() as u64).collect();
                let counts = multivariate_hypergeometric(m as u64, &sizes, &mut *self.coord)?;
                self.count_messages += sizes.len() as u64;
                let mut slots = Vec::with_capacity(m);
                let mut offset = 0;
                for (p, &c) in counts.iter().enumerate() {
                    let len = sizes[p] as usize;
                    slots.extend(sample_indices(len, c as usize, &mut workers[p]).into_iter().map(|r| offset + r));
                    offset += len;
                }
                Ok(slots)
            }
        }
    }
}

fn build_plan<C: RandomSource + ?Sized, W: RandomSource>(
    reservoir: &PartitionedReservoir,
    batch: &PartitionedBatch,
    decision: &StepDecision,
    coord: &mut C,
    workers: Option<&mut [W]>,
) -> Result<UpdatePlan> {
    if batch.len() != decision.batch_len || batch.k() != reservoir.k() {
        return Err(Error::PlanMismatch("batch does not match the step decision".into()));
    }
    if let Some(w) = &workers {
        if w.len() != reservoir.k() {
            return Err(Error::PlanMismatch(format!("{} worker streams for {} partitions", w.len(), reservoir.k())));
        }
    }
    let centralized = workers.is_none();
    let mut s = Scratch {
        parts: reservoir.partitions.clone(),
        partial: reservoir.partial,
        batch,
        coord,
        workers,
        ops: Vec::new(),
        count_messages: 0,
    };
    for phase in &decision.phases {
        match phase {
            Phase::Downsample(edit) => s.downsample(edit)?,
            Phase::InsertAll => s.insert_slots(0..batch.len()),
            Phase::Replace { count } => {
                for (partition, position, item) in s.pick_full(*count)? {
                    s.ops.push(PlanOp::Delete { partition, position, item });
                }
                let slots = s.pick_inserts(*count)?;
                s.insert_slots(slots);
            }
        }
    }
    Ok(UpdatePlan {
        ops: s.ops,
        weight: decision.weight,
        total_weight: decision.total_weight,
        centralized,
        count_messages: s.count_messages,
    })
}

/// The coordinator chooses every victim and insert slot itself, drawing only
/// from `coord`. With one partition this consumes randomness exactly like the
/// single-node sampler.
pub fn plan_centralized<C: RandomSource + ?Sized>(
    reservoir: &PartitionedReservoir,
    batch: &PartitionedBatch,
    decision: &StepDecision,
    coord: &mut C,
) -> Result<UpdatePlan> {
    build_plan::<C, crate::randkit::RandomStream>(reservoir, batch, decision, coord, None)
}

/// The coordinator splits delete and insert counts over partitions with
/// multivariate hypergeometric draws; each worker then picks locally from its
/// own stream.
pub fn plan_distributed<C: RandomSource + ?Sized, W: RandomSource>(
    reservoir: &PartitionedReservoir,
    batch: &PartitionedBatch,
    decision: &StepDecision,
    coord: &mut C,
    workers: &mut [W],
) -> Result<UpdatePlan> {
    build_plan(reservoir, batch, decision, coord, Some(workers))
}

/// Replays `plan` against the reservoir. On error the reservoir is unchanged.
pub fn apply_plan(reservoir: &mut PartitionedReservoir, batch: &PartitionedBatch, plan: &UpdatePlan) -> Result<()> {
    let mismatch = |what: &str| Error::PlanMismatch(what.to_string());
    let mut parts = reservoir.partitions.clone();
    let mut partial = reservoir.partial;
    let k = parts.len();
    let take = |parts: &mut Vec<Vec<ItemId>>, p: usize, r: usize, item: ItemId| -> Result<ItemId> {
        if p < k && parts[p].get(r) == Some(&item) {
            Ok(parts[p].swap_remove(r))
        } else {
            Err(Error::PlanMismatch(format!("item {item} is not at partition {p}, position {r}")))
        }
    };
    for op in &plan.ops {
        match *op {
            PlanOp::Delete { partition, position, item } => {
                take(&mut parts, partition, position, item)?;
            }
            PlanOp::Demote { partition, position, item, previous, displaced } => {
                let id = take(&mut parts, partition, position, item)?;
                if displaced != partial.map(|(old, _)| old) {
                    return Err(mismatch("displaced partial item differs from the current one"));
                }
                match (previous, partial) {
                    (PartialFate::Promote, Some((old, owner))) => parts[owner].push(old),
                    (PartialFate::Keep, Some(_)) => return Err(mismatch("demotion would keep two partial items")),
                    _ => {}
                }
                partial = Some((id, partition));
            }
            PlanOp::DropPartial { item } => match partial.take() {
                Some((old, _)) if old == item => {}
                _ => return Err(mismatch("partial item to drop is not present")),
            },
            PlanOp::PromotePartial { item } => match partial.take() {
                Some((old, owner)) if old == item => parts[owner].push(old),
                _ => return Err(mismatch("partial item to promote is not present")),
            },
            PlanOp::Insert { slot, partition, position } => {
                let id = batch
                    .partitions()
                    .get(partition)
                    .and_then(|p| p.get(position))
                    .ok_or_else(|| mismatch("insert refers to a missing batch slot"))?;
                if batch.slot(slot) != Some((partition, position)) || partition >= k {
                    return Err(mismatch("insert slot does not match its location"));
                }
                parts[partition].push(*id);
            }
        }
    }
    let next = PartitionedReservoir { partitions: parts, partial, weight: plan.weight, total_weight: plan.total_weight };
    if !next.is_consistent() {
        return Err(mismatch("plan leaves sizes inconsistent with the new weight"));
    }
    *reservoir = next;
    Ok(())
}
