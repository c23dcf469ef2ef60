//! In-process model of partitioned R-TBS.
//!
//! Each incoming batch arrives split over `k` partitions, and the reservoir is
//! co-partitioned with it: a full item lives in the partition it arrived in,
//! and the partial item remembers its owning partition. A coordinator holds
//! the scalars `W` and `C` and makes the same per-step decision as single-node
//! R-TBS ([`decide_step`](crate::rtbs::decide_step)). What differs between
//! strategies is who picks the concrete victims and inserts, and how much data
//! that moves between partitions; the [`CostLedger`] counts it.
//!
//! Workers are simulated: partition `p` at step `s` of replication `r` draws
//! from the stream at path `(r, s, p, WORKER)`, the coordinator from
//! `(r, s, COORDINATOR_PARTITION, COORDINATOR)`.

mod cost;
mod plan;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

pub use cost::{plan_cost, CostLedger};
pub use plan::{apply_plan, plan_centralized, plan_distributed, PlanOp, UpdatePlan};

use crate::batch::{Batch, DecayClock};
use crate::error::{Error, Result};
use crate::randkit::{purpose, RandomSource, RandomStream};
use crate::rtbs::{decide_step, frc, LatentSample};
use crate::samplers::TemporalSampler;

pub type ItemId = u64;

/// Path element used in place of a partition index for coordinator streams.
pub const COORDINATOR_PARTITION: u64 = u64::MAX;

/// A batch split over partitions. Slot numbers run partition-major: slot `s`
/// maps to partition `p` and position `r` with `s = offset(p) + r`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionedBatch {
    pub time: f64,
    partitions: Vec<Vec<ItemId>>,
}

impl PartitionedBatch {
    pub fn new(time: f64, partitions: Vec<Vec<ItemId>>) -> Result<Self> {
        if partitions.is_empty() {
            return Err(Error::param("a partitioned batch needs at least one partition"));
        }
        let mut seen = HashSet::new();
        if !partitions.iter().flatten().all(|id| seen.insert(*id)) {
            return Err(Error::param("item ids repeat across partitions"));
        }
        Ok(PartitionedBatch { time, partitions })
    }

    /// Deals items to partitions in arrival order.
    pub fn round_robin(batch: Batch<ItemId>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("partition count must be positive"));
        }
        let mut partitions = vec![Vec::with_capacity(batch.len() / k + 1); k];
        for (i, id) in batch.items.into_iter().enumerate() {
            partitions[i % k].push(id);
        }
        Ok(PartitionedBatch { time: batch.time, partitions })
    }

    pub fn partitions(&self) -> &[Vec<ItemId>] {
        &self.partitions
    }

    pub fn k(&self) -> usize {
        self.partitions.len()
    }

    pub fn len(&self) -> usize {
        self.partitions.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Maps a slot number to `(partition, position)`.
    pub fn slot(&self, mut s: usize) -> Option<(usize, usize)> {
        for (p, part) in self.partitions.iter().enumerate() {
            if s < part.len() {
                return Some((p, s));
            }
            s -= part.len();
        }
        None
    }
}

/// Reservoir whose full items are stored with the partition they arrived in.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionedReservoir {
    pub(crate) partitions: Vec<Vec<ItemId>>,
    pub(crate) partial: Option<(ItemId, usize)>,
    pub(crate) weight: f64,
    pub(crate) total_weight: f64,
}

impl PartitionedReservoir {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("partition count must be positive"));
        }
        Ok(PartitionedReservoir { partitions: vec![Vec::new(); k], partial: None, weight: 0.0, total_weight: 0.0 })
    }

    /// Builds a reservoir from explicit contents, checking `sum |p| = floor(C)`
    /// and partial presence.
    pub fn from_parts(
        partitions: Vec<Vec<ItemId>>,
        partial: Option<(ItemId, usize)>,
        weight: f64,
        total_weight: f64,
    ) -> Result<Self> {
        let r = PartitionedReservoir { partitions, partial, weight, total_weight };
        if r.partitions.is_empty() || !r.is_consistent() {
            return Err(Error::param("partitioned reservoir contents do not match its weight"));
        }
        Ok(r)
    }

    pub fn k(&self) -> usize {
        self.partitions.len()
    }

    pub fn partitions(&self) -> &[Vec<ItemId>] {
        &self.partitions
    }

    pub fn partial(&self) -> Option<(ItemId, usize)> {
        self.partial
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn full_len(&self) -> usize {
        self.partitions.iter().map(Vec::len).sum()
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.partitions.iter().map(|p| p.len() as u64).collect()
    }

    /// Full items in partition order.
    pub fn flatten(&self) -> Vec<ItemId> {
        self.partitions.iter().flatten().copied().collect()
    }

    /// The logical latent sample this reservoir represents.
    pub fn latent(&self) -> LatentSample<ItemId> {
        LatentSample::new(self.flatten(), self.partial.map(|(id, _)| id), self.weight)
            .expect("reservoir invariants hold between steps")
    }

    pub fn realize<R: RandomSource + ?Sized>(&self, rng: &mut R) -> Vec<ItemId> {
        let mut out = self.flatten();
        if let Some((id, _)) = self.partial {
            if rng.bernoulli(frc(self.weight)) {
                out.push(id);
            }
        }
        out
    }

    pub fn is_consistent(&self) -> bool {
        self.full_len() as f64 == self.weight.floor()
            && self.partial.is_some() == (frc(self.weight) > 0.0)
            && self.partial.is_none_or(|(_, p)| p < self.k())
    }
}

/// How victims and inserts are chosen, and where the reservoir lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Central choice, reservoir in a hashed key-value store, inserts fetched
    /// with a repartition join.
    CentKvRj,
    /// As above but the insert-slot list is partitioned like the batch, so the
    /// join is co-located.
    CentKvCj,
    /// Central choice of exact slots, co-partitioned reservoir.
    CentCp,
    /// Coordinator picks only per-partition counts; workers pick locally.
    DistCp,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::CentKvRj, Strategy::CentKvCj, Strategy::CentCp, Strategy::DistCp];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::CentKvRj => "cent-kv-rj",
            Strategy::CentKvCj => "cent-kv-cj",
            Strategy::CentCp => "cent-cp",
            Strategy::DistCp => "dist-cp",
        }
    }

    pub fn is_centralized(self) -> bool {
        self != Strategy::DistCp
    }

    pub fn uses_kv_store(self) -> bool {
        matches!(self, Strategy::CentKvRj | Strategy::CentKvCj)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown strategy '{s}'")))
    }
}

/// Partitioned R-TBS driven step by step.
#[derive(Clone, Debug)]
pub struct DistributedRtbs {
    n: usize,
    clock: DecayClock,
    strategy: Strategy,
    reservoir: PartitionedReservoir,
    ledger: CostLedger,
    steps: u64,
}

impl DistributedRtbs {
    pub fn new(lambda: f64, n: usize, k: usize, strategy: Strategy) -> Result<Self> {
        crate::samplers::check_lambda(lambda)?;
        crate::samplers::check_n(n)?;
        Ok(DistributedRtbs {
            n,
            clock: DecayClock::new(lambda),
            strategy,
            reservoir: PartitionedReservoir::new(k)?,
            ledger: CostLedger::default(),
            steps: 0,
        })
    }

    pub fn reservoir(&self) -> &PartitionedReservoir {
        &self.reservoir
    }

    pub fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// Processes one batch. `step_stream` is the stream for this step; the
    /// coordinator and workers derive their own children from it. Returns the
    /// cost of this step.
    pub fn step(&mut self, batch: &PartitionedBatch, step_stream: &RandomStream) -> Result<CostLedger> {
        if batch.k() != self.reservoir.k() {
            return Err(Error::param(format!(
                "batch has {} partitions, reservoir has {}",
                batch.k(),
                self.reservoir.k()
            )));
        }
        let decay = self.clock.clone().advance(batch.time)?;
        let mut coord = step_stream.substream(COORDINATOR_PARTITION).substream(purpose::COORDINATOR);
        let decision = decide_step(
            self.n,
            self.reservoir.weight,
            self.reservoir.total_weight,
            decay,
            batch.len(),
            &mut coord,
        )?;
        let plan = if self.strategy.is_centralized() {
            plan_centralized(&self.reservoir, batch, &decision, &mut coord)?
        } else {
            let mut workers: Vec<RandomStream> = (0..batch.k())
                .map(|p| step_stream.substream(p as u64).substream(purpose::WORKER))
                .collect();
            plan_distributed(&self.reservoir, batch, &decision, &mut coord, &mut workers)?
        };
        apply_plan(&mut self.reservoir, batch, &plan)?;
        self.clock.advance(batch.time)?;
        self.steps += 1;
        let delta = plan_cost(&plan, batch, self.strategy, self.reservoir.k());
        self.ledger += delta;
        Ok(delta)
    }
}

/// Lets the harness treat the partitioned sampler like any other: batches are
/// dealt round-robin and step streams derive from the caller's stream path.
impl TemporalSampler<ItemId> for DistributedRtbs {
    fn name(&self) -> &'static str {
        "d-rtbs"
    }

    fn observe(&mut self, batch: Batch<ItemId>, rng: &mut RandomStream) -> Result<()> {
        let step_stream = rng.substream(self.steps);
        let batch = PartitionedBatch::round_robin(batch, self.reservoir.k())?;
        self.step(&batch, &step_stream).map(|_| ())
    }

    fn realize(&self, rng: &mut RandomStream) -> Vec<&ItemId> {
        let mut out: Vec<&ItemId> = self.reservoir.partitions.iter().flatten().collect();
        if let Some((id, _)) = &self.reservoir.partial {
            if rng.bernoulli(frc(self.reservoir.weight)) {
                out.push(id);
            }
        }
        out
    }

    fn expected_size(&self) -> f64 {
        self.reservoir.weight
    }

    fn total_weight(&self) -> f64 {
        self.reservoir.total_weight
    }

    /// Same closed form as single-node R-TBS: `(C/W) exp(-lambda (t - arrival))`.
    fn analytic_inclusion(&self, arrival: f64, query: f64) -> Option<f64> {
        let last = self.clock.last_time()?;
        if !(arrival <= last && last <= query) {
            return None;
        }
        let w = self.reservoir.total_weight * self.clock.factor(last, query);
        if w <= 0.0 {
            return Some(0.0);
        }
        Some(self.reservoir.weight.min(w) / w * self.clock.factor(arrival, query))
    }
}
