//! Batched variant of Chao's weighted reservoir with exponential decay.
//!
//! Items whose inclusion probability would exceed one are "overweight" and
//! held in `heavy` with their own decaying weights; every other sample item
//! lives in `light`. Until the reservoir first fills, every item is accepted
//! regardless of age, which is the known flaw this baseline exhibits.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{check_lambda, check_n, TemporalSampler};
use crate::batch::{Batch, DecayClock};
use crate::error::Result;
use crate::randkit::{shuffle, RandomSource, RandomStream};

#[derive(Clone, Debug)]
struct Heavy<T> {
    weight: f64,
    seq: u64,
    item: T,
}

// Max-heap on weight; among equal weights the earliest arrival pops first.
impl<T> Ord for Heavy<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight.total_cmp(&other.weight).then_with(|| other.seq.cmp(&self.seq))
    }
}

impl<T> PartialOrd for Heavy<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> PartialEq for Heavy<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T> Eq for Heavy<T> {}

#[derive(Clone, Debug)]
pub struct Bchao<T> {
    n: usize,
    clock: DecayClock,
    /// Aggregate weight of all items except the overweight ones.
    weight: f64,
    light: Vec<T>,
    heavy: BinaryHeap<Heavy<T>>,
    seq: u64,
}

impl<T> Bchao<T> {
    pub fn new(lambda: f64, n: usize) -> Result<Self> {
        check_lambda(lambda)?;
        check_n(n)?;
        Ok(Bchao {
            n,
            clock: DecayClock::new(lambda),
            weight: 0.0,
            light: Vec::with_capacity(n),
            heavy: BinaryHeap::new(),
            seq: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.light.len() + self.heavy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn heavy_weight(&self) -> f64 {
        self.heavy.iter().map(|h| h.weight).sum()
    }

    /// Recomputes which items are overweight once `x` (weight 1) arrives.
    /// Returns the inclusion probability of `x`, the items that stopped being
    /// overweight, and `x` itself unless it was placed in the heavy set.
    fn normalize(&mut self, x: T, seq: u64) -> (f64, Vec<Heavy<T>>, Option<T>) {
        let nf = self.n as f64;
        self.weight += 1.0 + self.heavy_weight();
        if nf / self.weight <= 1.0 {
            let released = std::mem::take(&mut self.heavy).into_vec();
            return (nf / self.weight, released, Some(x));
        }
        self.weight -= 1.0;
        let mut kept = vec![Heavy { weight: 1.0, seq, item: x }];
        let mut released = Vec::new();
        while let Some(z) = self.heavy.pop() {
            if (nf - kept.len() as f64) * z.weight / self.weight > 1.0 {
                self.weight -= z.weight;
                kept.push(z);
            } else {
                released.push(z);
                break;
            }
        }
        released.extend(std::mem::take(&mut self.heavy).into_vec());
        self.heavy = kept.into();
        (1.0, released, None)
    }

    fn insert(&mut self, x: T, rng: &mut RandomStream) {
        let seq = self.seq;
        self.seq += 1;
        if self.len() < self.n {
            self.light.push(x);
            self.weight += 1.0;
            return;
        }
        let (pi, mut released, x) = self.normalize(x, seq);
        if rng.uniform() <= pi {
            let nf = self.n as f64;
            let heavy_len = self.heavy.len() as f64;
            let u = rng.uniform();
            let mut alpha = 0.0;
            let mut victim = None;
            for (i, z) in released.iter().enumerate() {
                alpha += (1.0 - (nf - heavy_len) * z.weight / self.weight) / pi;
                if u <= alpha {
                    victim = Some(i);
                    break;
                }
            }
            match victim {
                Some(i) => {
                    released.swap_remove(i);
                }
                None if !self.light.is_empty() => {
                    let j = rng.index(self.light.len());
                    self.light.swap_remove(j);
                }
                None => {
                    released.pop();
                }
            }
            if let Some(x) = x {
                self.light.push(x);
            }
        }
        self.light.extend(released.into_iter().map(|h| h.item));
    }
}

impl<T: Clone + Send> TemporalSampler<T> for Bchao<T> {
    fn name(&self) -> &'static str {
        "bchao"
    }

    fn observe(&mut self, mut batch: Batch<T>, rng: &mut RandomStream) -> Result<()> {
        let decay = self.clock.advance(batch.time)?;
        self.weight *= decay;
        if !self.heavy.is_empty() {
            let heavy = std::mem::take(&mut self.heavy).into_vec();
            self.heavy = heavy
                .into_iter()
                .map(|mut h| {
                    h.weight *= decay;
                    h
                })
                .collect();
        }
        shuffle(&mut batch.items, rng);
        for x in batch.items {
            self.insert(x, rng);
        }
        Ok(())
    }

    fn realize(&self, _rng: &mut RandomStream) -> Vec<&T> {
        self.light.iter().chain(self.heavy.iter().map(|h| &h.item)).collect()
    }

    fn expected_size(&self) -> f64 {
        self.len() as f64
    }

    fn total_weight(&self) -> f64 {
        self.weight + self.heavy_weight()
    }
}
