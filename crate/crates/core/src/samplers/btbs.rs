//! Bernoulli time-biased sampling: unbounded size, exact decay.

use super::{check_lambda, TemporalSampler};
use crate::batch::{Batch, DecayClock};
use crate::error::Result;
use crate::randkit::{binomial, retain_random, RandomStream};

/// Each step keeps every current item independently with probability
/// `exp(-lambda * gap)` and then admits the whole batch.
#[derive(Clone, Debug)]
pub struct Btbs<T> {
    clock: DecayClock,
    sample: Vec<T>,
    total_weight: f64,
}

impl<T> Btbs<T> {
    pub fn new(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Btbs { clock: DecayClock::new(lambda), sample: Vec::new(), total_weight: 0.0 })
    }

    pub fn with_initial(lambda: f64, items: Vec<T>, time: f64) -> Result<Self> {
        let mut s = Self::new(lambda)?;
        s.clock.advance(time)?;
        s.total_weight = items.len() as f64;
        s.sample = items;
        Ok(s)
    }

    pub fn sample(&self) -> &[T] {
        &self.sample
    }
}

impl<T: Clone + Send> TemporalSampler<T> for Btbs<T> {
    fn name(&self) -> &'static str {
        "btbs"
    }

    fn observe(&mut self, batch: Batch<T>, rng: &mut RandomStream) -> Result<()> {
        let p = self.clock.advance(batch.time)?;
        let keep = binomial(self.sample.len() as u64, p, rng) as usize;
        retain_random(&mut self.sample, keep, rng);
        self.total_weight = p * self.total_weight + batch.len() as f64;
        self.sample.extend(batch.items);
        Ok(())
    }

    fn realize(&self, _rng: &mut RandomStream) -> Vec<&T> {
        self.sample.iter().collect()
    }

    fn expected_size(&self) -> f64 {
        self.sample.len() as f64
    }

    fn total_weight(&self) -> f64 {
        self.total_weight
    }

    fn analytic_inclusion(&self, arrival: f64, query: f64) -> Option<f64> {
        let last = self.clock.last_time()?;
        (arrival <= last && query >= last).then(|| self.clock.factor(arrival, query))
    }
}
