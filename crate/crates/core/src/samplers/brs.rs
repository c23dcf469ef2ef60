//! Batched reservoir sampling: a uniform sample of everything seen so far.

use super::{check_n, TemporalSampler};
use crate::batch::{Batch, DecayClock};
use crate::error::Result;
use crate::randkit::{hypergeometric, retain_random, RandomStream};

#[derive(Clone, Debug)]
pub struct Brs<T> {
    n: usize,
    clock: DecayClock,
    seen: u64,
    sample: Vec<T>,
}

impl<T> Brs<T> {
    pub fn new(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Brs { n, clock: DecayClock::new(0.0), seen: 0, sample: Vec::new() })
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }
}

impl<T: Clone + Send> TemporalSampler<T> for Brs<T> {
    fn name(&self) -> &'static str {
        "brs"
    }

    fn observe(&mut self, mut batch: Batch<T>, rng: &mut RandomStream) -> Result<()> {
        self.clock.advance(batch.time)?;
        let b = batch.len() as u64;
        let size = (self.n as u64).min(self.seen + b);
        // How many of the new sample slots go to batch items.
        let from_batch = hypergeometric(size, b, self.seen, rng)?;
        retain_random(&mut self.sample, (size - from_batch) as usize, rng);
        retain_random(&mut batch.items, from_batch as usize, rng);
        self.sample.extend(batch.items);
        self.seen += b;
        Ok(())
    }

    fn realize(&self, _rng: &mut RandomStream) -> Vec<&T> {
        self.sample.iter().collect()
    }

    fn expected_size(&self) -> f64 {
        self.sample.len() as f64
    }

    fn total_weight(&self) -> f64 {
        self.seen as f64
    }

    fn analytic_inclusion(&self, arrival: f64, query: f64) -> Option<f64> {
        let last = self.clock.last_time()?;
        (arrival <= last && query >= last && self.seen > 0).then(|| self.sample.len() as f64 / self.seen as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fills_then_holds_n() {
        let mut rng = RandomStream::new(3);
        let mut s = Brs::new(10).unwrap();
        s.observe(Batch::new(1.0, (0..4u64).collect()), &mut rng).unwrap();
        assert_eq!(s.sample.len(), 4);
        s.observe(Batch::new(2.0, (4..40u64).collect()), &mut rng).unwrap();
        assert_eq!(s.sample.len(), 10);
        s.observe(Batch::new(3.0, vec![]), &mut rng).unwrap();
        assert_eq!(s.sample.len(), 10);
        assert_eq!(s.seen(), 40);
    }
}
