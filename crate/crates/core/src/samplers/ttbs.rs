//! Targeted-size time-biased sampling: size `n` in expectation only.

use super::{check_lambda, check_n, TemporalSampler};
use crate::batch::{Batch, DecayClock};
use crate::error::{Error, Result};
use crate::randkit::{binomial, retain_random, RandomStream};

/// Keeps each current item with probability `p = exp(-lambda * gap)` and each
/// batch item with probability `q = n (1 - e^-lambda) / b`, where `b` is the
/// mean batch size. The sample size drifts toward `n` but is not bounded.
#[derive(Clone, Debug)]
pub struct Ttbs<T> {
    clock: DecayClock,
    n: usize,
    q: f64,
    sample: Vec<T>,
    total_weight: f64,
    initial_time: Option<f64>,
}

impl<T> Ttbs<T> {
    pub fn new(lambda: f64, n: usize, mean_batch: f64) -> Result<Self> {
        check_lambda(lambda)?;
        check_n(n)?;
        if !(mean_batch.is_finite() && mean_batch > 0.0) {
            return Err(Error::param(format!("mean batch size {mean_batch} must be positive")));
        }
        let q = n as f64 * (1.0 - (-lambda).exp()) / mean_batch;
        if q > 1.0 {
            return Err(Error::param(format!(
                "acceptance probability {q} exceeds 1: mean batch {mean_batch} is too small for n = {n}, lambda = {lambda}"
            )));
        }
        Ok(Ttbs { clock: DecayClock::new(lambda), n, q, sample: Vec::new(), total_weight: 0.0, initial_time: None })
    }

    pub fn with_initial(lambda: f64, n: usize, mean_batch: f64, items: Vec<T>, time: f64) -> Result<Self> {
        let mut s = Self::new(lambda, n, mean_batch)?;
        s.clock.advance(time)?;
        s.initial_time = Some(time);
        s.total_weight = items.len() as f64;
        s.sample = items;
        Ok(s)
    }

    pub fn acceptance_probability(&self) -> f64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

impl<T: Clone + Send> TemporalSampler<T> for Ttbs<T> {
    fn name(&self) -> &'static str {
        "ttbs"
    }

    fn observe(&mut self, mut batch: Batch<T>, rng: &mut RandomStream) -> Result<()> {
        let p = self.clock.advance(batch.time)?;
        let keep = binomial(self.sample.len() as u64, p, rng) as usize;
        retain_random(&mut self.sample, keep, rng);
        let admit = binomial(batch.len() as u64, self.q, rng) as usize;
        retain_random(&mut batch.items, admit, rng);
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
        if !(arrival <= last && query >= last) {
            return None;
        }
        let decay = self.clock.factor(arrival, query);
        Some(if self.initial_time == Some(arrival) { decay } else { self.q * decay })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_acceptance_above_one() {
        // q = 100 (1 - e^-0.1) / 5 > 1
        assert!(matches!(Ttbs::<u64>::new(0.1, 100, 5.0), Err(Error::InvalidParameter(_))));
        let s = Ttbs::<u64>::new(0.1, 100, 20.0).unwrap();
        assert!((s.acceptance_probability() - 5.0 * (1.0 - (-0.1f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn acceptance_for_large_reservoir() {
        let s = Ttbs::<u64>::new(0.05, 1000, 100.0).unwrap();
        assert!((s.acceptance_probability() - 0.48771).abs() < 1e-5);
    }
}
