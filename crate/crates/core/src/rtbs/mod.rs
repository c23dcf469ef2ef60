//! Reservoir-based time-biased sampling (R-TBS).
//!
//! The reservoir never holds more than `n` items, and an item that arrived at
//! time `t'` is in the realized sample at time `t` with probability
//! `(C_t / W_t) * exp(-lambda (t - t'))`, where `W_t` is the decayed count of
//! everything seen and `C_t = min(n, W_t)` is the latent sample weight.
//!
//! Each step is decided by [`decide_step`], which only looks at scalars
//! (`W`, `C`, the decay factor and the batch size), and then executed item by
//! item. The split lets the distributed simulator plan the same decision
//! across partitions.

mod latent;
mod snapshot;

pub use latent::{apply_edit, downsample, frc, plan_downsample, snap, DownsampleEdit, LatentSample, PartialFate, SNAP_TOLERANCE};
pub use snapshot::RtbsSnapshot;

use crate::batch::{Batch, DecayClock};
use crate::error::{Error, Result};
use crate::randkit::{remove_random, sample_indices, stoch_round, RandomSource, RandomStream};
use crate::samplers::TemporalSampler;

/// One item-level phase of an R-TBS step.
#[derive(Clone, Debug, PartialEq)]
pub enum Phase {
    Downsample(DownsampleEdit),
    /// Every batch item joins the sample as a full item.
    InsertAll,
    /// `count` random full items are replaced by `count` random batch items.
    Replace { count: usize },
}

/// Scalar outcome of one step, before any item is touched.
#[derive(Clone, Debug, PartialEq)]
pub struct StepDecision {
    pub batch_len: usize,
    pub phases: Vec<Phase>,
    /// Latent weight `C` after the step.
    pub weight: f64,
    /// Decayed total weight `W` after the step.
    pub total_weight: f64,
}

fn shrink_to<R: RandomSource + ?Sized>(phases: &mut Vec<Phase>, c: f64, target: f64, rng: &mut R) -> Result<f64> {
    let target = snap(target);
    if target <= 0.0 {
        if c > 0.0 {
            phases.push(Phase::Downsample(DownsampleEdit::clear(c)));
        }
        Ok(0.0)
    } else if target < c {
        phases.push(Phase::Downsample(plan_downsample(c, target, rng)?));
        Ok(target)
    } else {
        Ok(c)
    }
}

/// Decides one R-TBS step from the current latent weight `weight`, total
/// weight `total_weight`, the decay factor since the last batch and the new
/// batch size.
pub fn decide_step<R: RandomSource + ?Sized>(
    n: usize,
    weight: f64,
    total_weight: f64,
    decay: f64,
    batch_len: usize,
    rng: &mut R,
) -> Result<StepDecision> {
    let nf = n as f64;
    let b = batch_len as f64;
    let decayed = decay * total_weight;
    let total = decayed + b;
    let mut phases = Vec::new();
    let mut c = weight;

    if total_weight >= nf && total >= nf {
        // Saturated and staying saturated: swap in a share of the batch.
        let m = (stoch_round(b * nf / total, rng) as usize).min(batch_len);
        if m > 0 {
            phases.push(Phase::Replace { count: m });
        }
    } else {
        c = shrink_to(&mut phases, c, decayed, rng)?;
        if batch_len > 0 {
            phases.push(Phase::InsertAll);
            c = snap(c + b);
        }
        if c > nf {
            c = shrink_to(&mut phases, c, nf, rng)?;
        }
    }
    Ok(StepDecision { batch_len, phases, weight: c, total_weight: total })
}

/// Applies the phases of `decision` to a single-node latent sample.
pub fn execute_step<T, R: RandomSource + ?Sized>(
    latent: &mut LatentSample<T>,
    decision: &StepDecision,
    batch: Vec<T>,
    rng: &mut R,
) -> Result<()> {
    if batch.len() != decision.batch_len {
        return Err(Error::param("batch length differs from the planned step"));
    }
    let mut batch: Vec<Option<T>> = batch.into_iter().map(Some).collect();
    for phase in &decision.phases {
        match phase {
            Phase::Downsample(edit) => apply_edit(latent, edit, rng)?,
            Phase::InsertAll => {
                latent.full.extend(batch.iter_mut().filter_map(Option::take));
                latent.weight = snap(latent.weight + decision.batch_len as f64);
            }
            Phase::Replace { count } => {
                remove_random(&mut latent.full, *count, rng);
                for i in sample_indices(batch.len(), *count, rng) {
                    latent.full.push(batch[i].take().expect("each batch item is used once"));
                }
            }
        }
    }
    debug_assert!(latent.check());
    debug_assert_eq!(latent.weight, decision.weight);
    Ok(())
}

/// Single-node R-TBS sampler.
#[derive(Clone, Debug)]
pub struct Rtbs<T> {
    n: usize,
    clock: DecayClock,
    total_weight: f64,
    latent: LatentSample<T>,
}

impl<T> Rtbs<T> {
    pub fn new(lambda: f64, n: usize) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::param(format!("decay rate {lambda} must be finite and non-negative")));
        }
        if n == 0 {
            return Err(Error::param("target sample size must be positive"));
        }
        Ok(Rtbs { n, clock: DecayClock::new(lambda), total_weight: 0.0, latent: LatentSample::empty() })
    }

    /// Starts from `items` observed at `time` (at most `n` of them).
    pub fn with_initial(lambda: f64, n: usize, items: Vec<T>, time: f64) -> Result<Self> {
        let mut s = Self::new(lambda, n)?;
        if items.len() > n {
            return Err(Error::param(format!("{} initial items exceed n = {n}", items.len())));
        }
        if !time.is_finite() {
            return Err(Error::InvalidTimestamp(time));
        }
        s.total_weight = items.len() as f64;
        s.latent = LatentSample::new(items, None, s.total_weight)?;
        s.clock = DecayClock::starting_at(lambda, time);
        Ok(s)
    }

    pub fn lambda(&self) -> f64 {
        self.clock.lambda()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn latent(&self) -> &LatentSample<T> {
        &self.latent
    }

    pub fn last_time(&self) -> Option<f64> {
        self.clock.last_time()
    }

    /// Decides and executes one step, returning the decision for inspection.
    pub fn step<R: RandomSource + ?Sized>(&mut self, batch: Batch<T>, rng: &mut R) -> Result<StepDecision> {
        let decay = self.clock.clone().advance(batch.time)?;
        let decision = decide_step(self.n, self.latent.weight, self.total_weight, decay, batch.len(), rng)?;
        execute_step(&mut self.latent, &decision, batch.items, rng)?;
        self.clock.advance(batch.time)?;
        self.total_weight = decision.total_weight;
        Ok(decision)
    }

    /// Probability that an item which arrived at `arrival` appears in a
    /// sample realized at `query`, assuming no further arrivals before then.
    pub fn inclusion_probability(&self, arrival: f64, query: f64) -> Result<f64> {
        let last = self.clock.last_time().unwrap_or(f64::NEG_INFINITY);
        if !(arrival <= query && query >= last && arrival <= last) {
            return Err(Error::TimeOrdering { arrival, query });
        }
        let w = self.total_weight * self.clock.factor(last, query);
        if w <= 0.0 {
            return Ok(0.0);
        }
        let c = self.latent.weight.min(w);
        Ok((c / w) * self.clock.factor(arrival, query))
    }
}

impl<T: Clone + Send> TemporalSampler<T> for Rtbs<T> {
    fn name(&self) -> &'static str {
        "rtbs"
    }

    fn observe(&mut self, batch: Batch<T>, rng: &mut RandomStream) -> Result<()> {
        self.step(batch, rng).map(|_| ())
    }

    fn realize(&self, rng: &mut RandomStream) -> Vec<&T> {
        self.latent.realize(rng)
    }

    fn expected_size(&self) -> f64 {
        self.latent.weight
    }

    fn total_weight(&self) -> f64 {
        self.total_weight
    }

    fn analytic_inclusion(&self, arrival: f64, query: f64) -> Option<f64> {
        self.inclusion_probability(arrival, query).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::batch::numbered_stream;

    #[test]
    fn constructor_validates() {
        assert!(Rtbs::<u64>::new(-0.1, 5).is_err());
        assert!(Rtbs::<u64>::new(0.1, 0).is_err());
        assert!(Rtbs::<u64>::with_initial(0.1, 2, vec![1, 2, 3], 0.0).is_err());
    }

    #[test]
    fn first_batch_fills_then_caps() {
        let mut rng = RandomStream::new(1);
        let mut s = Rtbs::new(0.1, 10).unwrap();
        s.step(Batch::new(1.0, (0..4u64).collect()), &mut rng).unwrap();
        assert_eq!(s.latent.weight, 4.0);
        assert_eq!(s.total_weight, 4.0);
        s.step(Batch::new(2.0, (4..30u64).collect()), &mut rng).unwrap();
        assert_eq!(s.latent.weight, 10.0);
        assert_eq!(s.latent.full.len(), 10);
        assert!((s.total_weight - (4.0 * (-0.1f64).exp() + 26.0)).abs() < 1e-12);
    }

    #[test]
    fn stale_batch_leaves_state_untouched() {
        let mut rng = RandomStream::new(1);
        let mut s = Rtbs::new(0.1, 5).unwrap();
        s.step(Batch::new(2.0, vec![1u64, 2]), &mut rng).unwrap();
        let before = s.clone();
        assert!(matches!(s.step(Batch::new(2.0, vec![3]), &mut rng), Err(Error::StaleTimestamp { .. })));
        assert_eq!(s.latent, before.latent);
        assert_eq!(s.total_weight, before.total_weight);
    }

    #[test]
    fn decay_without_arrivals_shrinks_to_total_weight() {
        let mut rng = RandomStream::new(3);
        let mut s = Rtbs::new(0.5, 20).unwrap();
        s.step(Batch::new(0.0, (0..8u64).collect()), &mut rng).unwrap();
        s.step(Batch::new(1.0, vec![]), &mut rng).unwrap();
        let w = 8.0 * (-0.5f64).exp();
        assert!((s.latent.weight - w).abs() < 1e-12);
        assert_eq!(s.latent.full.len(), w.floor() as usize);
        assert!(s.latent.partial.is_some());
    }

    #[test]
    fn saturated_state_has_no_partial_item() {
        let mut rng = RandomStream::new(8);
        let mut s = Rtbs::new(0.05, 30).unwrap();
        for b in numbered_stream(&[40, 12, 0, 3, 50, 25, 1, 0, 0, 70]) {
            s.step(b, &mut rng).unwrap();
            if s.total_weight >= 30.0 {
                assert!(s.latent.partial.is_none());
                assert_eq!(s.latent.full.len(), 30);
            }
            assert!(s.latent.weight <= 30.0);
        }
    }

    #[test]
    fn inclusion_probability_formula() {
        let mut rng = RandomStream::new(0);
        let mut s = Rtbs::new(0.2, 5).unwrap();
        s.step(Batch::new(1.0, (0..10u64).collect()), &mut rng).unwrap();
        assert!((s.inclusion_probability(1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        // projected one unit forward: W = 10 e^-0.2 >= 5 so C stays 5
        let p = s.inclusion_probability(1.0, 2.0).unwrap();
        let w = 10.0 * (-0.2f64).exp();
        assert!((p - 5.0 / w * (-0.2f64).exp()).abs() < 1e-15);
        assert!(s.inclusion_probability(1.5, 1.2).is_err());
        assert!(s.inclusion_probability(1.0, 0.5).is_err());
    }

    #[test]
    fn lambda_zero_reduces_to_uniform_reservoir_size() {
        let mut rng = RandomStream::new(5);
        let mut s = Rtbs::new(0.0, 7).unwrap();
        for b in numbered_stream(&[3, 3, 3, 3]) {
            s.step(b, &mut rng).unwrap();
        }
        assert_eq!(s.total_weight, 12.0);
        assert_eq!(s.latent.weight, 7.0);
    }
}
