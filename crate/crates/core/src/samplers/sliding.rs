//! Sliding window over the `n` most recent items.

use std::collections::VecDeque;

use super::{check_n, TemporalSampler};
use crate::batch::{Batch, DecayClock};
use crate::error::Result;
use crate::randkit::RandomStream;

/// Items are ordered by arrival, and within a batch by position, so a batch
/// that straddles the window edge keeps its suffix.
#[derive(Clone, Debug)]
pub struct SlidingWindow<T> {
    n: usize,
    clock: DecayClock,
    seen: u64,
    window: VecDeque<T>,
}

impl<T> SlidingWindow<T> {
    pub fn new(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(SlidingWindow { n, clock: DecayClock::new(0.0), seen: 0, window: VecDeque::with_capacity(n) })
    }
}

impl<T: Clone + Send> TemporalSampler<T> for SlidingWindow<T> {
    fn name(&self) -> &'static str {
        "sw"
    }

    fn observe(&mut self, batch: Batch<T>, _rng: &mut RandomStream) -> Result<()> {
        self.clock.advance(batch.time)?;
        self.seen += batch.len() as u64;
        let skip = batch.len().saturating_sub(self.n);
        self.window.extend(batch.items.into_iter().skip(skip));
        while self.window.len() > self.n {
            self.window.pop_front();
        }
        Ok(())
    }

    fn realize(&self, _rng: &mut RandomStream) -> Vec<&T> {
        self.window.iter().collect()
    }

    fn expected_size(&self) -> f64 {
        self.window.len() as f64
    }

    fn total_weight(&self) -> f64 {
        self.seen as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contents(s: &SlidingWindow<char>) -> Vec<char> {
        s.window.iter().copied().collect()
    }

    #[test]
    fn keeps_most_recent() {
        let mut rng = RandomStream::new(0);
        let mut s = SlidingWindow::new(3).unwrap();
        for (t, c) in ['a', 'b', 'c', 'd'].into_iter().enumerate() {
            s.observe(Batch::new(t as f64, vec![c]), &mut rng).unwrap();
        }
        assert_eq!(contents(&s), vec!['b', 'c', 'd']);
    }

    #[test]
    fn short_stream_and_oversized_batch() {
        let mut rng = RandomStream::new(0);
        let mut s = SlidingWindow::new(4).unwrap();
        s.observe(Batch::new(1.0, vec!['a', 'b']), &mut rng).unwrap();
        assert_eq!(contents(&s), vec!['a', 'b']);
        s.observe(Batch::new(2.0, "cdefgh".chars().collect()), &mut rng).unwrap();
        assert_eq!(contents(&s), vec!['e', 'f', 'g', 'h']);
        assert_eq!(s.total_weight(), 8.0);
    }
}
