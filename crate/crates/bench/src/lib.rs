//! Workloads shared by the throughput benchmarks.

use tbs_core::batch::numbered_stream;
use tbs_core::{Batch, RandomStream, Result, SamplerConfig};

/// `steps` batches of `batch` items with unit time spacing.
pub fn constant_stream(steps: usize, batch: usize) -> Vec<Batch<u64>> {
    numbered_stream(&vec![batch; steps])
}

/// Feeds `stream` to a fresh sampler and returns its final expected size.
pub fn run(cfg: &SamplerConfig, stream: &[Batch<u64>], seed: u64) -> Result<f64> {
    let mut s = cfg.build::<u64>()?;
    let mut rng = RandomStream::new(seed);
    for b in stream {
        s.observe(b.clone(), &mut rng)?;
    }
    Ok(s.expected_size())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tbs_core::SamplerKind;

    #[test]
    fn rtbs_fills_to_target() {
        let cfg = SamplerConfig::new(SamplerKind::Rtbs, 0.07, 1000, 100.0);
        assert_eq!(run(&cfg, &constant_stream(100, 100), 0).unwrap(), 1000.0);
    }
}
