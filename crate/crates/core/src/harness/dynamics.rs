//! Sample-size trajectories under configurable batch-size laws.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::batch::Batch;
use crate::error::{Error, Result};
use crate::randkit::{purpose, RandomSource, RandomStream};
use crate::samplers::SamplerConfig;

/// How many items arrive at each step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BatchLaw {
    Deterministic(usize),
    /// Uniform integer on `lo..=hi`.
    Uniform { lo: usize, hi: usize },
    /// `base` items per step up to `onset`, then `round(base * factor^(t - onset))`.
    /// Growth when `factor > 1`, decay when `factor < 1`.
    Geometric { base: f64, factor: f64, onset: u64 },
}

impl BatchLaw {
    /// Size of the batch at 1-based step `step`.
    pub fn size<R: RandomSource + ?Sized>(&self, step: u64, rng: &mut R) -> usize {
        match *self {
            BatchLaw::Deterministic(b) => b,
            BatchLaw::Uniform { lo, hi } => lo + rng.index(hi - lo + 1),
            BatchLaw::Geometric { base, factor, onset } => {
                let e = step.saturating_sub(onset) as i32;
                (base * factor.powi(e)).round() as usize
            }
        }
    }

    /// Nominal mean batch size, used to configure T-TBS.
    pub fn mean_hint(&self) -> f64 {
        match *self {
            BatchLaw::Deterministic(b) => b as f64,
            BatchLaw::Uniform { lo, hi } => (lo + hi) as f64 / 2.0,
            BatchLaw::Geometric { base, .. } => base,
        }
    }

    /// Parses `deterministic:B`, `uniform:LO,HI`, `grow:PHI[@ONSET]` or
    /// `decay:PHI[@ONSET]`. Geometric laws start from `base` items per step.
    pub fn parse(spec: &str, base: usize) -> Result<Self> {
        let bad = || Error::Parse(format!("bad batch law '{spec}'"));
        let (kind, args) = spec.split_once(':').ok_or_else(bad)?;
        match kind {
            "deterministic" | "det" => Ok(BatchLaw::Deterministic(args.trim().parse().map_err(|_| bad())?)),
            "uniform" => {
                let (lo, hi) = args.split_once(',').ok_or_else(bad)?;
                let lo: usize = lo.trim().parse().map_err(|_| bad())?;
                let hi: usize = hi.trim().parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                Ok(BatchLaw::Uniform { lo, hi })
            }
            "grow" | "decay" => {
                let (phi, onset) = match args.split_once('@') {
                    Some((p, o)) => (p, o.trim().parse().map_err(|_| bad())?),
                    None => (args, 0),
                };
                let factor: f64 = phi.trim().parse().map_err(|_| bad())?;
                let ok = factor.is_finite() && factor > 0.0 && ((kind == "grow") == (factor >= 1.0));
                if !ok {
                    return Err(bad());
                }
                Ok(BatchLaw::Geometric { base: base as f64, factor, onset })
            }
            _ => Err(bad()),
        }
    }
}

impl FromStr for BatchLaw {
    type Err = Error;

    /// Geometric laws parsed this way start from 100 items per step.
    fn from_str(s: &str) -> Result<Self> {
        BatchLaw::parse(s, 100)
    }
}

impl fmt::Display for BatchLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BatchLaw::Deterministic(b) => write!(f, "deterministic:{b}"),
            BatchLaw::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            BatchLaw::Geometric { base, factor, onset } => {
                let kind = if factor >= 1.0 { "grow" } else { "decay" };
                write!(f, "{kind}:{factor}@{onset} from {base}")
            }
        }
    }
}

/// Generates the batch sizes of replication `rep` for steps `1..=steps`.
/// Every sampler run under the same `(seed, rep)` sees the same sizes.
pub fn batch_sizes(law: &BatchLaw, steps: u64, seed: u64, rep: u64) -> Vec<usize> {
    let mut rng = RandomStream::with_path(seed, &[rep, purpose::BATCH_SIZES]);
    (1..=steps).map(|t| law.size(t, &mut rng)).collect()
}

/// Realized sample sizes, `sizes[rep * steps + (t - 1)]` at step `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeTrace {
    pub steps: usize,
    pub replications: usize,
    pub sizes: Vec<u32>,
    pub total_weights: Vec<f64>,
}

impl SizeTrace {
    fn column(&self, step: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.replications).map(move |r| self.sizes[r * self.steps + step - 1] as f64)
    }

    pub fn mean(&self, step: usize) -> f64 {
        self.column(step).sum::<f64>() / self.replications as f64
    }

    pub fn variance(&self, step: usize) -> f64 {
        let m = self.mean(step);
        self.column(step).map(|x| (x - m).powi(2)).sum::<f64>() / (self.replications as f64 - 1.0)
    }

    /// Standard error of the step mean.
    pub fn std_error(&self, step: usize) -> f64 {
        (self.variance(step) / self.replications as f64).sqrt()
    }

    pub fn means(&self) -> Vec<f64> {
        (1..=self.steps).map(|t| self.mean(t)).collect()
    }

    /// Fraction of replications whose size at `step` is at least `threshold`.
    pub fn tail_frequency(&self, step: usize, threshold: f64) -> f64 {
        self.column(step).filter(|&x| x >= threshold).count() as f64 / self.replications as f64
    }

    /// Average over replications of each run's time-averaged size on steps
    /// `from..=steps`.
    pub fn time_average(&self, from: usize) -> f64 {
        let span = (self.steps + 1 - from) as f64;
        (1..=self.replications)
            .map(|r| {
                let row = &self.sizes[(r - 1) * self.steps..r * self.steps];
                row[from - 1..].iter().map(|&x| x as f64).sum::<f64>() / span
            })
            .sum::<f64>()
            / self.replications as f64
    }

    pub fn max(&self) -> u32 {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn mean_total_weight(&self, step: usize) -> f64 {
        (0..self.replications).map(|r| self.total_weights[r * self.steps + step - 1]).sum::<f64>()
            / self.replications as f64
    }

    /// Per-step means as CSV rows `step,algo,sample_size,total_weight,seed`
    /// (no header).
    pub fn csv_rows(&self, algo: &str, seed: u64) -> String {
        (1..=self.steps)
            .map(|t| format!("{t},{algo},{},{},{seed}\n", self.mean(t), self.mean_total_weight(t)))
            .collect()
    }
}

pub const TRACE_HEADER: &str = "step,algo,sample_size,total_weight,seed";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynamicsConfig {
    pub sampler: SamplerConfig,
    pub law: BatchLaw,
    pub steps: usize,
    pub replications: usize,
    pub seed: u64,
    /// Items present at time 0 (only for samplers that accept an initial sample).
    pub initial_size: usize,
}

/// Runs the configured sampler `replications` times for `steps` unit-time
/// steps and records the realized sample size after each step.
pub fn size_dynamics(cfg: &DynamicsConfig) -> Result<SizeTrace> {
    cfg.sampler.build::<u64>()?;
    if cfg.steps == 0 || cfg.replications < 2 {
        return Err(Error::param("size dynamics needs at least one step and two replications"));
    }
    let rows: Vec<(Vec<u32>, Vec<f64>)> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| -> Result<(Vec<u32>, Vec<f64>)> {
            let mut next_id = cfg.initial_size as u64;
            let mut sampler = if cfg.initial_size > 0 {
                cfg.sampler.build_with_initial((0..next_id).collect(), 0.0)?
            } else {
                cfg.sampler.build()?
            };
            let mut rng = RandomStream::with_path(cfg.seed, &[rep, purpose::SAMPLER]);
            let mut realize_rng = RandomStream::with_path(cfg.seed, &[rep, purpose::REALIZE]);
            let sizes = batch_sizes(&cfg.law, cfg.steps as u64, cfg.seed, rep);
            let mut out = Vec::with_capacity(cfg.steps);
            let mut weights = Vec::with_capacity(cfg.steps);
            for (i, &b) in sizes.iter().enumerate() {
                let items = (next_id..next_id + b as u64).collect();
                next_id += b as u64;
                sampler.observe(Batch::new((i + 1) as f64, items), &mut rng)?;
                out.push(sampler.realize(&mut realize_rng).len() as u32);
                weights.push(sampler.total_weight());
            }
            Ok((out, weights))
        })
        .collect::<Result<_>>()?;
    let mut trace = SizeTrace {
        steps: cfg.steps,
        replications: cfg.replications,
        sizes: Vec::with_capacity(cfg.steps * cfg.replications),
        total_weights: Vec::with_capacity(cfg.steps * cfg.replications),
    };
    for (s, w) in rows {
        trace.sizes.extend(s);
        trace.total_weights.extend(w);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::SamplerKind;

    #[test]
    fn parse_laws() {
        assert_eq!(BatchLaw::parse("deterministic:100", 100).unwrap(), BatchLaw::Deterministic(100));
        assert_eq!(BatchLaw::parse("uniform:0,200", 100).unwrap(), BatchLaw::Uniform { lo: 0, hi: 200 });
        assert_eq!(
            BatchLaw::parse("grow:1.002@200", 100).unwrap(),
            BatchLaw::Geometric { base: 100.0, factor: 1.002, onset: 200 }
        );
        assert!(BatchLaw::parse("grow:0.8", 100).is_err());
        assert!(BatchLaw::parse("decay:1.5", 100).is_err());
        assert!(BatchLaw::parse("uniform:5,1", 100).is_err());
        assert!(BatchLaw::parse("poisson:3", 100).is_err());
    }

    #[test]
    fn geometric_sizes() {
        let mut rng = RandomStream::new(0);
        let law = BatchLaw::Geometric { base: 100.0, factor: 0.8, onset: 2 };
        let s: Vec<usize> = (1..=5).map(|t| law.size(t, &mut rng)).collect();
        assert_eq!(s, vec![100, 100, 80, 64, 51]);
    }

    #[test]
    fn trace_shape_and_bound() {
        let cfg = DynamicsConfig {
            sampler: SamplerConfig::new(SamplerKind::Rtbs, 0.1, 30, 20.0),
            law: BatchLaw::Uniform { lo: 0, hi: 60 },
            steps: 25,
            replications: 40,
            seed: 3,
            initial_size: 0,
        };
        let t = size_dynamics(&cfg).unwrap();
        assert_eq!(t.sizes.len(), 1000);
        assert!(t.max() <= 30);
        assert_eq!(t, size_dynamics(&cfg).unwrap());
    }
}
