//! Monte Carlo inclusion frequencies and the relative-inclusion ratio check.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::stats::binomial_std_error;
use crate::batch::Batch;
use crate::error::{Error, Result};
use crate::randkit::{purpose, RandomStream};
use crate::samplers::TemporalSampler;

/// Builds a fresh sampler for one replication.
pub type SamplerFactory<'a> = &'a (dyn Fn() -> Result<Box<dyn TemporalSampler<u64>>> + Sync);

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionEstimate {
    pub item: u64,
    pub arrival_time: f64,
    pub query_time: f64,
    pub frequency: f64,
    pub std_error: f64,
    pub analytic: Option<f64>,
}

impl InclusionEstimate {
    /// `|frequency - analytic| <= z * std_error`; a zero-variance estimate
    /// must match to 1e-12.
    pub fn within(&self, z: f64) -> Option<bool> {
        self.analytic.map(|a| (self.frequency - a).abs() <= z * self.std_error + 1e-12)
    }
}

/// Runs `replications` independent copies of the sampler over `stream` and
/// reports, for each index in `query_steps`, how often every item that had
/// arrived by then was in the realized sample.
///
/// Replication `r` draws sampler randomness from path `(r, SAMPLER)` and
/// realization randomness from `(r, REALIZE)` under `seed`, so the result is
/// independent of thread scheduling.
pub fn estimate_inclusion(
    factory: SamplerFactory<'_>,
    stream: &[Batch<u64>],
    replications: u64,
    seed: u64,
    query_steps: &[usize],
) -> Result<Vec<Vec<InclusionEstimate>>> {
    if replications == 0 {
        return Err(Error::param("need at least one replication"));
    }
    if query_steps.iter().any(|&q| q >= stream.len()) {
        return Err(Error::param("query step beyond the end of the stream"));
    }
    let mut index = HashMap::new();
    let mut arrivals = Vec::new();
    for b in stream {
        for &id in &b.items {
            if index.insert(id, arrivals.len()).is_some() {
                return Err(Error::param(format!("item id {id} appears twice in the stream")));
            }
            arrivals.push((id, b.time));
        }
    }
    let mut query_slot = vec![None; stream.len()];
    for (qi, &q) in query_steps.iter().enumerate() {
        query_slot[q] = Some(qi);
    }
    let width = arrivals.len();
    let run = |rep: u64, mut counts: Vec<u32>| -> Result<Vec<u32>> {
        let mut sampler = factory()?;
        let mut rng = RandomStream::with_path(seed, &[rep, purpose::SAMPLER]);
        let mut realize_rng = RandomStream::with_path(seed, &[rep, purpose::REALIZE]);
        for (step, batch) in stream.iter().enumerate() {
            sampler.observe(batch.clone(), &mut rng)?;
            if let Some(qi) = query_slot[step] {
                for id in sampler.realize(&mut realize_rng) {
                    counts[qi * width + index[id]] += 1;
                }
            }
        }
        Ok(counts)
    };
    let counts = (0..replications)
        .into_par_iter()
        .try_fold(|| vec![0u32; width * query_steps.len()], |acc, rep| run(rep, acc))
        .try_reduce(
            || vec![0u32; width * query_steps.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;

    // Closed forms depend only on batch sizes, so one extra run suffices.
    let mut reference = factory()?;
    let mut rng = RandomStream::with_path(seed, &[u64::MAX, purpose::SAMPLER]);
    let mut out = Vec::with_capacity(query_steps.len());
    let mut analytic_at = vec![Vec::new(); stream.len()];
    for (step, batch) in stream.iter().enumerate() {
        reference.observe(batch.clone(), &mut rng)?;
        if query_slot[step].is_some() {
            analytic_at[step] = arrivals
                .iter()
                .map(|&(_, t)| if t <= batch.time { reference.analytic_inclusion(t, batch.time) } else { None })
                .collect();
        }
    }
    for (qi, &q) in query_steps.iter().enumerate() {
        let query_time = stream[q].time;
        let row = arrivals
            .iter()
            .enumerate()
            .filter(|(_, &(_, t))| t <= query_time)
            .map(|(i, &(item, arrival_time))| {
                let frequency = counts[qi * width + i] as f64 / replications as f64;
                InclusionEstimate {
                    item,
                    arrival_time,
                    query_time,
                    frequency,
                    std_error: binomial_std_error(frequency, replications),
                    analytic: analytic_at[q][i],
                }
            })
            .collect();
        out.push(row);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCheck {
    pub older: u64,
    pub newer: u64,
    pub gap: f64,
    pub ratio: f64,
    pub expected: f64,
    pub std_error: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioReport {
    pub pairs: Vec<PairCheck>,
}

impl RatioReport {
    pub fn pass_fraction(&self) -> f64 {
        if self.pairs.is_empty() {
            return 0.0;
        }
        self.pairs.iter().filter(|p| p.pass).count() as f64 / self.pairs.len() as f64
    }
}

/// Compares frequency ratios of items `gap` apart in arrival time with
/// `exp(-lambda * gap)`. The `i`-th item of one batch is paired with the
/// `i`-th item of the later batch; a gap of 0 pairs neighbours within a batch.
/// Standard errors are propagated with the delta method.
pub fn check_ratio(estimates: &[InclusionEstimate], lambda: f64, gaps: &[f64]) -> Result<RatioReport> {
    let mut groups: Vec<(f64, Vec<&InclusionEstimate>)> = Vec::new();
    let mut sorted: Vec<&InclusionEstimate> = estimates.iter().collect();
    sorted.sort_by(|a, b| a.arrival_time.total_cmp(&b.arrival_time));
    for e in sorted {
        match groups.last_mut() {
            Some((t, g)) if *t == e.arrival_time => g.push(e),
            _ => groups.push((e.arrival_time, vec![e])),
        }
    }
    if groups.len() < 2 {
        return Err(Error::InsufficientData("ratio check needs at least two arrival times".into()));
    }
    let mut pairs = Vec::new();
    for &gap in gaps {
        let expected = (-lambda * gap).exp();
        for (i, (t_old, old)) in groups.iter().enumerate() {
            let newer: Vec<(&InclusionEstimate, &InclusionEstimate)> = if gap == 0.0 {
                old.iter().zip(old.iter().skip(1)).map(|(a, b)| (*a, *b)).collect()
            } else {
                match groups[i + 1..].iter().find(|(t, _)| (t - (t_old + gap)).abs() < 1e-9) {
                    Some((_, new)) => old.iter().zip(new.iter()).map(|(a, b)| (*a, *b)).collect(),
                    None => continue,
                }
            };
            for (a, b) in newer {
                let (ratio, se, pass) = if a.frequency > 0.0 && b.frequency > 0.0 {
                    let ratio = a.frequency / b.frequency;
                    let rel = ((a.std_error / a.frequency).powi(2) + (b.std_error / b.frequency).powi(2)).sqrt();
                    let se = ratio * rel;
                    (ratio, se, (ratio - expected).abs() <= 3.0 * se + 1e-12)
                } else {
                    (f64::NAN, f64::NAN, false)
                };
                pairs.push(PairCheck { older: a.item, newer: b.item, gap, ratio, expected, std_error: se, pass });
            }
        }
    }
    Ok(RatioReport { pairs })
}
