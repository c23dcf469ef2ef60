//! Timestamped batches, the decay clock, and the JSONL stream format.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Items that arrived together at a single (real-valued) time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Batch<T> {
    #[serde(rename = "t")]
    pub time: f64,
    pub items: Vec<T>,
}

impl<T> Batch<T> {
    pub fn new(time: f64, items: Vec<T>) -> Self {
        Batch { time, items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Tracks the last observed timestamp and returns the decay factor
/// `exp(-lambda * gap)` for each new batch.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayClock {
    lambda: f64,
    last_time: Option<f64>,
}

impl DecayClock {
    pub fn new(lambda: f64) -> Self {
        DecayClock { lambda, last_time: None }
    }

    pub fn starting_at(lambda: f64, time: f64) -> Self {
        DecayClock { lambda, last_time: Some(time) }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn last_time(&self) -> Option<f64> {
        self.last_time
    }

    /// Moves the clock to `time`. The first call returns 1.
    pub fn advance(&mut self, time: f64) -> Result<f64> {
        if !time.is_finite() {
            return Err(Error::InvalidTimestamp(time));
        }
        let factor = match self.last_time {
            Some(last) if time <= last => return Err(Error::StaleTimestamp { last, got: time }),
            Some(last) => (-self.lambda * (time - last)).exp(),
            None => 1.0,
        };
        self.last_time = Some(time);
        Ok(factor)
    }

    /// Decay factor from `from` to `to` without moving the clock.
    pub fn factor(&self, from: f64, to: f64) -> f64 {
        (-self.lambda * (to - from)).exp()
    }
}

/// Reads `{"t": <real>, "items": [<id>, ...]}` lines. Blank lines are skipped.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<Batch<String>>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let batch: Batch<String> = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if !batch.time.is_finite() {
            return Err(Error::InvalidTimestamp(batch.time));
        }
        out.push(batch);
    }
    Ok(out)
}

/// Assigns dense `u64` ids to a stream with batches of the given sizes at
/// times `1, 2, ...`.
pub fn numbered_stream(sizes: &[usize]) -> Vec<Batch<u64>> {
    let mut next = 0u64;
    sizes
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let items = (next..next + b as u64).collect();
            next += b as u64;
            Batch::new((i + 1) as f64, items)
        })
        .collect()
}
