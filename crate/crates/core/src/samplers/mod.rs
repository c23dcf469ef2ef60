//! Time-biased and baseline stream samplers behind one trait.
//!
//! | sampler | size bound | time bias |
//! |---|---|---|
//! | [`Btbs`] | none | exact, `exp(-lambda * age)` |
//! | [`Ttbs`] | `n` in expectation only | exact |
//! | [`Rtbs`](crate::rtbs::Rtbs) | hard, `<= n` | exact |
//! | [`Brs`] | hard | none (uniform) |
//! | [`Bchao`] | hard | only after the reservoir fills |
//! | [`SlidingWindow`] | hard | hard cutoff |

mod bchao;
mod bounds;
mod brs;
mod btbs;
mod sliding;
mod ttbs;

use std::fmt;
use std::str::FromStr;

pub use bchao::Bchao;
pub use bounds::{theorem1_bounds, ttbs_expected_size, BoundDirection, SizeBound};
pub use brs::Brs;
pub use btbs::Btbs;
pub use sliding::SlidingWindow;
pub use ttbs::Ttbs;

use crate::batch::Batch;
use crate::error::{Error, Result};
use crate::randkit::RandomStream;
use crate::rtbs::Rtbs;

/// Common interface of all batch samplers.
pub trait TemporalSampler<T>: Send {
    fn name(&self) -> &'static str;

    /// Incorporates a batch. Timestamps must strictly increase; on error the
    /// sampler is left unchanged.
    fn observe(&mut self, batch: Batch<T>, rng: &mut RandomStream) -> Result<()>;

    /// Draws a concrete sample from the current state.
    fn realize(&self, rng: &mut RandomStream) -> Vec<&T>;

    fn expected_size(&self) -> f64;

    /// Sampler-specific running weight (decayed count, or raw count for the
    /// uniform baselines).
    fn total_weight(&self) -> f64;

    /// Closed-form inclusion probability when the sampler has one.
    fn analytic_inclusion(&self, _arrival: f64, _query: f64) -> Option<f64> {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SamplerKind {
    Btbs,
    Brs,
    Ttbs,
    Rtbs,
    Bchao,
    Sliding,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 6] = [
        SamplerKind::Btbs,
        SamplerKind::Brs,
        SamplerKind::Ttbs,
        SamplerKind::Rtbs,
        SamplerKind::Bchao,
        SamplerKind::Sliding,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SamplerKind::Btbs => "btbs",
            SamplerKind::Brs => "brs",
            SamplerKind::Ttbs => "ttbs",
            SamplerKind::Rtbs => "rtbs",
            SamplerKind::Bchao => "bchao",
            SamplerKind::Sliding => "sw",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "btbs" | "b-tbs" => Ok(SamplerKind::Btbs),
            "brs" | "b-rs" => Ok(SamplerKind::Brs),
            "ttbs" | "t-tbs" => Ok(SamplerKind::Ttbs),
            "rtbs" | "r-tbs" => Ok(SamplerKind::Rtbs),
            "bchao" | "b-chao" | "chao" => Ok(SamplerKind::Bchao),
            "sw" | "sliding" | "sliding-window" => Ok(SamplerKind::Sliding),
            other => Err(Error::param(format!("unknown sampler '{other}'"))),
        }
    }
}

/// Everything needed to construct any sampler.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    pub lambda: f64,
    pub n: usize,
    /// Mean batch size; only T-TBS uses it.
    pub mean_batch: f64,
}

impl SamplerConfig {
    pub fn new(kind: SamplerKind, lambda: f64, n: usize, mean_batch: f64) -> Self {
        SamplerConfig { kind, lambda, n, mean_batch }
    }

    pub fn build<T: Clone + Send + 'static>(&self) -> Result<Box<dyn TemporalSampler<T>>> {
        Ok(match self.kind {
            SamplerKind::Btbs => Box::new(Btbs::new(self.lambda)?),
            SamplerKind::Brs => Box::new(Brs::new(self.n)?),
            SamplerKind::Ttbs => Box::new(Ttbs::new(self.lambda, self.n, self.mean_batch)?),
            SamplerKind::Rtbs => Box::new(Rtbs::new(self.lambda, self.n)?),
            SamplerKind::Bchao => Box::new(Bchao::new(self.lambda, self.n)?),
            SamplerKind::Sliding => Box::new(SlidingWindow::new(self.n)?),
        })
    }

    /// Builds a sampler that starts from `items`, all observed at `time`.
    pub fn build_with_initial<T: Clone + Send + 'static>(
        &self,
        items: Vec<T>,
        time: f64,
    ) -> Result<Box<dyn TemporalSampler<T>>> {
        Ok(match self.kind {
            SamplerKind::Btbs => Box::new(Btbs::with_initial(self.lambda, items, time)?),
            SamplerKind::Ttbs => Box::new(Ttbs::with_initial(self.lambda, self.n, self.mean_batch, items, time)?),
            SamplerKind::Rtbs => Box::new(Rtbs::with_initial(self.lambda, self.n, items, time)?),
            other => {
                return Err(Error::param(format!("{other} does not support an initial sample")));
            }
        })
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("decay rate {lambda} must be finite and non-negative")))
    }
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n > 0 {
        Ok(())
    } else {
        Err(Error::param("target sample size must be positive"))
    }
}
