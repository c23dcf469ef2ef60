//! Temporally-biased sampling over batched streams.
//!
//! The central sampler is [`rtbs::Rtbs`], a bounded reservoir in which an
//! item's chance of being in the sample decays as `exp(-lambda * age)`. The
//! crate also ships the baselines it is compared against ([`samplers`]), an
//! in-process model of the partitioned variant ([`distsim`]), the Monte Carlo
//! and exact checks used to verify all of them ([`harness`]), and the model
//! retraining experiments ([`mlapps`]).

pub mod batch;
pub mod distsim;
pub mod error;
pub mod harness;
pub mod mlapps;
pub mod randkit;
pub mod rtbs;
pub mod samplers;

pub use batch::Batch;
pub use error::{Error, Result};
pub use randkit::{RandomSource, RandomStream};
pub use rtbs::{LatentSample, Rtbs};
pub use samplers::{SamplerConfig, SamplerKind, TemporalSampler};
