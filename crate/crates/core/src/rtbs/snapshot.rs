//! JSON snapshots of an R-TBS reservoir.
//!
//! Real-valued fields are stored as decimal strings so that a round trip
//! reproduces the exact `f64` bits.

use serde::{Deserialize, Serialize};

use super::{LatentSample, Rtbs};
use crate::batch::DecayClock;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RtbsSnapshot<T> {
    pub lambda: String,
    pub n: usize,
    #[serde(rename = "W")]
    pub total_weight: String,
    #[serde(rename = "C")]
    pub weight: String,
    pub full_items: Vec<T>,
    pub partial_item: Option<T>,
    pub last_time: Option<String>,
}

fn parse(field: &str, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| Error::Parse(format!("snapshot field {field}: {e}")))
}

impl<T: Clone> Rtbs<T> {
    pub fn snapshot(&self) -> RtbsSnapshot<T> {
        RtbsSnapshot {
            lambda: self.clock.lambda().to_string(),
            n: self.n,
            total_weight: self.total_weight.to_string(),
            weight: self.latent.weight.to_string(),
            full_items: self.latent.full.clone(),
            partial_item: self.latent.partial.clone(),
            last_time: self.clock.last_time().map(|t| t.to_string()),
        }
    }
}

impl<T> Rtbs<T> {
    pub fn from_snapshot(snap: RtbsSnapshot<T>) -> Result<Self> {
        let lambda = parse("lambda", &snap.lambda)?;
        let mut s = Rtbs::new(lambda, snap.n)?;
        let total_weight = parse("W", &snap.total_weight)?;
        let weight = parse("C", &snap.weight)?;
        if !(total_weight.is_finite() && total_weight >= 0.0) || weight > snap.n as f64 {
            return Err(Error::Parse("snapshot weights out of range".into()));
        }
        s.total_weight = total_weight;
        s.latent = LatentSample::new(snap.full_items, snap.partial_item, weight)?;
        if let Some(t) = snap.last_time {
            s.clock = DecayClock::starting_at(lambda, parse("last_time", &t)?);
        }
        Ok(s)
    }
}
