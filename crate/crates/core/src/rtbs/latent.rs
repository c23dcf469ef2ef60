//! Fractional-size latent samples and the downsampling step.
//!
//! A latent sample of weight `C` holds `floor(C)` full items and, when `C` is
//! not an integer, one partial item. Realizing it keeps every full item and the
//! partial item with probability `frc(C)`, so the expected realized size is `C`.
//!
//! Downsampling is split in two: [`plan_downsample`] makes the single scalar
//! decision (one uniform draw) and returns a [`DownsampleEdit`], and
//! [`apply_edit`] carries the edit out by picking concrete items. The
//! distributed simulator reuses the first half and replaces the second.

use crate::error::{Error, Result};
use crate::randkit::{remove_random, RandomSource};

/// Weights within this distance of an integer are treated as that integer.
pub const SNAP_TOLERANCE: f64 = 1e-9;

pub fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP_TOLERANCE {
        r
    } else {
        x
    }
}

/// Fractional part `x - floor(x)`.
pub fn frc(x: f64) -> f64 {
    x - x.floor()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatentSample<T> {
    pub(crate) full: Vec<T>,
    pub(crate) partial: Option<T>,
    pub(crate) weight: f64,
}

impl<T> Default for LatentSample<T> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<T> LatentSample<T> {
    pub fn empty() -> Self {
        LatentSample { full: Vec::new(), partial: None, weight: 0.0 }
    }

    /// Builds a latent sample after checking `|full| = floor(weight)` and that
    /// a partial item is present exactly when the weight is fractional.
    pub fn new(full: Vec<T>, partial: Option<T>, weight: f64) -> Result<Self> {
        let weight = snap(weight);
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::param(format!("latent weight {weight}")));
        }
        if full.len() as f64 != weight.floor() {
            return Err(Error::param(format!(
                "{} full items for weight {weight}",
                full.len()
            )));
        }
        if partial.is_some() != (frc(weight) > 0.0) {
            return Err(Error::param(format!(
                "partial item presence does not match weight {weight}"
            )));
        }
        Ok(LatentSample { full, partial, weight })
    }

    pub fn full(&self) -> &[T] {
        &self.full
    }

    pub fn partial(&self) -> Option<&T> {
        self.partial.as_ref()
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn into_parts(self) -> (Vec<T>, Option<T>, f64) {
        (self.full, self.partial, self.weight)
    }

    /// Draws a concrete sample: all full items, plus the partial item with
    /// probability `frc(weight)`.
    pub fn realize<R: RandomSource + ?Sized>(&self, rng: &mut R) -> Vec<&T> {
        let mut out: Vec<&T> = self.full.iter().collect();
        if let Some(p) = &self.partial {
            if rng.bernoulli(frc(self.weight)) {
                out.push(p);
            }
        }
        out
    }

    pub(crate) fn check(&self) -> bool {
        self.full.len() as f64 == self.weight.floor() && self.partial.is_some() == (frc(self.weight) > 0.0)
    }
}

/// What happens to the current partial item during a downsample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartialFate {
    Keep,
    Drop,
    /// The partial item becomes a full item.
    Promote,
}

/// Item-level edit that realizes one downsample decision.
///
/// Applied in order: delete `deletes` random full items, then (if `demote`)
/// pick one surviving full item to become the new partial item, then apply
/// `partial` to the old partial item.
#[derive(Clone, Debug, PartialEq)]
pub struct DownsampleEdit {
    pub from: f64,
    pub to: f64,
    pub deletes: usize,
    pub demote: bool,
    pub partial: PartialFate,
}

impl DownsampleEdit {
    /// Empties a latent sample of weight `from`.
    pub fn clear(from: f64) -> Self {
        DownsampleEdit {
            from,
            to: 0.0,
            deletes: from.floor() as usize,
            demote: false,
            partial: PartialFate::Drop,
        }
    }
}

/// Decides how to shrink a latent sample from weight `from` to `to`,
/// consuming exactly one Bernoulli draw. Every item's appearance probability
/// is scaled by `to / from`.
pub fn plan_downsample<R: RandomSource + ?Sized>(from: f64, to: f64, rng: &mut R) -> Result<DownsampleEdit> {
    if !(to > 0.0 && to < from && from.is_finite()) {
        return Err(Error::TargetOutOfRange { from, to });
    }
    let k = from.floor() as usize;
    let f = from - k as f64;
    let k2 = to.floor() as usize;
    let f2 = to - k2 as f64;
    let shrink = to / from;

    let (mut deletes, mut demote, mut partial) = if k2 == 0 {
        // Only the partial slot survives; swap in a full item unless the old
        // partial item wins.
        if rng.bernoulli(f / from) {
            (k, false, PartialFate::Keep)
        } else {
            (k - 1, true, PartialFate::Drop)
        }
    } else if k2 == k {
        let rho = (1.0 - shrink * f) / (1.0 - f2);
        if rng.bernoulli(rho) {
            (0, false, PartialFate::Keep)
        } else {
            (0, true, PartialFate::Promote)
        }
    } else if rng.bernoulli(shrink * f) {
        (k - k2, true, PartialFate::Promote)
    } else {
        (k - k2 - 1, true, PartialFate::Drop)
    };

    if f2 == 0.0 {
        // No partial slot at the target: a demoted item is simply deleted.
        if demote {
            demote = false;
            deletes += 1;
        }
        if partial == PartialFate::Keep {
            partial = PartialFate::Drop;
        }
    }
    Ok(DownsampleEdit { from, to, deletes, demote, partial })
}

/// Carries out `edit` by choosing concrete items uniformly at random.
pub fn apply_edit<T, R: RandomSource + ?Sized>(
    latent: &mut LatentSample<T>,
    edit: &DownsampleEdit,
    rng: &mut R,
) -> Result<()> {
    let survivors = latent.full.len().checked_sub(edit.deletes);
    if latent.weight != edit.from || survivors.is_none() || (edit.demote && survivors == Some(0)) {
        return Err(Error::TargetOutOfRange { from: latent.weight, to: edit.to });
    }
    remove_random(&mut latent.full, edit.deletes, rng);
    let demoted = if edit.demote {
        let j = rng.index(latent.full.len());
        Some(latent.full.swap_remove(j))
    } else {
        None
    };
    match edit.partial {
        PartialFate::Keep => {}
        PartialFate::Drop => latent.partial = None,
        PartialFate::Promote => {
            if let Some(p) = latent.partial.take() {
                latent.full.push(p);
            }
        }
    }
    if demoted.is_some() {
        latent.partial = demoted;
    }
    latent.weight = edit.to;
    debug_assert!(latent.check());
    Ok(())
}

/// Shrinks `latent` to weight `target`.
///
/// A target at or above the current weight is rejected, as is a non-positive
/// target; use [`LatentSample::empty`] to clear.
pub fn downsample<T, R: RandomSource + ?Sized>(latent: &mut LatentSample<T>, target: f64, rng: &mut R) -> Result<()> {
    let target = snap(target);
    let edit = plan_downsample(latent.weight, target, rng)?;
    apply_edit(latent, &edit, rng)
}
