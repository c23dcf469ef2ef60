//! Synthetic drifting data: a Gaussian-mixture classification task and a
//! two-covariate linear regression task, each with a normal and an abnormal
//! mode.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::randkit::{RandomSource, RandomStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Normal,
    Abnormal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pattern {
    /// `normal` normal steps alternating with `abnormal` abnormal steps.
    Periodic { normal: u32, abnormal: u32 },
    /// Abnormal on scoring steps `start..=end`, normal otherwise.
    Single { start: u32, end: u32 },
}

impl Pattern {
    /// Mode at 1-based scoring step `step`.
    pub fn mode_at(&self, step: u32) -> Mode {
        let abnormal = match *self {
            Pattern::Periodic { normal, abnormal } => (step - 1) % (normal + abnormal) >= normal,
            Pattern::Single { start, end } => (start..=end).contains(&step),
        };
        if abnormal {
            Mode::Abnormal
        } else {
            Mode::Normal
        }
    }
}

impl FromStr for Pattern {
    type Err = Error;

    /// `periodic:D,E` or `single:START,END`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad schedule pattern '{s}'"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let (a, b) = args.split_once(',').ok_or_else(bad)?;
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        match kind {
            "periodic" if a >= 1 && b >= 1 => Ok(Pattern::Periodic { normal: a, abnormal: b }),
            "single" if a >= 1 && a <= b => Ok(Pattern::Single { start: a, end: b }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Pattern::Periodic { normal, abnormal } => write!(f, "periodic:{normal},{abnormal}"),
            Pattern::Single { start, end } => write!(f, "single:{start},{end}"),
        }
    }
}

/// Warm-up batches (always normal) followed by patterned scoring steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModeSchedule {
    pub pattern: Pattern,
    pub warmup_batches: u32,
}

/// One labelled point. Classification uses `label`; regression uses `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub id: u64,
    pub x: [f64; 2],
    pub label: u32,
    pub y: f64,
}

pub const CENTROIDS: usize = 100;
pub const EXTENT: f64 = 80.0;
pub const NORMAL_COEFFS: [f64; 2] = [4.2, -0.4];
pub const ABNORMAL_COEFFS: [f64; 2] = [-3.6, 3.8];

#[derive(Clone, Debug, PartialEq)]
pub enum DriftDataset {
    /// Class `c` is centred at `centroids[c]`. Classes `0..50` are five times
    /// as frequent as the rest in normal mode; the ratio flips in abnormal mode.
    Classification { centroids: Vec<[f64; 2]> },
    Regression,
}

fn normal(rng: &mut RandomStream) -> f64 {
    StandardNormal.sample(rng)
}

impl DriftDataset {
    pub fn classification(rng: &mut RandomStream) -> Self {
        let centroids = (0..CENTROIDS).map(|_| [EXTENT * rng.uniform(), EXTENT * rng.uniform()]).collect();
        DriftDataset::Classification { centroids }
    }

    /// Draws `size` examples with ids starting at `first_id`.
    pub fn generate_batch(&self, mode: Mode, size: usize, first_id: u64, rng: &mut RandomStream) -> Vec<Example> {
        (0..size as u64)
            .map(|i| {
                let id = first_id + i;
                match self {
                    DriftDataset::Classification { centroids } => {
                        let half = centroids.len() / 2;
                        // Five units of mass on the frequent half, one on the rest.
                        let frequent = rng.index(6) < 5;
                        let first_half = frequent == (mode == Mode::Normal);
                        let label = if first_half { rng.index(half) } else { half + rng.index(centroids.len() - half) };
                        let c = centroids[label];
                        let x = [c[0] + normal(rng), c[1] + normal(rng)];
                        Example { id, x, label: label as u32, y: label as f64 }
                    }
                    DriftDataset::Regression => {
                        let b = if mode == Mode::Normal { NORMAL_COEFFS } else { ABNORMAL_COEFFS };
                        let x = [rng.uniform(), rng.uniform()];
                        let y = b[0] * x[0] + b[1] * x[1] + normal(rng);
                        Example { id, x, label: 0, y }
                    }
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_and_single_modes() {
        let p = Pattern::Periodic { normal: 10, abnormal: 10 };
        assert_eq!(p.mode_at(1), Mode::Normal);
        assert_eq!(p.mode_at(10), Mode::Normal);
        assert_eq!(p.mode_at(11), Mode::Abnormal);
        assert_eq!(p.mode_at(20), Mode::Abnormal);
        assert_eq!(p.mode_at(21), Mode::Normal);
        let s: Pattern = "single:10,20".parse().unwrap();
        assert_eq!(s.mode_at(9), Mode::Normal);
        assert_eq!(s.mode_at(10), Mode::Abnormal);
        assert_eq!(s.mode_at(21), Mode::Normal);
        assert!("periodic:0,3".parse::<Pattern>().is_err());
        assert!("single:5,2".parse::<Pattern>().is_err());
    }

    #[test]
    fn empty_batch() {
        let mut rng = RandomStream::new(0);
        assert!(DriftDataset::Regression.generate_batch(Mode::Normal, 0, 0, &mut rng).is_empty());
    }

    #[test]
    fn centroids_in_extent() {
        let mut rng = RandomStream::new(0);
        let DriftDataset::Classification { centroids } = DriftDataset::classification(&mut rng) else {
            unreachable!()
        };
        assert_eq!(centroids.len(), 100);
        assert!(centroids.iter().flatten().all(|&v| (0.0..80.0).contains(&v)));
    }
}
