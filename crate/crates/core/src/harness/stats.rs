//! Small statistical helpers used by the checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Mean of the worst `ceil(z% * len)` values, where larger is worse.
pub fn expected_shortfall(values: &[f64], z: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("expected shortfall of no values".into()));
    }
    if !(z > 0.0 && z <= 100.0) {
        return Err(Error::param(format!("shortfall level {z}% must be in (0, 100]")));
    }
    let count = ((z / 100.0 * values.len() as f64).ceil() as usize).clamp(1, values.len());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(sorted[..count].iter().sum::<f64>() / count as f64)
}

/// Binomial standard error of a frequency over `reps` trials.
pub fn binomial_std_error(freq: f64, reps: u64) -> f64 {
    (freq * (1.0 - freq) / reps as f64).sqrt()
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance.
pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

impl ChiSquare {
    fn from_stat(statistic: f64, df: usize) -> Self {
        let p_value = if df == 0 {
            1.0
        } else {
            1.0 - ChiSquared::new(df as f64).expect("positive df").cdf(statistic)
        };
        ChiSquare { statistic, df, p_value }
    }

    /// Critical value of the statistic at significance `alpha`.
    pub fn critical(&self, alpha: f64) -> f64 {
        if self.df == 0 {
            return 0.0;
        }
        ChiSquared::new(self.df as f64).expect("positive df").inverse_cdf(1.0 - alpha)
    }
}

/// Pearson goodness-of-fit of `observed` counts against cell probabilities.
/// Cells with zero probability must be empty.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquare> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(Error::param("observed counts and probabilities differ in length"));
    }
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        if p <= 0.0 {
            if o > 0 {
                return Ok(ChiSquare { statistic: f64::INFINITY, df: 1, p_value: 0.0 });
            }
            continue;
        }
        let e = p * total as f64;
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    Ok(ChiSquare::from_stat(stat, cells.saturating_sub(1)))
}

/// Two-sample homogeneity test on paired category counts.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    if a.len() != b.len() {
        return Err(Error::param("count vectors differ in length"));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let n = na + nb;
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        let (ea, eb) = (col * na / n, col * nb / n);
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
        cells += 1;
    }
    Ok(ChiSquare::from_stat(stat, cells.saturating_sub(1)))
}

/// Kolmogorov-Smirnov distance between a sample and U(0, 1), with the
/// asymptotic 1% critical value `1.628 / sqrt(n)`.
pub fn ks_uniform(samples: &[f64]) -> (f64, f64) {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max);
    (d, 1.628 / n.sqrt())
}
