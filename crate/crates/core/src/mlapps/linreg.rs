//! Two-covariate least squares without an intercept.

use super::data::Example;
use crate::error::{Error, Result};

/// Solves the 2x2 normal equations. Fails when the covariates are (nearly)
/// collinear.
pub fn linreg_fit(sample: &[&Example]) -> Result<[f64; 2]> {
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for e in sample {
        let [x1, x2] = e.x;
        a11 += x1 * x1;
        a12 += x1 * x2;
        a22 += x2 * x2;
        b1 += x1 * e.y;
        b2 += x2 * e.y;
    }
    let det = a11 * a22 - a12 * a12;
    if det.is_nan() || det <= 1e-12 * (a11 * a22).max(f64::MIN_POSITIVE) {
        return Err(Error::RankDeficient);
    }
    Ok([(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det])
}

pub fn linreg_mse(beta: [f64; 2], batch: &[Example]) -> f64 {
    if batch.is_empty() {
        return 0.0;
    }
    batch
        .iter()
        .map(|e| (e.y - beta[0] * e.x[0] - beta[1] * e.x[1]).powi(2))
        .sum::<f64>()
        / batch.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(x1: f64, x2: f64, y: f64) -> Example {
        Example { id: 0, x: [x1, x2], label: 0, y }
    }

    #[test]
    fn exact_fit() {
        let pts: Vec<Example> =
            (0..20).map(f64::from).map(|t| ex(t.sin(), t.cos(), 2.0 * t.sin() - 0.5 * t.cos())).collect();
        let s: Vec<&Example> = pts.iter().collect();
        let b = linreg_fit(&s).unwrap();
        assert!((b[0] - 2.0).abs() < 1e-9 && (b[1] + 0.5).abs() < 1e-9);
        assert!(linreg_mse(b, &pts) < 1e-18);
    }

    #[test]
    fn collinear_rejected() {
        let pts = [ex(1.0, 2.0, 1.0), ex(2.0, 4.0, 3.0)];
        let s: Vec<&Example> = pts.iter().collect();
        assert_eq!(linreg_fit(&s), Err(Error::RankDeficient));
        assert_eq!(linreg_fit(&[]), Err(Error::RankDeficient));
    }
}
