//! Size guarantees for T-TBS under deterministic-ish batch sizes.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundDirection {
    /// `P[C_t >= (1 + eps) n]`
    Upper,
    /// `P[C_t <= (1 - eps) n]`
    Lower,
}

/// Exponent and leading-order tail bound `exp(-n nu)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SizeBound {
    pub nu: f64,
    pub bound: f64,
}

/// Chernoff-style tail bound on the T-TBS sample size for relative deviation
/// `eps` when batch sizes vary by at most a factor `r` (`r = 1` for constant
/// batches).
pub fn theorem1_bounds(n: usize, eps: f64, r: f64, direction: BoundDirection) -> Result<SizeBound> {
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::param(format!("batch size ratio {r} must be at least 1")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::param(format!("deviation {eps} must be positive")));
    }
    let nu = match direction {
        BoundDirection::Upper => (1.0 + eps) * ((1.0 + eps) / r).ln() - (1.0 + eps - r),
        BoundDirection::Lower => {
            if eps >= 1.0 {
                return Err(Error::param(format!("lower deviation {eps} must be below 1")));
            }
            (1.0 - eps) * ((1.0 - eps) / r).ln() - (1.0 - eps - r)
        }
    };
    Ok(SizeBound { nu, bound: (-(n as f64) * nu).exp() })
}

/// Expected T-TBS sample size after `t` unit steps from size `c0` when the
/// mean batch equals the configured one: `n + p^t (c0 - n)`.
pub fn ttbs_expected_size(n: f64, lambda: f64, c0: f64, t: u32) -> f64 {
    n + (-lambda * t as f64).exp() * (c0 - n)
}
