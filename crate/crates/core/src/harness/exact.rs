//! Exact appearance probabilities for one downsampling step.
//!
//! Two independent routes to the same numbers:
//! - [`downsample_oracle`] is a closed-form case analysis of the three
//!   branches (target below one, same integer part, smaller integer part),
//!   evaluated in exact rational arithmetic;
//! - [`enumerate_downsample`] runs the real [`downsample`] under a scripted
//!   random source that walks every branch and every item choice, weighting
//!   each path by its probability.
//!
//! Item appearance means being in the realized sample, so a partial item
//! counts with weight `frc(C)`.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::randkit::RandomSource;
use crate::rtbs::{downsample, frc, LatentSample};

pub type Rational = Ratio<i64>;

/// Appearance probability of each full item (all equal by symmetry) and of
/// the partial item, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactAppearance<V> {
    pub full: V,
    pub partial: Option<V>,
}

fn floor_frac(x: Rational) -> (i64, Rational) {
    let k = x.floor();
    (k.to_integer(), x - k)
}

/// Closed-form appearance probabilities after downsampling a latent sample of
/// weight `from` (with `floor(from) <= 6`) to weight `to`.
pub fn downsample_oracle(from: Rational, to: Rational) -> Result<ExactAppearance<Rational>> {
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    if !(to > zero && to < from) {
        return Err(Error::TargetOutOfRange { from: ratio_f64(from), to: ratio_f64(to) });
    }
    let (k, f) = floor_frac(from);
    let (k2, f2) = floor_frac(to);
    if k > 6 {
        return Err(Error::param("oracle limited to floor(C) <= 6"));
    }
    let kr = Rational::from_integer(k);
    let k2r = Rational::from_integer(k2);

    let (full, partial) = if k2 == 0 {
        // The partial slot keeps the old partial item w.p. f/C, else a
        // uniformly chosen full item.
        let keep = f / from;
        let full = if k > 0 { f2 * (one - keep) / kr } else { zero };
        (full, f2 * keep)
    } else if k2 == k {
        let rho = (one - to / from * f) / (one - f2);
        let full = one - (one - rho) * (one - f2) / kr;
        (full, rho * f2 + (one - rho))
    } else {
        let p = to / from * f;
        let full = p * (k2r - one + f2) / kr + (one - p) * (k2r + f2) / kr;
        (full, p)
    };
    Ok(ExactAppearance { full, partial: (f > zero).then_some(partial) })
}

/// Exact value of a decimal literal such as `2.4` (= 12/5).
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("'{s}' is not a decimal number"));
    let s = s.trim();
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let denom = 10i64.pow(frac.len() as u32);
    let whole: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let part: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    if whole < 0 || int.starts_with('-') {
        return Err(bad());
    }
    let numer = whole.checked_mul(denom).and_then(|w| w.checked_add(part)).ok_or_else(bad)?;
    Ok(Rational::new(numer, denom))
}

pub fn ratio_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Plays back a fixed prefix of choices and then always takes the first
/// option, recording the arity of every decision so the caller can advance
/// to the next path.
struct Scripted {
    prefix: Vec<usize>,
    taken: Vec<(usize, usize)>,
    prob: f64,
}

impl Scripted {
    fn choose(&mut self, arity: usize) -> usize {
        let i = self.taken.len();
        let c = self.prefix.get(i).copied().unwrap_or(0);
        self.taken.push((c, arity));
        c
    }
}

impl RandomSource for Scripted {
    fn bernoulli(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            self.choose(1);
            false
        } else if p >= 1.0 {
            self.choose(1);
            true
        } else if self.choose(2) == 0 {
            self.prob *= p;
            true
        } else {
            self.prob *= 1.0 - p;
            false
        }
    }

    fn index(&mut self, len: usize) -> usize {
        self.prob /= len as f64;
        self.choose(len)
    }
}

/// Appearance probability of every item (ids `0..floor(from)` full, then the
/// partial item) after [`downsample`], by exhaustive enumeration. Also returns
/// the total probability mass visited, which must be 1.
pub fn enumerate_downsample(from: f64, to: f64) -> Result<(Vec<f64>, f64)> {
    let k = from.floor() as usize;
    let has_partial = frc(from) > 0.0;
    let items = k + usize::from(has_partial);
    let mut appear = vec![0.0; items];
    let mut mass = 0.0;
    let mut prefix: Vec<usize> = Vec::new();
    loop {
        let mut latent =
            LatentSample::new((0..k).collect(), has_partial.then_some(k), from).expect("well-formed start");
        let mut script = Scripted { prefix: prefix.clone(), taken: Vec::new(), prob: 1.0 };
        downsample(&mut latent, to, &mut script)?;
        mass += script.prob;
        let f2 = frc(latent.weight());
        for &i in latent.full() {
            appear[i] += script.prob;
        }
        if let Some(&i) = latent.partial() {
            appear[i] += script.prob * f2;
        }
        // Odometer step over the recorded decisions.
        let mut taken = script.taken;
        while let Some(&(c, arity)) = taken.last() {
            if c + 1 < arity {
                break;
            }
            taken.pop();
        }
        match taken.last_mut() {
            None => break,
            Some(last) => last.0 += 1,
        }
        prefix = taken.into_iter().map(|(c, _)| c).collect();
    }
    Ok((appear, mass))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn three_items_to_one_and_a_half() {
        let a = downsample_oracle(r(3, 1), r(3, 2)).unwrap();
        assert_eq!(a.full, r(1, 2));
        assert_eq!(a.partial, None);
    }

    #[test]
    fn same_integer_part_partial_probability() {
        let a = downsample_oracle(r(24, 10), r(21, 10)).unwrap();
        assert_eq!(a.partial, Some(r(35, 100)));
        assert_eq!(a.full, r(21, 24));
    }

    #[test]
    fn worked_example_with_partial() {
        // C = 3.2 with partial weight 0.2, down to 1.6.
        let a = downsample_oracle(r(16, 5), r(8, 5)).unwrap();
        assert_eq!(a.partial, Some(r(1, 10)));
        assert_eq!(a.full, r(1, 2));
    }

    #[test]
    fn approaches_prior_near_from() {
        let a = downsample_oracle(r(2999, 1000), r(2998, 1000)).unwrap();
        assert!((ratio_f64(a.full) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn enumeration_matches_worked_example() {
        let (p, mass) = enumerate_downsample(3.0, 1.5).unwrap();
        assert!((mass - 1.0).abs() < 1e-12);
        for v in p {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn decimal_literals() {
        assert_eq!(parse_rational("2.4").unwrap(), r(12, 5));
        assert_eq!(parse_rational("3").unwrap(), r(3, 1));
        assert_eq!(parse_rational(".25").unwrap(), r(1, 4));
        assert!(parse_rational("-1").is_err());
        assert!(parse_rational("1e3").is_err());
    }

    #[test]
    fn rejects_bad_targets() {
        assert!(downsample_oracle(r(2, 1), r(2, 1)).is_err());
        assert!(downsample_oracle(r(2, 1), r(0, 1)).is_err());
        assert!(downsample_oracle(r(8, 1), r(1, 1)).is_err());
    }
}
