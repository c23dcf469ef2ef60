//! Seeded random streams and the discrete variates the samplers need.
//!
//! A [`RandomStream`] is addressed by a root seed plus a path of integers
//! (replication, step, partition, purpose). Two streams with the same address
//! produce the same values regardless of how many threads run or in which order
//! they are created, which is what keeps parallel Monte Carlo runs reproducible.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};

/// Purpose tags used as the last path element when deriving substreams.
pub mod purpose {
    pub const SAMPLER: u64 = 0x5A4D;
    pub const REALIZE: u64 = 0x5245;
    pub const BATCH_SIZES: u64 = 0x4253;
    pub const DATA: u64 = 0x4441;
    pub const COORDINATOR: u64 = 0xC00D;
    pub const WORKER: u64 = 0x574B;
    pub const POLICY: u64 = 0x504F;
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stateless 64-bit hash, also used by the simulated key-value store.
pub fn hash64(x: u64) -> u64 {
    mix64(x.wrapping_add(GOLDEN))
}

fn derive_key(seed: u64, path: &[u64]) -> [u8; 32] {
    let mut state = mix64(seed ^ GOLDEN);
    for (depth, &p) in path.iter().enumerate() {
        state = mix64(state ^ mix64(p.wrapping_add(GOLDEN.wrapping_mul(depth as u64 + 1))));
    }
    state = mix64(state ^ (path.len() as u64));
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN);
        chunk.copy_from_slice(&mix64(state).to_le_bytes());
    }
    key
}

/// Minimal source of randomness used by sampling routines that must also run
/// under a scripted driver (see the exact enumerator in the harness).
pub trait RandomSource {
    /// Returns `true` with probability `p`; `p` outside `[0, 1]` saturates.
    fn bernoulli(&mut self, p: f64) -> bool;
    /// Uniform index in `0..len`. `len` must be positive.
    fn index(&mut self, len: usize) -> usize;
}

/// Deterministic, path-addressed random stream.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    path: Vec<u64>,
    rng: ChaCha12Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::with_path(seed, &[])
    }

    pub fn with_path(seed: u64, path: &[u64]) -> Self {
        RandomStream {
            seed,
            path: path.to_vec(),
            rng: ChaCha12Rng::from_seed(derive_key(seed, path)),
        }
    }

    /// Child stream at `path ++ [index]`. Independent of how much of `self`
    /// has been consumed.
    pub fn substream(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self::with_path(self.seed, &path)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

impl RandomSource for RandomStream {
    #[inline]
    fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    #[inline]
    fn index(&mut self, len: usize) -> usize {
        assert!(len > 0, "index() on an empty range");
        self.rng.random_range(0..len)
    }
}

/// Binomial(trials, p). Degenerate probabilities short-circuit without
/// consuming randomness.
pub fn binomial(trials: u64, p: f64, rng: &mut RandomStream) -> u64 {
    assert!((0.0..=1.0).contains(&p), "binomial probability {p} outside [0, 1]");
    if trials == 0 || p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return trials;
    }
    Binomial::new(trials, p)
        .expect("validated binomial parameters")
        .sample(rng)
}

/// Number of successes when drawing `k` items without replacement from an
/// urn holding `a` successes and `b` failures.
pub fn hypergeometric<R: RandomSource + ?Sized>(k: u64, a: u64, b: u64, rng: &mut R) -> Result<u64> {
    let total = a
        .checked_add(b)
        .ok_or_else(|| Error::param("hypergeometric population overflows u64"))?;
    if k > total {
        return Err(Error::param(format!(
            "cannot draw {k} items from a population of {total}"
        )));
    }
    // Drawing the complement is cheaper when k is past the midpoint.
    if k > total / 2 {
        return Ok(a - hypergeometric(total - k, a, b, rng)?);
    }
    let (mut good, mut left, mut hits) = (a, total, 0u64);
    for _ in 0..k {
        if good == 0 {
            break;
        }
        if (rng.index(left as usize) as u64) < good {
            good -= 1;
            hits += 1;
        }
        left -= 1;
    }
    Ok(hits)
}

/// Splits `k` draws without replacement over categories of the given sizes.
pub fn multivariate_hypergeometric<R: RandomSource + ?Sized>(
    k: u64,
    sizes: &[u64],
    rng: &mut R,
) -> Result<Vec<u64>> {
    let mut rest: u64 = sizes.iter().sum();
    if k > rest {
        return Err(Error::param(format!(
            "cannot draw {k} items from a population of {rest}"
        )));
    }
    let mut left = k;
    let mut out = Vec::with_capacity(sizes.len());
    for &size in sizes {
        rest -= size;
        let c = if left == 0 {
            0
        } else if rest == 0 {
            left
        } else {
            hypergeometric(left, size, rest, rng)?
        };
        left -= c;
        out.push(c);
    }
    Ok(out)
}

/// Rounds `x` down or up so that the expected result equals `x`.
pub fn stoch_round<R: RandomSource + ?Sized>(x: f64, rng: &mut R) -> u64 {
    assert!(x.is_finite() && x >= 0.0, "stoch_round of {x}");
    let floor = x.floor();
    let frac = x - floor;
    floor as u64 + u64::from(frac > 0.0 && rng.bernoulli(frac))
}

/// Indices of a uniform random `m`-subset of `0..len`, in selection order.
pub fn sample_indices<R: RandomSource + ?Sized>(len: usize, m: usize, rng: &mut R) -> Vec<usize> {
    assert!(m <= len, "cannot pick {m} of {len}");
    let mut idx: Vec<usize> = (0..len).collect();
    for i in 0..m {
        let j = i + rng.index(len - i);
        idx.swap(i, j);
    }
    idx.truncate(m);
    idx
}

/// Uniform random `m`-subset of `items` without replacement.
pub fn sample_without_replacement<T: Clone, R: RandomSource + ?Sized>(
    items: &[T],
    m: usize,
    rng: &mut R,
) -> Vec<T> {
    sample_indices(items.len(), m.min(items.len()), rng)
        .into_iter()
        .map(|i| items[i].clone())
        .collect()
}

/// Removes `count` uniformly chosen elements and returns them.
pub fn remove_random<T, R: RandomSource + ?Sized>(items: &mut Vec<T>, count: usize, rng: &mut R) -> Vec<T> {
    assert!(count <= items.len(), "cannot remove {count} of {}", items.len());
    (0..count)
        .map(|_| {
            let j = rng.index(items.len());
            items.swap_remove(j)
        })
        .collect()
}

/// Keeps a uniform random subset of size `keep` (no-op if `keep >= len`).
pub fn retain_random<T, R: RandomSource + ?Sized>(items: &mut Vec<T>, keep: usize, rng: &mut R) {
    let len = items.len();
    if keep >= len {
        return;
    }
    if keep < len / 2 {
        for i in 0..keep {
            let j = i + rng.index(len - i);
            items.swap(i, j);
        }
        items.truncate(keep);
    } else {
        remove_random(items, len - keep, rng);
    }
}

/// In-place uniform shuffle.
pub fn shuffle<T, R: RandomSource + ?Sized>(items: &mut [T], rng: &mut R) {
    let len = items.len();
    for i in 0..len.saturating_sub(1) {
        let j = i + rng.index(len - i);
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_address_same_values() {
        let mut a = RandomStream::with_path(7, &[1, 2]);
        let mut b = RandomStream::new(7).substream(1).substream(2);
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn substream_ignores_parent_consumption() {
        let root = RandomStream::new(3);
        let mut used = root.clone();
        for _ in 0..100 {
            used.next_u64();
        }
        assert_eq!(root.substream(9).next_u64(), used.substream(9).next_u64());
    }

    #[test]
    fn path_prefixes_differ() {
        let mut a = RandomStream::with_path(1, &[]);
        let mut b = RandomStream::with_path(1, &[0]);
        let mut c = RandomStream::with_path(1, &[0, 0]);
        let (x, y, z) = (a.next_u64(), b.next_u64(), c.next_u64());
        assert!(x != y && y != z && x != z);
    }

    #[test]
    fn binomial_degenerate_cases() {
        let mut rng = RandomStream::new(0);
        assert_eq!(binomial(0, 0.3, &mut rng), 0);
        assert_eq!(binomial(10, 0.0, &mut rng), 0);
        assert_eq!(binomial(10, 1.0, &mut rng), 10);
    }

    #[test]
    fn hypergeometric_rejects_overdraw() {
        let mut rng = RandomStream::new(0);
        assert!(hypergeometric(11, 5, 5, &mut rng).is_err());
        assert_eq!(hypergeometric(10, 4, 6, &mut rng).unwrap(), 4);
        assert_eq!(hypergeometric(3, 0, 6, &mut rng).unwrap(), 0);
    }

    #[test]
    fn multivariate_counts_sum_and_respect_sizes() {
        let mut rng = RandomStream::new(11);
        let sizes = [3, 0, 7, 2];
        for k in 0..=12 {
            let c = multivariate_hypergeometric(k, &sizes, &mut rng).unwrap();
            assert_eq!(c.iter().sum::<u64>(), k);
            assert!(c.iter().zip(&sizes).all(|(c, s)| c <= s));
        }
        assert!(multivariate_hypergeometric(13, &sizes, &mut rng).is_err());
    }

    #[test]
    fn stoch_round_is_exact_on_integers() {
        let mut rng = RandomStream::new(5);
        assert_eq!(stoch_round(4.0, &mut rng), 4);
        for _ in 0..100 {
            let r = stoch_round(2.25, &mut rng);
            assert!(r == 2 || r == 3);
        }
    }

    #[test]
    fn subset_helpers_keep_distinct_elements() {
        let mut rng = RandomStream::new(2);
        let pick = sample_without_replacement(&(0..20).collect::<Vec<_>>(), 8, &mut rng);
        let mut sorted = pick.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 8);

        for keep in [0, 3, 15, 20, 25] {
            let mut v: Vec<u32> = (0..20).collect();
            retain_random(&mut v, keep, &mut rng);
            assert_eq!(v.len(), keep.min(20));
            v.sort();
            v.dedup();
            assert_eq!(v.len(), keep.min(20));
        }
    }
}
