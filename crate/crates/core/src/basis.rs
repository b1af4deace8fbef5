//! Spin configurations and fixed-magnetization sectors.
//!
//! Site `j` of the chain (1-based, `1..=L`) lives in bit `j - 1` of a
//! configuration word; a set bit means `s_j = +1/2`. Magnetization is carried
//! as the integer `2m` so odd chains stay exact.
//!
//! Members of a sector are enumerated in increasing integer order, which makes
//! the index of a configuration its rank in the combinatorial number system:
//! with set bits at positions `p_1 < p_2 < ... < p_k`,
//! `rank = C(p_1, 1) + C(p_2, 2) + ... + C(p_k, k)`.

use crate::error::{Error, Result};

/// Largest chain length representable in a configuration word.
pub const MAX_SITES: usize = 63;

/// Default cap on the chain length for sector construction.
pub const DEFAULT_MAX_LEN: usize = 32;

const BINOM_N: usize = 65;

const fn binomial_table() -> [[u64; BINOM_N]; BINOM_N] {
    let mut t = [[0u64; BINOM_N]; BINOM_N];
    let mut n = 0;
    while n < BINOM_N {
        t[n][0] = 1;
        let mut k = 1;
        while k <= n {
            t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0 };
            k += 1;
        }
        n += 1;
    }
    t
}

static BINOM: [[u64; BINOM_N]; BINOM_N] = binomial_table();

/// Binomial coefficient `C(n, k)` for `n <= 64`; zero when `k > n`.
#[inline]
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n || n >= BINOM_N {
        0
    } else {
        BINOM[n][k]
    }
}

#[inline]
fn low_mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// A product-basis configuration of an `L`-site chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    bits: u64,
    len: usize,
}

impl SpinConfig {
    pub fn new(bits: u64, len: usize) -> Result<Self> {
        if len == 0 || len > MAX_SITES || bits > low_mask(len) {
            return Err(Error::InvalidParams(format!(
                "configuration {bits:#b} does not fit {len} sites"
            )));
        }
        Ok(Self { bits, len })
    }

    /// Builds a configuration from twice-spin values (`+1` or `-1`), site 1 first.
    pub fn from_twice_spins(spins: &[i8]) -> Result<Self> {
        let mut bits = 0u64;
        for (pos, &s) in spins.iter().enumerate() {
            match s {
                1 => bits |= 1 << pos,
                -1 => {}
                _ => {
                    return Err(Error::InvalidParams(format!(
                        "twice-spin must be +1 or -1, got {s}"
                    )))
                }
            }
        }
        Self::new(bits, spins.len())
    }

    pub fn all_up(len: usize) -> Result<Self> {
        Self::new(low_mask(len), len)
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Whether site `site` (1-based) carries spin up.
    #[inline]
    pub fn is_up(&self, site: usize) -> bool {
        (self.bits >> (site - 1)) & 1 == 1
    }

    /// `2 s_site`, i.e. `+1` or `-1`.
    #[inline]
    pub fn twice_spin(&self, site: usize) -> i64 {
        if self.is_up(site) {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn up_count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Twice the total magnetization.
    #[inline]
    pub fn two_m(&self) -> i64 {
        2 * self.up_count() as i64 - self.len as i64
    }

    /// Spatial mirror `s_j -> s_{L+1-j}`.
    pub fn mirrored(&self) -> Self {
        let bits = self.bits.reverse_bits() >> (64 - self.len);
        Self { bits, len: self.len }
    }

    /// Global spin flip `s_j -> -s_j`.
    pub fn flipped(&self) -> Self {
        Self {
            bits: !self.bits & low_mask(self.len),
            len: self.len,
        }
    }
}

/// All configurations of `len` sites with fixed magnetization `two_m / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SectorBasis {
    len: usize,
    two_m: i64,
    n_up: usize,
    dim: usize,
}

impl SectorBasis {
    /// Sector of an `len`-site chain, with the default length cap.
    pub fn new(len: usize, two_m: i64) -> Result<Self> {
        Self::with_max_len(len, two_m, DEFAULT_MAX_LEN)
    }

    pub fn with_max_len(len: usize, two_m: i64, max_len: usize) -> Result<Self> {
        let max_len = max_len.min(MAX_SITES);
        if len < 2 || len > max_len {
            return Err(Error::InvalidParams(format!(
                "chain length {len} outside [2, {max_len}]"
            )));
        }
        if two_m.unsigned_abs() as usize > len || (two_m + len as i64).rem_euclid(2) != 0 {
            return Err(Error::InvalidSector { len, two_m });
        }
        let n_up = ((len as i64 + two_m) / 2) as usize;
        let dim = binomial(len, n_up);
        let dim = usize::try_from(dim).map_err(|_| Error::InvalidSector { len, two_m })?;
        Ok(Self {
            len,
            two_m,
            n_up,
            dim,
        })
    }

    /// Every valid sector of a chain, in ascending `2m`.
    pub fn all_sectors(len: usize) -> Result<Vec<Self>> {
        (0..=len)
            .map(|n_up| Self::new(len, 2 * n_up as i64 - len as i64))
            .collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    #[inline]
    pub fn two_m(&self) -> i64 {
        self.two_m
    }

    #[inline]
    pub fn n_up(&self) -> usize {
        self.n_up
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, config: &SpinConfig) -> bool {
        config.len() == self.len && config.up_count() == self.n_up
    }

    /// Index of a member configuration, in `O(L)`.
    pub fn rank(&self, config: &SpinConfig) -> Result<usize> {
        if !self.contains(config) {
            return Err(Error::NotInSector {
                bits: config.bits(),
                len: config.len(),
                two_m: self.two_m,
            });
        }
        Ok(self.rank_bits(config.bits()))
    }

    /// Rank of a raw word that is already known to lie in the sector.
    #[inline]
    pub fn rank_bits(&self, mut bits: u64) -> usize {
        let mut rank = 0u64;
        let mut k = 0;
        while bits != 0 {
            let pos = bits.trailing_zeros() as usize;
            k += 1;
            rank += BINOM[pos][k];
            bits &= bits - 1;
        }
        rank as usize
    }

    pub fn unrank(&self, index: usize) -> SpinConfig {
        SpinConfig {
            bits: self.unrank_bits(index),
            len: self.len,
        }
    }

    /// Inverse of [`rank_bits`](Self::rank_bits), greedy from the highest bit.
    pub fn unrank_bits(&self, index: usize) -> u64 {
        assert!(index < self.dim, "index {index} out of range {}", self.dim);
        let mut rest = index as u64;
        let mut bits = 0u64;
        let mut k = self.n_up;
        let mut pos = self.len;
        while k > 0 {
            pos -= 1;
            let c = binomial(pos, k);
            if rest >= c {
                bits |= 1 << pos;
                rest -= c;
                k -= 1;
            }
        }
        bits
    }

    /// Members in ascending order, starting at index `start`.
    pub fn iter_from(&self, start: usize) -> SectorIter {
        let remaining = self.dim.saturating_sub(start);
        let current = if remaining > 0 {
            self.unrank_bits(start)
        } else {
            0
        };
        SectorIter { current, remaining }
    }

    pub fn iter(&self) -> SectorIter {
        self.iter_from(0)
    }

    /// Rank change when the spin at bit `pos` hops to the empty bit `pos + 1`.
    ///
    /// The moved spin keeps its order among the set bits, so the rank moves by
    /// `C(pos + 1, k) - C(pos, k) = C(pos, k - 1)`, where `k` counts the set
    /// bits at or below `pos`.
    #[inline]
    pub(crate) fn hop_up_delta(bits: u64, pos: usize) -> usize {
        let k = (bits & low_mask(pos + 1)).count_ones() as usize;
        BINOM[pos][k - 1] as usize
    }
}

/// Gosper-style iteration over words with a fixed popcount.
#[derive(Debug, Clone)]
pub struct SectorIter {
    current: u64,
    remaining: usize,
}

impl Iterator for SectorIter {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        if self.remaining == 0 {
            return None;
        }
        let out = self.current;
        self.remaining -= 1;
        if self.remaining > 0 {
            let c = out;
            let low = c & c.wrapping_neg();
            let ripple = c + low;
            self.current = (((ripple ^ c) >> 2) / low) | ripple;
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for SectorIter {}
