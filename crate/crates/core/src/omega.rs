//! Magnetization-constrained weighted sums over kink-state configurations.
//!
//! For a set of sites `S` the table entry at twice-partial-magnetization `t`
//! is `Σ q^{2 Σ_{j∈S} j s_j}` over all spin assignments of `S` with
//! `2 Σ_{j∈S} s_j = t`. Each site contributes `q^{+j}` (up) or `q^{-j}`
//! (down). Terms span hundreds of decades for long chains, so every cell is a
//! [`ScaledValue`] and the sweep renormalizes after each site.

use std::cmp::Ordering;
use std::ops::{Add, Mul};

use crate::error::{Error, Result};
use crate::kinkstate::KinkParams;

const MANTISSA_BITS: u64 = 52;
const EXP_MASK: u64 = 0x7ff;

/// `mantissa · 2^exp2` with `mantissa ∈ [1, 2)`, or exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledValue {
    mantissa: f64,
    exp2: i64,
}

/// `x · 2^e` without intermediate overflow.
pub fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

impl ScaledValue {
    pub const ZERO: Self = Self {
        mantissa: 0.0,
        exp2: 0,
    };
    pub const ONE: Self = Self {
        mantissa: 1.0,
        exp2: 0,
    };

    /// Splits a non-negative finite double.
    pub fn from_f64(x: f64) -> Self {
        assert!(x >= 0.0 && x.is_finite(), "ScaledValue needs a finite x >= 0, got {x}");
        if x == 0.0 {
            return Self::ZERO;
        }
        let mut bits = x.to_bits();
        let mut bias = 0i64;
        if (bits >> MANTISSA_BITS) & EXP_MASK == 0 {
            // subnormal
            bits = (x * 2f64.powi(64)).to_bits();
            bias = -64;
        }
        let exp = ((bits >> MANTISSA_BITS) & EXP_MASK) as i64 - 1023;
        let mantissa = f64::from_bits((bits & ((1u64 << MANTISSA_BITS) - 1)) | (1023u64 << MANTISSA_BITS));
        Self {
            mantissa,
            exp2: exp + bias,
        }
    }

    fn normalized(mantissa: f64, exp2: i64) -> Self {
        if mantissa == 0.0 {
            return Self::ZERO;
        }
        let s = Self::from_f64(mantissa);
        Self {
            mantissa: s.mantissa,
            exp2: s.exp2 + exp2,
        }
    }

    #[inline]
    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    #[inline]
    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    /// Plain double; may overflow to infinity or underflow to zero.
    pub fn to_f64(&self) -> f64 {
        ldexp(self.mantissa, self.exp2)
    }

    /// `self / other` as a plain double.
    pub fn ratio(&self, other: &Self) -> f64 {
        assert!(!other.is_zero(), "division by a zero ScaledValue");
        if self.is_zero() {
            return 0.0;
        }
        ldexp(self.mantissa / other.mantissa, self.exp2 - other.exp2)
    }

    pub fn sqrt(&self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        if self.exp2.rem_euclid(2) == 0 {
            Self::normalized(self.mantissa.sqrt(), self.exp2 / 2)
        } else {
            Self::normalized((2.0 * self.mantissa).sqrt(), (self.exp2 - 1).div_euclid(2))
        }
    }

    /// Multiplies by `2^k`.
    pub fn scale_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            *self
        } else {
            Self {
                mantissa: self.mantissa,
                exp2: self.exp2 + k,
            }
        }
    }

    /// `base^n` for `base > 0` and any integer `n`, correctly rounded up to
    /// about one ulp. Squaring runs in double-double arithmetic.
    pub fn powi(base: f64, n: i64) -> Self {
        assert!(base > 0.0 && base.is_finite());
        let b = Self::from_f64(base);
        let mut sq = (b.mantissa, 0.0, b.exp2);
        let mut acc = (1.0, 0.0, 0i64);
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = dd_mul(acc, sq);
            }
            e >>= 1;
            if e > 0 {
                sq = dd_mul(sq, sq);
            }
        }
        let (hi, lo, exp2) = acc;
        if n >= 0 {
            return Self::normalized(hi + lo, exp2);
        }
        // 1/(hi + lo) with one Newton correction.
        let y = hi.recip();
        let t = (-hi).mul_add(y, 1.0) - lo * y;
        Self::normalized(y.mul_add(t, y), -exp2)
    }

    /// Natural logarithm; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.ln() + self.exp2 as f64 * std::f64::consts::LN_2
        }
    }
}

/// Double-double product of `(hi + lo) 2^exp` values, renormalized so that
/// `hi` lies in `[1, 2)`.
fn dd_mul(a: (f64, f64, i64), b: (f64, f64, i64)) -> (f64, f64, i64) {
    let p = a.0 * b.0;
    let err = a.0.mul_add(b.0, -p);
    let lo = err + a.0 * b.1 + a.1 * b.0;
    let hi = p + lo;
    let lo = lo - (hi - p);
    let k = if hi >= 2.0 { 1 } else { 0 };
    let scale = if k == 1 { 0.5 } else { 1.0 };
    (hi * scale, lo * scale, a.2 + b.2 + k)
}

impl Mul for ScaledValue {
    type Output = Self;

    #[inline]
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        let m = self.mantissa * rhs.mantissa;
        if m >= 2.0 {
            Self {
                mantissa: m * 0.5,
                exp2: self.exp2 + rhs.exp2 + 1,
            }
        } else {
            Self {
                mantissa: m,
                exp2: self.exp2 + rhs.exp2,
            }
        }
    }
}

impl Add for ScaledValue {
    type Output = Self;

    #[inline]
    fn add(self, rhs: Self) -> Self {
        if rhs.is_zero() {
            return self;
        }
        if self.is_zero() {
            return rhs;
        }
        let (big, small) = if self.exp2 >= rhs.exp2 { (self, rhs) } else { (rhs, self) };
        let gap = big.exp2 - small.exp2;
        if gap > 64 {
            return big;
        }
        let m = big.mantissa + small.mantissa * 2f64.powi(-(gap as i32));
        if m >= 2.0 {
            Self {
                mantissa: m * 0.5,
                exp2: big.exp2 + 1,
            }
        } else {
            Self {
                mantissa: m,
                exp2: big.exp2,
            }
        }
    }
}

impl PartialOrd for ScaledValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            _ => match self.exp2.cmp(&other.exp2) {
                Ordering::Equal => self.mantissa.partial_cmp(&other.mantissa),
                o => Some(o),
            },
        }
    }
}

/// Cells of the constrained sums for one site set.
#[derive(Debug, Clone)]
pub struct OmegaTable {
    sites: Vec<usize>,
    q: f64,
    /// Indexed by the number of up spins among `sites`.
    cells: Vec<ScaledValue>,
}

/// Per-site factors `(q^{-j}, q^{+j})` for `j = 1..=len`, index 0 unused.
fn site_factors(q: f64, len: usize) -> Vec<(ScaledValue, ScaledValue)> {
    (0..=len)
        .map(|j| {
            let up = ScaledValue::powi(q, j as i64);
            let down = ScaledValue::powi(q, -(j as i64));
            (down, up)
        })
        .collect()
}

#[inline]
fn push_site(cells: &mut Vec<ScaledValue>, down: ScaledValue, up: ScaledValue) {
    cells.push(ScaledValue::ZERO);
    for u in (1..cells.len()).rev() {
        cells[u] = cells[u] * down + cells[u - 1] * up;
    }
    cells[0] = cells[0] * down;
}

impl OmegaTable {
    /// Sweeps `sites` in the given order; the site index is its own weight.
    pub fn build(q: f64, sites: &[usize]) -> Self {
        let max_site = sites.iter().copied().max().unwrap_or(0);
        let factors = site_factors(q, max_site);
        let mut cells = Vec::with_capacity(sites.len() + 1);
        cells.push(ScaledValue::ONE);
        for &j in sites {
            let (down, up) = factors[j];
            push_site(&mut cells, down, up);
        }
        Self {
            sites: sites.to_vec(),
            q,
            cells,
        }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Sum over assignments with `2 Σ s_j = twice_sum`; zero if unreachable.
    pub fn get(&self, twice_sum: i64) -> ScaledValue {
        let n = self.sites.len() as i64;
        let up2 = twice_sum + n;
        if up2 < 0 || up2 % 2 != 0 || up2 / 2 > n {
            return ScaledValue::ZERO;
        }
        self.cells[(up2 / 2) as usize]
    }

    /// `(twice_sum, value)` for every reachable cell.
    pub fn cells(&self) -> impl Iterator<Item = (i64, ScaledValue)> + '_ {
        let n = self.sites.len() as i64;
        self.cells
            .iter()
            .enumerate()
            .map(move |(u, &v)| (2 * u as i64 - n, v))
    }
}

fn check_sector(len: usize, two_m: i64) -> Result<()> {
    if len == 0 || two_m.unsigned_abs() as usize > len || (two_m + len as i64).rem_euclid(2) != 0 {
        return Err(Error::InvalidSector { len, two_m });
    }
    Ok(())
}

/// `(Ω₁, Ω₀, Ω₋₁)` for the pair `(a, b)`: sums over the other `L - 2` sites
/// with `Σ s_j + i = m`.
pub fn omega_pair(
    kp: &KinkParams,
    len: usize,
    a: usize,
    b: usize,
    two_m: i64,
) -> Result<(ScaledValue, ScaledValue, ScaledValue)> {
    if !(1 <= a && a < b && b <= len) {
        return Err(Error::InvalidPair { a, b, len });
    }
    check_sector(len, two_m)?;
    let rest: Vec<usize> = (1..=len).filter(|&j| j != a && j != b).collect();
    let table = OmegaTable::build(kp.q, &rest);
    Ok((
        table.get(two_m - 2),
        table.get(two_m),
        table.get(two_m + 2),
    ))
}

/// `(Ω_{+1/2}, Ω_{-1/2})` for site `a`: sums over the other `L - 1` sites
/// with `Σ s_j ± 1/2 = m`.
pub fn omega_single(
    kp: &KinkParams,
    len: usize,
    a: usize,
    two_m: i64,
) -> Result<(ScaledValue, ScaledValue)> {
    if !(1 <= a && a <= len) {
        return Err(Error::InvalidPair { a, b: a, len });
    }
    check_sector(len, two_m)?;
    let rest: Vec<usize> = (1..=len).filter(|&j| j != a).collect();
    let table = OmegaTable::build(kp.q, &rest);
    Ok((table.get(two_m - 1), table.get(two_m + 1)))
}

/// `N⁻² = Σ q^{2 Σ j s_j}` over the whole sector.
pub fn normalization(kp: &KinkParams, len: usize, two_m: i64) -> Result<ScaledValue> {
    check_sector(len, two_m)?;
    let sites: Vec<usize> = (1..=len).collect();
    Ok(OmegaTable::build(kp.q, &sites).get(two_m))
}

/// One-site sums for every site at once, in `O(L²)` total.
///
/// Returns `(N⁻², [(Ω_{+1/2}(A), Ω_{-1/2}(A)) for A = 1..=L])`. Prefix sweeps
/// over sites `1..A` and suffix sweeps over `A+1..=L` are stored and joined by
/// a convolution over the split of up spins.
pub fn omega_single_all(
    kp: &KinkParams,
    len: usize,
    two_m: i64,
) -> Result<(ScaledValue, Vec<(ScaledValue, ScaledValue)>)> {
    check_sector(len, two_m)?;
    let factors = site_factors(kp.q, len);

    // prefix[k]: sites 1..=k. suffix[k]: sites k..=len (suffix[len + 1] empty).
    let mut prefix: Vec<Vec<ScaledValue>> = Vec::with_capacity(len + 1);
    prefix.push(vec![ScaledValue::ONE]);
    for j in 1..=len {
        let mut next = prefix[j - 1].clone();
        push_site(&mut next, factors[j].0, factors[j].1);
        prefix.push(next);
    }
    let mut suffix: Vec<Vec<ScaledValue>> = vec![Vec::new(); len + 2];
    suffix[len + 1] = vec![ScaledValue::ONE];
    for j in (1..=len).rev() {
        let mut next = suffix[j + 1].clone();
        push_site(&mut next, factors[j].0, factors[j].1);
        suffix[j] = next;
    }

    let n_up_total = ((len as i64 + two_m) / 2) as usize;
    let join = |left: &[ScaledValue], right: &[ScaledValue], ups: i64| -> ScaledValue {
        if ups < 0 {
            return ScaledValue::ZERO;
        }
        let ups = ups as usize;
        let mut acc = ScaledValue::ZERO;
        for (u, &l) in left.iter().enumerate().take(ups + 1) {
            if let Some(&r) = right.get(ups - u) {
                acc = acc + l * r;
            }
        }
        acc
    };

    let per_site = (1..=len)
        .map(|a| {
            let left = &prefix[a - 1];
            let right = &suffix[a + 1];
            let plus = join(left, right, n_up_total as i64 - 1);
            let minus = join(left, right, n_up_total as i64);
            (plus, minus)
        })
        .collect();
    let norm = prefix[len]
        .get(n_up_total)
        .copied()
        .unwrap_or(ScaledValue::ZERO);
    Ok((norm, per_site))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Exhaustive enumeration, grouped by twice the partial magnetization.
    /// Double-double number `hi + lo`, enough headroom to make the oracle
    /// exact to working precision.
    #[derive(Clone, Copy)]
    struct Dd(f64, f64);

    impl Dd {
        fn mul(self, o: Dd) -> Dd {
            let p = self.0 * o.0;
            let err = self.0.mul_add(o.0, -p);
            let lo = err + self.0 * o.1 + self.1 * o.0;
            let hi = p + lo;
            Dd(hi, lo - (hi - p))
        }

        fn add(self, o: Dd) -> Dd {
            let s = self.0 + o.0;
            let bb = s - self.0;
            let err = (self.0 - (s - bb)) + (o.0 - bb) + self.1 + o.1;
            let hi = s + err;
            Dd(hi, err - (hi - s))
        }

        fn recip(self) -> Dd {
            let y = 1.0 / self.0;
            // One Newton step: y (2 - x y).
            let xy = self.mul(Dd(y, 0.0));
            let corr = Dd(1.0, 0.0).add(Dd(-xy.0, -xy.1));
            Dd(y, 0.0).add(Dd(y, 0.0).mul(corr))
        }

        fn powi(base: f64, e: i64) -> Dd {
            let mut acc = Dd(1.0, 0.0);
            let mut b = Dd(base, 0.0);
            let mut n = e.unsigned_abs();
            while n > 0 {
                if n & 1 == 1 {
                    acc = acc.mul(b);
                }
                b = b.mul(b);
                n >>= 1;
            }
            if e < 0 {
                acc.recip()
            } else {
                acc
            }
        }
    }

    fn brute_force(q: f64, sites: &[usize]) -> Vec<(i64, f64)> {
        let n = sites.len();
        let mut sums = vec![Dd(0.0, 0.0); n + 1];
        for mask in 0u32..(1 << n) {
            let mut e = 0i64;
            for (k, &j) in sites.iter().enumerate() {
                e += if (mask >> k) & 1 == 1 { j as i64 } else { -(j as i64) };
            }
            let u = mask.count_ones() as usize;
            sums[u] = sums[u].add(Dd::powi(q, e));
        }
        sums.into_iter()
            .enumerate()
            .map(|(u, v)| (2 * u as i64 - n as i64, v.0 + v.1))
            .collect()
    }

    #[test]
    fn scaled_value_arithmetic() {
        let a = ScaledValue::from_f64(3.0);
        assert_eq!((a.mantissa(), a.exp2()), (1.5, 1));
        let b = ScaledValue::from_f64(0.375);
        assert_eq!((a * b).to_f64(), 1.125);
        assert_eq!((a + b).to_f64(), 3.375);
        assert_eq!(a.ratio(&b), 8.0);
        assert_eq!(ScaledValue::from_f64(16.0).sqrt().to_f64(), 4.0);
        assert_eq!(ScaledValue::from_f64(8.0).sqrt().to_f64(), 8f64.sqrt());
        let tiny = ScaledValue::from_f64(f64::MIN_POSITIVE / 8.0);
        assert_eq!(tiny.to_f64(), f64::MIN_POSITIVE / 8.0);
        assert!(ScaledValue::ZERO.is_zero());
        assert_eq!((ScaledValue::ZERO + a).to_f64(), 3.0);
        assert!(a > b && ScaledValue::ZERO < b);
    }

    #[test]
    fn huge_powers_do_not_overflow() {
        let big = ScaledValue::powi(2.618, 100_000);
        assert!(big.to_f64().is_infinite());
        let small = ScaledValue::powi(2.618, -100_000);
        assert_relative_eq!(big.ln(), -small.ln(), max_relative = 1e-12);
        assert_relative_eq!((big * small).to_f64(), 1.0, max_relative = 1e-11);
        assert_relative_eq!(big.ratio(&big.scale_pow2(3)), 0.125);
    }

    #[test]
    fn two_site_pair() {
        let kp = KinkParams::from_delta(1.5).unwrap();
        let (p, z, m) = omega_pair(&kp, 2, 1, 2, 0).unwrap();
        assert!(p.is_zero() && m.is_zero());
        assert_eq!(z.to_f64(), 1.0);
    }

    #[test]
    fn single_site_examples() {
        let kp = KinkParams::from_delta(1.5).unwrap();
        let q = kp.q;
        let (p, m) = omega_single(&kp, 2, 1, 0).unwrap();
        assert_relative_eq!(p.to_f64(), q.powi(-2), max_relative = 1e-14);
        assert_relative_eq!(m.to_f64(), q.powi(2), max_relative = 1e-14);

        // L = 3, A = 2, 2m = +1: Ω_{+1/2} needs s_1 + s_3 = 0, Ω_{-1/2} needs both up.
        let (p, m) = omega_single(&kp, 3, 2, 1).unwrap();
        assert_relative_eq!(p.to_f64(), q.powi(2) + q.powi(-2), max_relative = 1e-14);
        assert_relative_eq!(m.to_f64(), q.powi(4), max_relative = 1e-14);
    }

    #[test]
    fn normalization_examples() {
        let kp = KinkParams::from_delta(1.5).unwrap();
        assert_relative_eq!(normalization(&kp, 2, 0).unwrap().to_f64(), 3.0, max_relative = 1e-14);
        assert_relative_eq!(normalization(&kp, 1, 1).unwrap().to_f64(), kp.q, max_relative = 1e-14);
        let sites: Vec<usize> = (1..=10).collect();
        let bf = brute_force(kp.q, &sites);
        let n = normalization(&kp, 10, 0).unwrap().to_f64();
        assert_relative_eq!(n, bf[5].1, max_relative = 1e-14);
    }

    #[test]
    fn pair_matches_enumeration() {
        let kp = KinkParams::from_delta(1.5).unwrap();
        let (p, z, m) = omega_pair(&kp, 6, 3, 4, 0).unwrap();
        let bf = brute_force(kp.q, &[1, 2, 5, 6]);
        let at = |t: i64| bf.iter().find(|c| c.0 == t).map_or(0.0, |c| c.1);
        assert_relative_eq!(p.to_f64(), at(-2), max_relative = 1e-14);
        assert_relative_eq!(z.to_f64(), at(0), max_relative = 1e-14);
        assert_relative_eq!(m.to_f64(), at(2), max_relative = 1e-14);
    }

    #[test]
    fn single_matches_enumeration() {
        let kp = KinkParams::from_delta(2.0).unwrap();
        let (p, m) = omega_single(&kp, 8, 4, 0).unwrap();
        let bf = brute_force(kp.q, &[1, 2, 3, 5, 6, 7, 8]);
        let at = |t: i64| bf.iter().find(|c| c.0 == t).map_or(0.0, |c| c.1);
        assert_relative_eq!(p.to_f64(), at(-1), max_relative = 1e-14);
        assert_relative_eq!(m.to_f64(), at(1), max_relative = 1e-14);
    }

    #[test]
    fn invalid_arguments() {
        let kp = KinkParams::from_delta(1.5).unwrap();
        assert!(matches!(omega_pair(&kp, 6, 4, 4, 0), Err(Error::InvalidPair { .. })));
        assert!(matches!(omega_pair(&kp, 6, 0, 4, 0), Err(Error::InvalidPair { .. })));
        assert!(matches!(omega_pair(&kp, 6, 2, 7, 0), Err(Error::InvalidPair { .. })));
        assert!(matches!(omega_single(&kp, 6, 7, 0), Err(Error::InvalidPair { .. })));
        assert!(matches!(normalization(&kp, 6, 1), Err(Error::InvalidSector { .. })));
    }

    #[test]
    fn all_sites_agree_with_single_site_sweeps() {
        let kp = KinkParams::from_delta(1.36).unwrap();
        for (len, two_m) in [(9, 1), (12, 0), (12, -4), (31, 3)] {
            let (norm, all) = omega_single_all(&kp, len, two_m).unwrap();
            assert_relative_eq!(
                norm.ratio(&normalization(&kp, len, two_m).unwrap()),
                1.0,
                max_relative = 1e-13
            );
            for a in 1..=len {
                let (p, m) = omega_single(&kp, len, a, two_m).unwrap();
                assert_relative_eq!(all[a - 1].0.ratio(&p), 1.0, max_relative = 1e-13);
                assert_relative_eq!(all[a - 1].1.ratio(&m), 1.0, max_relative = 1e-13);
            }
        }
    }

    proptest! {
        #[test]
        fn dp_matches_enumeration(
            sites in proptest::sample::subsequence((1usize..=20).collect::<Vec<_>>(), 0..=14),
            delta in 1.0f64..3.0,
        ) {
            let q = KinkParams::from_delta(delta).unwrap().q;
            let table = OmegaTable::build(q, &sites);
            for (t, expected) in brute_force(q, &sites) {
                let got = table.get(t).to_f64();
                prop_assert!(((got - expected) / expected).abs() <= 1e-14,
                    "t={} got={} expected={}", t, got, expected);
            }
        }

        #[test]
        fn decomposition_identities(
            len in 3usize..=200,
            seed in any::<u64>(),
            delta in 1.0f64..4.0,
        ) {
            let kp = KinkParams::from_delta(delta).unwrap();
            let two_m = (len % 2) as i64;
            let a = 1 + (seed as usize) % (len - 1);
            let b = a + 1 + ((seed >> 20) as usize) % (len - a);
            let norm = normalization(&kp, len, two_m).unwrap();
            let (p, z, m) = omega_pair(&kp, len, a, b, two_m).unwrap();
            let q = kp.q;
            let (ai, bi) = (a as i64, b as i64);
            let total = ScaledValue::powi(q, ai + bi) * p
                + (ScaledValue::powi(q, ai - bi) + ScaledValue::powi(q, bi - ai)) * z
                + ScaledValue::powi(q, -ai - bi) * m;
            prop_assert!((total.ratio(&norm) - 1.0).abs() <= 1e-12);

            let (sp, sm) = omega_single(&kp, len, a, two_m).unwrap();
            let single = ScaledValue::powi(q, ai) * sp + ScaledValue::powi(q, -ai) * sm;
            prop_assert!((single.ratio(&norm) - 1.0).abs() <= 1e-12);
        }
    }
}
