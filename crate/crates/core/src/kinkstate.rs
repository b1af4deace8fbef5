//! Exact critical-field ground states (kink states).
//!
//! At `h = h_c` every sector `m` has the exact ground state
//! `|Ψ⟩ ∝ Σ q^{Σ_j j s_j} |s_1 ... s_L⟩` with `Δ = (q + 1/q)/2` and
//! `h_c = (q - 1/q)/4`. [`build_kink_state`] returns that superposition with
//! `q >= 1`. For the field orientation of [`crate::hamiltonian`] (site 1
//! pushed up, site `L` pushed down) the eigenvector of `H(h_c)` is its spatial
//! mirror image, which [`build_field_aligned_kink_state`] returns. Pair
//! concurrences map `(A, B) -> (L+1-B, L+1-A)` under the mirror; one-site
//! purities are permuted, so `Q` is unchanged.

use crate::basis::SectorBasis;
use crate::eigen::StateVector;
use crate::error::{Error, Result};

/// The three equivalent parametrizations of the kink regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinkParams {
    pub delta: f64,
    pub q: f64,
    pub h_c: f64,
}

/// `h_c = ½√(Δ² − 1)`.
pub fn critical_field(delta: f64) -> Result<f64> {
    if !(delta >= 1.0) || !delta.is_finite() {
        return Err(Error::OutOfKinkRegime { delta });
    }
    Ok(0.5 * ((delta - 1.0) * (delta + 1.0)).sqrt())
}

impl KinkParams {
    /// Picks the root `q = Δ + √(Δ² − 1) >= 1`.
    pub fn from_delta(delta: f64) -> Result<Self> {
        let h_c = critical_field(delta)?;
        let q = delta + 2.0 * h_c;
        Ok(Self { delta, q, h_c })
    }

    pub fn from_q(q: f64) -> Result<Self> {
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::InvalidParams(format!("q must be >= 1, got {q}")));
        }
        let inv = q.recip();
        Ok(Self {
            delta: 0.5 * (q + inv),
            q,
            h_c: 0.25 * (q - inv),
        })
    }
}

/// Same as [`KinkParams::from_delta`].
pub fn params_from_delta(delta: f64) -> Result<KinkParams> {
    KinkParams::from_delta(delta)
}

/// `Σ_j j s_j`, doubled to stay integral.
#[inline]
pub(crate) fn twice_weighted_magnetization(bits: u64, len: usize) -> i64 {
    let mut acc = 0i64;
    for j in 1..=len {
        let s = if (bits >> (j - 1)) & 1 == 1 { 1 } else { -1 };
        acc += j as i64 * s;
    }
    acc
}

fn kink_amplitudes(q: f64, basis: &SectorBasis, sign: f64) -> Vec<f64> {
    let len = basis.len();
    let ln_q = q.ln();
    let exponents: Vec<i64> = basis
        .iter()
        .map(|bits| twice_weighted_magnetization(bits, len))
        .collect();
    // exp((e - e_max) ln q / 2) stays in [0, 1] whatever the size of L.
    let peak = exponents
        .iter()
        .map(|&e| (sign * e as f64) as i64)
        .max()
        .unwrap_or(0);
    exponents
        .iter()
        .map(|&e| (0.5 * ((sign * e as f64) - peak as f64) * ln_q).exp())
        .collect()
}

/// Normalized `N Σ q^{Σ j s_j} |s⟩` on sector `two_m`.
pub fn build_kink_state(kp: &KinkParams, len: usize, two_m: i64) -> Result<StateVector> {
    let basis = SectorBasis::new(len, two_m)?;
    StateVector::new(basis, kink_amplitudes(kp.q, &basis, 1.0))
}

/// Mirror image of [`build_kink_state`]: the exact eigenvector of the sector
/// Hamiltonian at `h = h_c`, with energy `-Δ (L-1) / 4`.
pub fn build_field_aligned_kink_state(
    kp: &KinkParams,
    len: usize,
    two_m: i64,
) -> Result<StateVector> {
    let basis = SectorBasis::new(len, two_m)?;
    StateVector::new(basis, kink_amplitudes(kp.q, &basis, -1.0))
}

/// Common energy of all sectors at the critical field, `-Δ (L-1) / 4` (J = 1).
pub fn critical_energy(kp: &KinkParams, len: usize) -> f64 {
    -kp.delta * (len as f64 - 1.0) / 4.0
}
