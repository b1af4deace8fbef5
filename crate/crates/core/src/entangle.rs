//! Entanglement measures.
//!
//! Two-site matrices use the ordered basis `{|++⟩, |+−⟩, |−+⟩, |−−⟩}` with the
//! first label on site `A`. States with fixed total magnetization only populate
//! the diagonal and the `|+−⟩⟷|−+⟩` coherence, and for those the concurrence
//! reduces to a closed form. The general Wootters route is kept for arbitrary
//! matrices and serves as a cross-check.

use nalgebra::Matrix4;

use crate::linalg::{hermitian4_eigen, hermitian4_eigenvalues, symmetric_eigen};
use num_complex::Complex64;

use crate::eigen::StateVector;
use crate::error::{Error, Result};
use crate::kinkstate::KinkParams;
use crate::omega::{normalization, omega_pair, omega_single_all, ScaledValue};

/// Tolerance below which small negative eigenvalues and concurrences clamp to zero.
pub const CLAMP_TOL: f64 = 1e-12;

const TRACE_TOL: f64 = 1e-10;

/// Largest chain accepted by [`global_q_wedge`].
pub const WEDGE_MAX_LEN: usize = 16;

const PP: usize = 0;
const PM: usize = 1;
const MP: usize = 2;
const MM: usize = 3;

/// Reduced density matrix of the pair `(A, B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDensityMatrix {
    pub entries: [[f64; 4]; 4],
    pub sites: (usize, usize),
}

impl PairDensityMatrix {
    pub fn new(entries: [[f64; 4]; 4], sites: (usize, usize)) -> Self {
        Self { entries, sites }
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.entries[i][i]).sum()
    }

    pub fn as_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|r, c| self.entries[r][c])
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.as_matrix();
        symmetric_eigen(&nalgebra::DMatrix::from_fn(4, 4, |i, j| m[(i, j)])).0[0]
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..4).all(|r| (0..4).all(|c| (self.entries[r][c] - self.entries[c][r]).abs() <= tol))
    }

    /// Only the diagonal and anti-diagonal are populated.
    pub fn is_x_form(&self, tol: f64) -> bool {
        (0..4).all(|r| (0..4).all(|c| r == c || r + c == 3 || self.entries[r][c].abs() <= tol))
    }

    /// Only the diagonal and the `|+−⟩⟷|−+⟩` coherence are populated.
    pub fn conserves_magnetization(&self, tol: f64) -> bool {
        self.is_x_form(tol) && self.entries[PP][MM].abs() <= tol && self.entries[MM][PP].abs() <= tol
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidDensityMatrix("non-finite entry".into()));
        }
        if !self.is_symmetric(CLAMP_TOL) {
            return Err(Error::InvalidDensityMatrix("not symmetric".into()));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -CLAMP_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    /// Equal-weight mixture of several pair matrices on the same sites.
    pub fn average(mats: &[PairDensityMatrix]) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::InvalidParams("empty mixture".into()))?;
        let mut entries = [[0.0; 4]; 4];
        for m in mats {
            if m.sites != first.sites {
                return Err(Error::InvalidParams("mixture over different pairs".into()));
            }
            for r in 0..4 {
                for c in 0..4 {
                    entries[r][c] += m.entries[r][c] / mats.len() as f64;
                }
            }
        }
        Ok(Self::new(entries, first.sites))
    }
}

/// Occupations of one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteDensityMatrix {
    pub p_up: f64,
    pub p_down: f64,
    pub site: usize,
}

impl SiteDensityMatrix {
    pub fn purity(&self) -> f64 {
        self.p_up * self.p_up + self.p_down * self.p_down
    }
}

fn check_pair(len: usize, a: usize, b: usize) -> Result<()> {
    if 1 <= a && a < b && b <= len {
        Ok(())
    } else {
        Err(Error::InvalidPair { a, b, len })
    }
}

#[inline]
fn pair_class(bits: u64, a: usize, b: usize) -> usize {
    let up_a = (bits >> (a - 1)) & 1 == 1;
    let up_b = (bits >> (b - 1)) & 1 == 1;
    match (up_a, up_b) {
        (true, true) => PP,
        (true, false) => PM,
        (false, true) => MP,
        (false, false) => MM,
    }
}

/// `Tr_{rest} |ψ⟩⟨ψ|` for the pair `(a, b)`, in `O(dim · L)`.
pub fn pair_rdm(state: &StateVector, a: usize, b: usize) -> Result<PairDensityMatrix> {
    let len = state.len();
    check_pair(len, a, b)?;
    let basis = state.basis();
    let amps = state.amplitudes();
    let swap = (1u64 << (a - 1)) | (1u64 << (b - 1));
    let mut e = [[0.0; 4]; 4];
    let mut coherence = 0.0;
    for (bits, amp) in state.iter() {
        let class = pair_class(bits, a, b);
        e[class][class] += amp * amp;
        if class == PM {
            coherence += amp * amps[basis.rank_bits(bits ^ swap)];
        }
    }
    e[PM][MP] = coherence;
    e[MP][PM] = coherence;
    Ok(PairDensityMatrix::new(e, (a, b)))
}

/// Concurrence of a two-qubit state.
///
/// X-form input uses `2 max(0, |ρ₂₃| − √(ρ₁₁ρ₄₄), |ρ₁₄| − √(ρ₂₂ρ₃₃))`;
/// anything else goes through [`wootters_concurrence`].
pub fn concurrence(rho: &PairDensityMatrix) -> Result<f64> {
    rho.validate()?;
    if !rho.is_x_form(0.0) {
        let m = rho.as_matrix().map(|x| Complex64::new(x, 0.0));
        return Ok(wootters_concurrence(&m));
    }
    let e = &rho.entries;
    let flip = e[PM][MP].abs() - (e[PP][PP].max(0.0) * e[MM][MM].max(0.0)).sqrt();
    let pair = e[PP][MM].abs() - (e[PM][PM].max(0.0) * e[MP][MP].max(0.0)).sqrt();
    Ok(clamp_unit(2.0 * flip.max(pair)))
}

fn clamp_unit(c: f64) -> f64 {
    if c < CLAMP_TOL {
        0.0
    } else {
        c.min(1.0)
    }
}

/// `σ_y ⊗ σ_y` in the `{++, +−, −+, −−}` basis.
fn sigma_yy() -> Matrix4<Complex64> {
    let mut y = Matrix4::zeros();
    y[(0, 3)] = Complex64::new(-1.0, 0.0);
    y[(1, 2)] = Complex64::new(1.0, 0.0);
    y[(2, 1)] = Complex64::new(1.0, 0.0);
    y[(3, 0)] = Complex64::new(-1.0, 0.0);
    y
}

/// General Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`.
///
/// The `λ` are square roots of the eigenvalues of
/// `R = ρ (σy⊗σy) ρ* (σy⊗σy)`. `R` is similar to the Hermitian
/// `√ρ ρ̃ √ρ` with `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`, which is diagonalized instead.
pub fn wootters_concurrence(rho: &Matrix4<Complex64>) -> f64 {
    let y = sigma_yy();
    let rho_tilde = y * rho.map(|z| z.conj()) * y;

    let (vals, vecs) = hermitian4_eigen(rho);
    let sqrt_vals = nalgebra::Vector4::from_fn(|i, _| Complex64::new(vals[i].max(0.0).sqrt(), 0.0));
    let sqrt_rho = vecs * Matrix4::from_diagonal(&sqrt_vals) * vecs.adjoint();

    let m = sqrt_rho * rho_tilde * sqrt_rho;
    let m = (m + m.adjoint()).map(|z| z * 0.5);
    let mut lambdas: Vec<f64> = hermitian4_eigenvalues(&m)
        .iter()
        .map(|&v| v.max(0.0).sqrt())
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    clamp_unit(lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3])
}

/// Occupations of site `a`.
pub fn site_rdm(state: &StateVector, a: usize) -> Result<SiteDensityMatrix> {
    let len = state.len();
    if !(1..=len).contains(&a) {
        return Err(Error::InvalidPair { a, b: a, len });
    }
    let p_up: f64 = state
        .iter()
        .filter(|(bits, _)| (bits >> (a - 1)) & 1 == 1)
        .map(|(_, amp)| amp * amp)
        .sum();
    let total: f64 = state.amplitudes().iter().map(|x| x * x).sum();
    Ok(SiteDensityMatrix {
        p_up,
        p_down: total - p_up,
        site: a,
    })
}

fn check_normalized(total: f64) -> Result<()> {
    if (total - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidParams(format!("state norm² is {total}, not 1")));
    }
    Ok(())
}

/// Meyer–Wallach `Q = 2 (1 − (1/L) Σ_j Tr ρ_j²)` from one-site purities.
pub fn global_q(state: &StateVector) -> Result<f64> {
    let len = state.len();
    let mut p_up = vec![0.0; len];
    let mut total = 0.0;
    for (mut bits, amp) in state.iter() {
        let w = amp * amp;
        total += w;
        while bits != 0 {
            p_up[bits.trailing_zeros() as usize] += w;
            bits &= bits - 1;
        }
    }
    check_normalized(total)?;
    let mean_purity: f64 = p_up
        .iter()
        .map(|&p| p * p + (total - p) * (total - p))
        .sum::<f64>()
        / len as f64;
    Ok(2.0 * (1.0 - mean_purity))
}

/// Purity form of `Q` for an arbitrary state on the full `2^L` space.
pub fn global_q_full(amps: &[Complex64]) -> Result<f64> {
    let len = full_space_len(amps.len())?;
    let total: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    check_normalized(total)?;
    let mut purity_sum = 0.0;
    for j in 0..len {
        // ρ_j = [[a, c], [c*, d]] over bit j
        let (mut a, mut d, mut c) = (0.0, 0.0, Complex64::new(0.0, 0.0));
        let bit = 1usize << j;
        for x in 0..amps.len() {
            if x & bit == 0 {
                let lo = amps[x];
                let hi = amps[x | bit];
                d += lo.norm_sqr();
                a += hi.norm_sqr();
                c += hi * lo.conj();
            }
        }
        purity_sum += a * a + d * d + 2.0 * c.norm_sqr();
    }
    Ok(2.0 * (1.0 - purity_sum / len as f64))
}

fn full_space_len(n: usize) -> Result<usize> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidParams(format!(
            "full-space vector length {n} is not 2^L"
        )));
    }
    Ok(n.trailing_zeros() as usize)
}

/// Direct Meyer–Wallach evaluation `Q = (4/L) Σ_j D(u_j, v_j)` with
/// `D(u, v) = Σ_{x<y} |u_x v_y − u_y v_x|²`, where `u_j` (`v_j`) collects the
/// amplitudes with site `j` down (up), site `j` removed from the index.
pub fn global_q_wedge_full(amps: &[Complex64]) -> Result<f64> {
    let len = full_space_len(amps.len())?;
    if len > WEDGE_MAX_LEN {
        return Err(Error::TooLargeForOracle {
            len,
            limit: WEDGE_MAX_LEN,
        });
    }
    let half = amps.len() / 2;
    let mut acc = 0.0;
    let mut u = vec![Complex64::new(0.0, 0.0); half];
    let mut v = vec![Complex64::new(0.0, 0.0); half];
    for j in 0..len {
        let low = (1usize << j) - 1;
        for x in 0..half {
            let base = ((x & !low) << 1) | (x & low);
            u[x] = amps[base];
            v[x] = amps[base | (1 << j)];
        }
        let mut d = 0.0;
        for x in 0..half {
            for y in x + 1..half {
                d += (u[x] * v[y] - u[y] * v[x]).norm_sqr();
            }
        }
        acc += d;
    }
    Ok(4.0 * acc / len as f64)
}

/// Wedge-product form of `Q` for a sector state (oracle path, `L <= 16`).
pub fn global_q_wedge(state: &StateVector) -> Result<f64> {
    let len = state.len();
    if len > WEDGE_MAX_LEN {
        return Err(Error::TooLargeForOracle {
            len,
            limit: WEDGE_MAX_LEN,
        });
    }
    let full: Vec<Complex64> = state
        .to_full_space()
        .into_iter()
        .map(|x| Complex64::new(x, 0.0))
        .collect();
    global_q_wedge_full(&full)
}

/// `⟨ψ| S^z_i S^z_j |ψ⟩`.
pub fn zz_correlation(state: &StateVector, i: usize, j: usize) -> Result<f64> {
    let len = state.len();
    if !(1..=len).contains(&i) || !(1..=len).contains(&j) {
        return Err(Error::InvalidPair { a: i, b: j, len });
    }
    Ok(state
        .iter()
        .map(|(bits, amp)| {
            let same = ((bits >> (i - 1)) ^ (bits >> (j - 1))) & 1 == 0;
            let s = if same { 0.25 } else { -0.25 };
            s * amp * amp
        })
        .sum())
}

/// Concurrence of every nearest-neighbour bond `(i, i+1)`, `i = 1..L-1`.
pub fn bond_concurrences(state: &StateVector) -> Result<Vec<f64>> {
    (1..state.len())
        .map(|i| concurrence(&pair_rdm(state, i, i + 1)?))
        .collect()
}

/// Pair matrix of the kink state assembled from the Ω sums.
pub fn kink_pair_rdm(
    kp: &KinkParams,
    len: usize,
    a: usize,
    b: usize,
    two_m: i64,
) -> Result<PairDensityMatrix> {
    let (o1, o0, om1) = omega_pair(kp, len, a, b, two_m)?;
    let norm = normalization(kp, len, two_m)?;
    let q = kp.q;
    let (ai, bi) = (a as i64, b as i64);
    let w = |exp: i64, omega: ScaledValue| (ScaledValue::powi(q, exp) * omega).ratio(&norm);
    let mut e = [[0.0; 4]; 4];
    e[PP][PP] = w(ai + bi, o1);
    e[PM][PM] = w(ai - bi, o0);
    e[MP][MP] = w(bi - ai, o0);
    e[MM][MM] = w(-ai - bi, om1);
    let coherence = o0.ratio(&norm);
    e[PM][MP] = coherence;
    e[MP][PM] = coherence;
    Ok(PairDensityMatrix::new(e, (a, b)))
}

/// `C = 2 N² (Ω₀ − √(Ω₁ Ω₋₁))` in sector `two_m`.
pub fn kink_concurrence_in_sector(
    kp: &KinkParams,
    len: usize,
    a: usize,
    b: usize,
    two_m: i64,
) -> Result<f64> {
    let (o1, o0, om1) = omega_pair(kp, len, a, b, two_m)?;
    let norm = normalization(kp, len, two_m)?;
    let c = 2.0 * (o0.ratio(&norm) - (o1 * om1).sqrt().ratio(&norm));
    Ok(clamp_unit(c))
}

/// Kink-state concurrence of the pair `(a, b)` in the `m = 0` sector.
pub fn kink_concurrence(kp: &KinkParams, len: usize, a: usize, b: usize) -> Result<f64> {
    kink_concurrence_in_sector(kp, len, a, b, 0)
}

/// One-site occupations of the kink state for every site.
pub fn kink_site_rdms(kp: &KinkParams, len: usize, two_m: i64) -> Result<Vec<SiteDensityMatrix>> {
    let (norm, per_site) = omega_single_all(kp, len, two_m)?;
    Ok(per_site
        .iter()
        .enumerate()
        .map(|(idx, &(plus, minus))| {
            let a = idx as i64 + 1;
            SiteDensityMatrix {
                p_up: (ScaledValue::powi(kp.q, a) * plus).ratio(&norm),
                p_down: (ScaledValue::powi(kp.q, -a) * minus).ratio(&norm),
                site: idx + 1,
            }
        })
        .collect())
}

/// Global entanglement of the kink state,
/// `Q = 2 (1 − (N⁴/L) Σ_j (q^{2j} Ω²_{1/2} + q^{-2j} Ω²_{-1/2}))`.
pub fn kink_global_q(kp: &KinkParams, len: usize, two_m: i64) -> Result<f64> {
    let sites = kink_site_rdms(kp, len, two_m)?;
    let mean_purity = sites.iter().map(|s| s.purity()).sum::<f64>() / len as f64;
    Ok(2.0 * (1.0 - mean_purity))
}
