//! Lowest eigenpairs per sector and the global ground state across sectors.
//!
//! Large sectors use a thick-restart Lanczos iteration with full
//! reorthogonalization of every new Krylov vector (two Gram-Schmidt passes).
//! When more than one eigenpair is requested, converged vectors are locked and
//! the iteration continues on the deflated operator. Sectors no larger than
//! [`LanczosConfig::dense_threshold`] are diagonalized densely.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::{SectorBasis, SpinConfig};
use crate::error::{Error, Result};
use crate::hamiltonian::{ModelParams, SectorHamiltonian};
use crate::kinkstate::critical_field;

/// Normalized real amplitudes on one magnetization sector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: SectorBasis,
    amplitudes: Vec<f64>,
    energy: Option<f64>,
    residual: Option<f64>,
}

impl StateVector {
    /// Normalizes `amplitudes` onto `basis`.
    pub fn new(basis: SectorBasis, mut amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                actual: amplitudes.len(),
            });
        }
        let norm = norm(&amplitudes);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidParams("state has zero or non-finite norm".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self {
            basis,
            amplitudes,
            energy: None,
            residual: None,
        })
    }

    /// The single configuration `config` with amplitude one.
    pub fn product(config: SpinConfig) -> Result<Self> {
        let basis = SectorBasis::new(config.len(), config.two_m())?;
        let mut amps = vec![0.0; basis.dim()];
        amps[basis.rank(&config)?] = 1.0;
        Self::new(basis, amps)
    }

    pub(crate) fn with_energy(mut self, energy: f64, residual: f64) -> Self {
        self.energy = Some(energy);
        self.residual = Some(residual);
        self
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn two_m(&self) -> i64 {
        self.basis.two_m()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Eigenvalue estimate, present for solver output.
    pub fn energy(&self) -> Option<f64> {
        self.energy
    }

    /// `‖Hv - Ev‖`, present for solver output.
    pub fn residual(&self) -> Option<f64> {
        self.residual
    }

    /// Configuration words paired with amplitudes.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.basis.iter().zip(self.amplitudes.iter().copied())
    }

    /// Spatial mirror image `s_j -> s_{L+1-j}` (same sector).
    pub fn mirrored(&self) -> Self {
        let mut amps = vec![0.0; self.amplitudes.len()];
        let len = self.len();
        for (bits, a) in self.iter() {
            let m = SpinConfig::new(bits, len).expect("member word").mirrored();
            amps[self.basis.rank_bits(m.bits())] = a;
        }
        Self {
            basis: self.basis,
            amplitudes: amps,
            energy: None,
            residual: None,
        }
    }

    /// Global spin flip, landing in sector `-2m`.
    pub fn flipped(&self) -> Result<Self> {
        let basis = SectorBasis::with_max_len(self.len(), -self.two_m(), self.len())?;
        let mut amps = vec![0.0; self.amplitudes.len()];
        let len = self.len();
        for (bits, a) in self.iter() {
            let f = SpinConfig::new(bits, len).expect("member word").flipped();
            amps[basis.rank_bits(f.bits())] = a;
        }
        Ok(Self {
            basis,
            amplitudes: amps,
            energy: None,
            residual: None,
        })
    }

    /// Embedding into the full `2^L` product basis, indexed by configuration word.
    pub fn to_full_space(&self) -> Vec<f64> {
        let mut full = vec![0.0; 1usize << self.len()];
        for (bits, a) in self.iter() {
            full[bits as usize] = a;
        }
        full
    }
}

/// Solver knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosConfig {
    /// Target residual `‖Hv - Ev‖`.
    pub tol: f64,
    /// Matvec budget per requested eigenpair.
    pub max_matvecs: usize,
    /// Krylov basis size before a thick restart.
    pub max_basis: usize,
    /// Sectors with at most this many states are diagonalized densely.
    pub dense_threshold: usize,
    /// Seed of the start vector.
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_matvecs: 5000,
            max_basis: 40,
            dense_threshold: 512,
            seed: 0x6b69_6e6b,
        }
    }
}

/// Chunk partials are added in index order so the result does not depend on
/// the number of threads.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    if a.len() > 1 << 16 {
        let partials: Vec<f64> = a
            .par_chunks(1 << 14)
            .zip(b.par_chunks(1 << 14))
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
            .collect();
        partials.iter().sum()
    } else {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    if y.len() > 1 << 16 {
        y.par_chunks_mut(1 << 14)
            .zip(x.par_chunks(1 << 14))
            .for_each(|(yc, xc)| yc.iter_mut().zip(xc).for_each(|(a, b)| *a += alpha * b));
    } else {
        y.iter_mut().zip(x).for_each(|(a, b)| *a += alpha * b);
    }
}

fn scale(alpha: f64, y: &mut [f64]) {
    y.iter_mut().for_each(|a| *a *= alpha);
}

/// Removes the components of `w` along the orthonormal `vecs`, twice.
/// Returns the accumulated projection coefficients.
fn orthogonalize(w: &mut [f64], vecs: &[Vec<f64>]) -> Vec<f64> {
    let mut coeffs = vec![0.0; vecs.len()];
    for _ in 0..2 {
        let proj: Vec<f64> = vecs.iter().map(|v| dot(v, w)).collect();
        for (v, (&c, acc)) in vecs.iter().zip(proj.iter().zip(coeffs.iter_mut())) {
            axpy(-c, v, w);
            *acc += c;
        }
    }
    coeffs
}

/// `Σ_i coeffs[i] * vecs[i]`.
fn combine(vecs: &[Vec<f64>], coeffs: impl Iterator<Item = f64>, dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for (v, c) in vecs.iter().zip(coeffs) {
        axpy(c, v, &mut out);
    }
    out
}

fn sorted_eigen(t: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    crate::linalg::symmetric_eigen(&t)
}

/// Makes the largest-magnitude component positive.
fn fix_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if pivot < 0.0 {
        scale(-1.0, v);
    }
}

struct Eigenpair {
    value: f64,
    vector: Vec<f64>,
    residual: f64,
}

fn explicit_residual(h: &SectorHamiltonian, x: &[f64]) -> Result<(f64, f64)> {
    let hx = h.matvec(x)?;
    let theta = dot(x, &hx);
    let r: f64 = hx
        .iter()
        .zip(x)
        .map(|(a, b)| (a - theta * b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok((theta, r))
}

/// Lowest eigenpair of `h` restricted to the orthogonal complement of `locked`.
fn lanczos_one(
    h: &SectorHamiltonian,
    locked: &[Vec<f64>],
    cfg: &LanczosConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Eigenpair> {
    let dim = h.dim();
    let two_m = Some(h.basis().two_m());
    let available = dim - locked.len();
    let m_max = cfg.max_basis.max(3).min(available);
    let keep_max = (m_max / 3).max(1);
    let scale_hint = h
        .diagonal()
        .iter()
        .fold(h.params().j, |m, d| m.max(d.abs()));
    let breakdown = 1e-13 * scale_hint;

    let mut v0: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
    orthogonalize(&mut v0, locked);
    let n0 = norm(&v0);
    scale(1.0 / n0, &mut v0);

    let mut basis: Vec<Vec<f64>> = vec![v0];
    let mut t = DMatrix::<f64>::zeros(m_max, m_max);
    let mut filled = 0usize;
    let mut matvecs = 0usize;
    let mut best = f64::INFINITY;

    loop {
        let mut beta = 0.0;
        let mut residual_vec: Option<Vec<f64>> = None;
        let mut exhausted = false;
        while filled < basis.len() {
            let j = filled;
            let mut w = h.matvec(&basis[j])?;
            matvecs += 1;
            orthogonalize(&mut w, locked);
            let coeffs = orthogonalize(&mut w, &basis);
            for (i, &c) in coeffs.iter().enumerate() {
                t[(i, j)] = c;
                t[(j, i)] = c;
            }
            filled += 1;
            beta = norm(&w);
            if beta <= breakdown {
                exhausted = true;
                break;
            }
            if basis.len() == m_max {
                residual_vec = Some(w);
                break;
            }
            scale(1.0 / beta, &mut w);
            basis.push(w);
        }

        let nv = basis.len();
        let (theta, y) = sorted_eigen(t.view((0, 0), (nv, nv)).into_owned());
        let estimate = if exhausted {
            0.0
        } else {
            (beta * y[(nv - 1, 0)]).abs()
        };
        best = best.min(estimate);

        if estimate <= cfg.tol || exhausted || nv == available {
            let mut x = combine(&basis, y.column(0).iter().copied(), dim);
            orthogonalize(&mut x, locked);
            let nx = norm(&x);
            scale(1.0 / nx, &mut x);
            let (value, residual) = explicit_residual(h, &x)?;
            matvecs += 1;
            best = best.min(residual);
            if residual <= cfg.tol || exhausted || nv == available {
                if residual > cfg.tol {
                    return Err(Error::Convergence {
                        two_m,
                        matvecs,
                        best_residual: residual,
                    });
                }
                fix_sign(&mut x);
                return Ok(Eigenpair {
                    value,
                    vector: x,
                    residual,
                });
            }
            log::debug!(
                "sector {two_m:?}: Ritz estimate {estimate:e} but explicit residual {residual:e}"
            );
        }
        if matvecs >= cfg.max_matvecs {
            return Err(Error::Convergence {
                two_m,
                matvecs,
                best_residual: best,
            });
        }

        // Thick restart: keep the lowest Ritz vectors plus the residual direction.
        let keep = keep_max.min(nv - 1);
        let mut new_basis: Vec<Vec<f64>> = (0..keep)
            .map(|i| combine(&basis, y.column(i).iter().copied(), dim))
            .collect();
        let mut r = residual_vec.expect("restart only after a full basis");
        scale(1.0 / beta, &mut r);
        new_basis.push(r);
        drop(basis);
        basis = new_basis;
        t.fill(0.0);
        for i in 0..keep {
            t[(i, i)] = theta[i];
            let s = beta * y[(nv - 1, i)];
            t[(keep, i)] = s;
            t[(i, keep)] = s;
        }
        filled = keep;
    }
}

fn dense_lowest(h: &SectorHamiltonian, k: usize) -> Result<Vec<Eigenpair>> {
    let m = h.dense_matrix()?;
    let (values, vectors) = sorted_eigen(m);
    (0..k)
        .map(|i| {
            let mut x: Vec<f64> = vectors.column(i).iter().copied().collect();
            fix_sign(&mut x);
            let (value, residual) = explicit_residual(h, &x)?;
            debug_assert!((value - values[i]).abs() < 1e-9 * (1.0 + values[i].abs()));
            Ok(Eigenpair {
                value,
                vector: x,
                residual,
            })
        })
        .collect()
}

/// The `k` lowest eigenpairs of a sector Hamiltonian, ascending in energy.
pub fn lowest_eigenpairs(
    h: &SectorHamiltonian,
    k: usize,
    cfg: &LanczosConfig,
) -> Result<Vec<StateVector>> {
    let dim = h.dim();
    if k == 0 || k > dim {
        return Err(Error::InvalidParams(format!(
            "requested {k} eigenpairs of a {dim}-dimensional sector"
        )));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidParams("tolerance must be positive".into()));
    }
    let pairs = if dim <= cfg.dense_threshold {
        dense_lowest(h, k)?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut locked: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut pairs = Vec::with_capacity(k);
        for _ in 0..k {
            let pair = lanczos_one(h, &locked, cfg, &mut rng)?;
            locked.push(pair.vector.clone());
            pairs.push(pair);
        }
        pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
        pairs
    };
    pairs
        .into_iter()
        .map(|p| {
            Ok(StateVector::new(*h.basis(), p.vector)?.with_energy(p.value, p.residual))
        })
        .collect()
}

/// Lowest energy of every sector and the sectors attaining the minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateReport {
    /// `(2m, lowest energy)` for every solved sector, ascending in `2m`.
    pub per_sector: Vec<(i64, f64)>,
    pub global_energy: f64,
    /// Sectors within the degeneracy tolerance of `global_energy`.
    pub winners: Vec<i64>,
    pub degenerate: bool,
}

impl GroundStateReport {
    fn from_energies(per_sector: Vec<(i64, f64)>, degeneracy_tol: f64) -> Self {
        let global_energy = per_sector
            .iter()
            .map(|&(_, e)| e)
            .fold(f64::INFINITY, f64::min);
        let winners: Vec<i64> = per_sector
            .iter()
            .filter(|&&(_, e)| e - global_energy <= degeneracy_tol)
            .map(|&(m, _)| m)
            .collect();
        let degenerate = winners.len() > 1;
        Self {
            per_sector,
            global_energy,
            winners,
            degenerate,
        }
    }

    /// Spread between the highest and lowest per-sector energies.
    pub fn spread(&self) -> f64 {
        let hi = self
            .per_sector
            .iter()
            .map(|&(_, e)| e)
            .fold(f64::NEG_INFINITY, f64::max);
        hi - self.global_energy
    }
}

/// Default tolerance for declaring two sector energies degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

fn solve_sectors(
    params: ModelParams,
    sectors: &[SectorBasis],
    cfg: &LanczosConfig,
) -> Result<Vec<StateVector>> {
    sectors
        .par_iter()
        .map(|&basis| {
            let h = SectorHamiltonian::new(params, basis);
            let mut states = lowest_eigenpairs(&h, 1, cfg).map_err(|e| match e {
                Error::Convergence {
                    matvecs,
                    best_residual,
                    ..
                } => Error::Convergence {
                    two_m: Some(basis.two_m()),
                    matvecs,
                    best_residual,
                },
                other => other,
            })?;
            Ok(states.remove(0))
        })
        .collect()
}

/// Lowest energy in every one of the `L + 1` sectors.
pub fn ground_state_scan(
    params: ModelParams,
    len: usize,
    degeneracy_tol: f64,
    cfg: &LanczosConfig,
) -> Result<GroundStateReport> {
    let sectors = SectorBasis::all_sectors(len)?;
    let states = solve_sectors(params, &sectors, cfg)?;
    let per_sector = states
        .iter()
        .map(|s| (s.two_m(), s.energy().expect("solver output")))
        .collect();
    Ok(GroundStateReport::from_energies(per_sector, degeneracy_tol))
}

/// Which sectors to search for the ground state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorSearch {
    /// Solve all `L + 1` sectors.
    Full,
    /// Solve only the given sector.
    Fixed(i64),
    /// Full scan up to [`AUTO_SCAN_MAX_LEN`] sites; beyond that, the
    /// polarized doublet when `Δ >= 1` and `h < h_c`, otherwise the
    /// lowest-|m| sector (`m = 0` for even `L`).
    Auto,
}

/// Longest chain for which [`SectorSearch::Auto`] still scans every sector.
pub const AUTO_SCAN_MAX_LEN: usize = 14;

/// Ground-state search result: the report plus one state per winning sector.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub params: ModelParams,
    pub report: GroundStateReport,
    pub states: Vec<StateVector>,
    /// False when only a subset of sectors was solved.
    pub full_scan: bool,
}

impl GroundState {
    /// The ground state when exactly one sector wins.
    pub fn unique(&self) -> Option<&StateVector> {
        if self.report.degenerate {
            None
        } else {
            self.states.first()
        }
    }

    /// True when the winners are exactly the two fully polarized sectors.
    pub fn is_ferro_doublet(&self) -> bool {
        let len = self.states.first().map(|s| s.len() as i64).unwrap_or(0);
        let mut w = self.report.winners.clone();
        w.sort_unstable();
        w == vec![-len, len]
    }

    pub fn state_in(&self, two_m: i64) -> Option<&StateVector> {
        self.states.iter().find(|s| s.two_m() == two_m)
    }
}

/// Searches for the ground state of the chain, keeping winning state vectors.
pub fn ground_state(
    params: ModelParams,
    len: usize,
    search: SectorSearch,
    degeneracy_tol: f64,
    cfg: &LanczosConfig,
) -> Result<GroundState> {
    let all = SectorBasis::all_sectors(len)?;
    let (sectors, full_scan): (Vec<SectorBasis>, bool) = match search {
        SectorSearch::Full => (all, true),
        SectorSearch::Fixed(two_m) => (vec![SectorBasis::new(len, two_m)?], false),
        SectorSearch::Auto if len <= AUTO_SCAN_MAX_LEN => (all, true),
        SectorSearch::Auto => {
            let ferro = params.delta >= 1.0
                && critical_field(params.delta).map_or(false, |hc| params.h < hc);
            let chosen = if ferro {
                vec![all[0], all[len]]
            } else if len % 2 == 0 {
                vec![SectorBasis::new(len, 0)?]
            } else {
                vec![SectorBasis::new(len, -1)?, SectorBasis::new(len, 1)?]
            };
            (chosen, false)
        }
    };
    let states = solve_sectors(params, &sectors, cfg)?;
    let per_sector = states
        .iter()
        .map(|s| (s.two_m(), s.energy().expect("solver output")))
        .collect();
    let report = GroundStateReport::from_energies(per_sector, degeneracy_tol);
    let states = states
        .into_iter()
        .filter(|s| report.winners.contains(&s.two_m()))
        .collect();
    Ok(GroundState {
        params,
        report,
        states,
        full_scan,
    })
}
