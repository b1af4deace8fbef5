//! Finite-size studies built on exact diagonalization.
//!
//! Grid points are independent and evaluated in parallel; every result keeps
//! the order of its input grid.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::eigen::{ground_state, GroundState, LanczosConfig, SectorSearch, DEGENERACY_TOL};
use crate::entangle::{bond_concurrences, concurrence, global_q, pair_rdm, zz_correlation};
use crate::error::{Error, Result};
use crate::hamiltonian::ModelParams;

pub use crate::kinkstate::critical_field;

/// Concurrence below which a pair counts as unentangled in [`detect_jump`].
pub const JUMP_LOW: f64 = 1e-10;
/// Concurrence above which a pair counts as entangled in [`detect_jump`].
pub const JUMP_HIGH: f64 = 0.1;

const FIT_STEP_TOL: f64 = 1e-10;
const FIT_MAX_ITER: usize = 200;

/// How ground states are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdOptions {
    pub lanczos: LanczosConfig,
    pub search: SectorSearch,
    pub degeneracy_tol: f64,
}

impl Default for EdOptions {
    fn default() -> Self {
        Self {
            lanczos: LanczosConfig::default(),
            search: SectorSearch::Auto,
            degeneracy_tol: DEGENERACY_TOL,
        }
    }
}

pub fn solve(params: ModelParams, len: usize, opts: &EdOptions) -> Result<GroundState> {
    ground_state(params, len, opts.search, opts.degeneracy_tol, &opts.lanczos)
}

/// Pair concurrence of a ground state.
///
/// A polarized doublet (ferromagnetic phase) consists of product states and
/// gives zero; any other degeneracy is refused.
pub fn ground_pair_concurrence(gs: &GroundState, a: usize, b: usize) -> Result<f64> {
    if let Some(state) = gs.unique() {
        return concurrence(&pair_rdm(state, a, b)?);
    }
    if gs.is_ferro_doublet() {
        return concurrence(&pair_rdm(&gs.states[0], a, b)?);
    }
    Err(Error::DegenerateGroundState {
        winners: gs.report.winners.clone(),
    })
}

fn check_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParams(format!("{what} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams(format!(
            "{what} grid must be finite and strictly ascending"
        )));
    }
    Ok(())
}

/// Location of the first-order jump in a pair concurrence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpResult {
    pub h_jump: f64,
    pub c_below: f64,
    pub c_above: f64,
}

/// Scans the boundary field and returns the midpoint of the first interval
/// where the concurrence rises from below [`JUMP_LOW`] to above [`JUMP_HIGH`].
pub fn detect_jump(
    len: usize,
    delta: f64,
    pair: (usize, usize),
    h_grid: &[f64],
    opts: &EdOptions,
) -> Result<JumpResult> {
    check_grid(h_grid, "field")?;
    let values: Vec<f64> = h_grid
        .par_iter()
        .map(|&h| {
            let gs = solve(ModelParams::new(delta, h)?, len, opts)?;
            ground_pair_concurrence(&gs, pair.0, pair.1)
        })
        .collect::<Result<_>>()?;
    values
        .windows(2)
        .zip(h_grid.windows(2))
        .find(|(c, _)| c[0] < JUMP_LOW && c[1] > JUMP_HIGH)
        .map(|(c, h)| JumpResult {
            h_jump: 0.5 * (h[0] + h[1]),
            c_below: c[0],
            c_above: c[1],
        })
        .ok_or(Error::JumpNotFound)
}

/// Least-squares parameters of `C(L) = a0 + a1 exp(-a2 L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub rms_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// False when the series carries no decay (e.g. it is constant).
    pub decay_identifiable: bool,
}

fn fit_model(p: &Vector3<f64>, x: f64) -> f64 {
    p[0] + p[1] * (-p[2] * x).exp()
}

fn fit_cost(p: &Vector3<f64>, xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| (fit_model(p, x) - y).powi(2))
        .sum()
}

/// Fits `C(L) = a0 + a1 exp(-a2 L)` by damped Gauss–Newton (Levenberg).
///
/// Starts from `a0 = C(L_max)`, `a2` from the ratio of the first two
/// successive differences, and `a1` from the first residual. Stops when the
/// accepted step falls below `1e-10`.
pub fn fit_stabilization(series: &[(f64, f64)]) -> Result<FitResult> {
    if series.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 points, got {}", series.len())));
    }
    if series.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Fit("L values must be strictly increasing".into()));
    }
    if series.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Fit("non-finite data".into()));
    }
    let xs: Vec<f64> = series.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = series.iter().map(|s| s.1).collect();
    let n = xs.len();

    let spread = ys.iter().fold(0.0f64, |m, &y| m.max((y - ys[0]).abs()));
    let scale = ys.iter().fold(0.0f64, |m, &y| m.max(y.abs())).max(1.0);
    if spread <= 1e-14 * scale {
        let mean = ys.iter().sum::<f64>() / n as f64;
        let rms = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        return Ok(FitResult {
            a0: mean,
            a1: 0.0,
            a2: 0.0,
            rms_residual: rms,
            iterations: 0,
            converged: true,
            decay_identifiable: false,
        });
    }

    let a0 = ys[n - 1];
    let d0 = ys[1] - ys[0];
    let d1 = ys[2] - ys[1];
    let ratio = d1 / d0;
    let a2 = if ratio.is_finite() && ratio > 0.0 && ratio != 1.0 {
        -ratio.ln() / (xs[2] - xs[1])
    } else {
        1.0 / (xs[n - 1] - xs[0])
    };
    let a1 = (ys[0] - a0) * (a2 * xs[0]).exp();
    let mut p = Vector3::new(a0, a1, a2);
    let mut cost = fit_cost(&p, &xs, &ys);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < FIT_MAX_ITER {
        iterations += 1;
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (&x, &y) in xs.iter().zip(&ys) {
            let e = (-p[2] * x).exp();
            let j = Vector3::new(1.0, e, -p[1] * x * e);
            let r = fit_model(&p, x) - y;
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let damped = jtj + Matrix3::identity() * lambda;
            let step = damped
                .cholesky()
                .ok_or_else(|| Error::Fit("singular normal equations".into()))?
                .solve(&(-jtr));
            if step.norm() <= FIT_STEP_TOL {
                converged = true;
                break;
            }
            let trial = p + step;
            let trial_cost = fit_cost(&trial, &xs, &ys);
            if trial_cost.is_finite() && trial_cost <= cost {
                p = trial;
                cost = trial_cost;
                lambda = (lambda * 0.1).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if converged {
            break;
        }
        if !accepted {
            // No descent direction left: we sit at a minimum to working precision.
            converged = jtr.norm() <= 1e-12 * (1.0 + cost.sqrt());
            break;
        }
    }
    if !converged {
        return Err(Error::Fit(format!("no convergence after {iterations} iterations")));
    }
    Ok(FitResult {
        a0: p[0],
        a1: p[1],
        a2: p[2],
        rms_residual: (cost / n as f64).sqrt(),
        iterations,
        converged,
        decay_identifiable: true,
    })
}

/// Central-pair concurrence `C(L/2, L/2 + 1)` for each even chain length.
pub fn central_pair_series(
    delta: f64,
    h: f64,
    lens: &[usize],
    opts: &EdOptions,
) -> Result<Vec<(usize, f64)>> {
    let params = ModelParams::new(delta, h)?;
    lens.par_iter()
        .map(|&len| {
            if len % 2 != 0 {
                return Err(Error::InvalidParams(format!("central pair needs even L, got {len}")));
            }
            let gs = solve(params, len, opts)?;
            Ok((len, ground_pair_concurrence(&gs, len / 2, len / 2 + 1)?))
        })
        .collect()
}

/// Concurrence of one pair along the anisotropy grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCurve {
    pub pair: (usize, usize),
    pub values: Vec<f64>,
    /// Grid value with the largest concurrence (first one on ties).
    pub argmax: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub delta_grid: Vec<f64>,
    pub curves: Vec<PairCurve>,
}

/// Pair concurrences as functions of `Δ` at fixed `L` and `h`.
pub fn anisotropy_sweep(
    len: usize,
    h: f64,
    pairs: &[(usize, usize)],
    delta_grid: &[f64],
    opts: &EdOptions,
) -> Result<SweepTable> {
    check_grid(delta_grid, "anisotropy")?;
    if pairs.is_empty() {
        return Err(Error::InvalidParams("no pairs requested".into()));
    }
    let rows: Vec<Vec<f64>> = delta_grid
        .par_iter()
        .map(|&delta| {
            let gs = solve(ModelParams::new(delta, h)?, len, opts)?;
            pairs
                .iter()
                .map(|&(a, b)| ground_pair_concurrence(&gs, a, b))
                .collect()
        })
        .collect::<Result<_>>()?;
    let curves = pairs
        .iter()
        .enumerate()
        .map(|(k, &pair)| {
            let values: Vec<f64> = rows.iter().map(|r| r[k]).collect();
            let best = values
                .iter()
                .enumerate()
                .fold(0, |bi, (i, &v)| if v > values[bi] { i } else { bi });
            PairCurve {
                pair,
                argmax: delta_grid[best],
                values,
            }
        })
        .collect();
    Ok(SweepTable {
        delta_grid: delta_grid.to_vec(),
        curves,
    })
}

/// Nearest-neighbour concurrence and z-z correlation along the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct BondProfile {
    pub len: usize,
    pub params: ModelParams,
    /// `C(i, i+1)` for `i = 1..L-1`.
    pub values: Vec<f64>,
    /// `⟨S^z_i S^z_{i+1}⟩` for `i = 1..L-1`.
    pub zz: Vec<f64>,
    /// Set when the ground state is the polarized doublet and one of its
    /// product states stands in for it.
    pub polarized: bool,
}

pub fn bond_profile(len: usize, params: ModelParams, opts: &EdOptions) -> Result<BondProfile> {
    let gs = solve(params, len, opts)?;
    let (state, polarized) = match gs.unique() {
        Some(s) => (s, false),
        None if gs.is_ferro_doublet() => (&gs.states[0], true),
        None => {
            return Err(Error::DegenerateGroundState {
                winners: gs.report.winners.clone(),
            })
        }
    };
    let values = bond_concurrences(state)?;
    let zz = (1..len)
        .map(|i| zz_correlation(state, i, i + 1))
        .collect::<Result<_>>()?;
    Ok(BondProfile {
        len,
        params,
        values,
        zz,
        polarized,
    })
}

/// `dQ/dΔ` by central differences on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeScan {
    pub delta_grid: Vec<f64>,
    /// `None` where the ground state was degenerate and the point was skipped.
    pub q_values: Vec<Option<f64>>,
    /// `None` at the grid ends and next to skipped points.
    pub dq_ddelta: Vec<Option<f64>>,
    pub argmin: Option<f64>,
    pub skipped: Vec<f64>,
}

/// Central differences `(v[i+1] − v[i−1]) / (x[i+1] − x[i−1])` aligned with `grid`.
pub fn central_differences(grid: &[f64], values: &[Option<f64>]) -> Vec<Option<f64>> {
    let n = grid.len();
    (0..n)
        .map(|i| {
            if i == 0 || i + 1 == n {
                return None;
            }
            match (values[i - 1], values[i + 1]) {
                (Some(lo), Some(hi)) => Some((hi - lo) / (grid[i + 1] - grid[i - 1])),
                _ => None,
            }
        })
        .collect()
}

/// Global entanglement of the ground state along a `Δ` grid and its derivative.
pub fn q_derivative_scan(
    len: usize,
    h: f64,
    delta_grid: &[f64],
    opts: &EdOptions,
) -> Result<DerivativeScan> {
    check_grid(delta_grid, "anisotropy")?;
    if delta_grid.len() < 3 {
        return Err(Error::InvalidParams("derivative scan needs at least 3 grid points".into()));
    }
    let q_values: Vec<Option<f64>> = delta_grid
        .par_iter()
        .map(|&delta| {
            let gs = solve(ModelParams::new(delta, h)?, len, opts)?;
            match gs.unique() {
                Some(s) => Ok(Some(global_q(s)?)),
                None => Ok(None),
            }
        })
        .collect::<Result<_>>()?;
    let skipped: Vec<f64> = delta_grid
        .iter()
        .zip(&q_values)
        .filter(|(_, q)| q.is_none())
        .map(|(&d, _)| d)
        .collect();
    for d in &skipped {
        log::warn!("degenerate ground state at delta = {d}; grid point skipped");
    }
    let dq_ddelta = central_differences(delta_grid, &q_values);
    let argmin = dq_ddelta
        .iter()
        .zip(delta_grid)
        .filter_map(|(d, &x)| d.map(|d| (d, x)))
        .fold(None, |best: Option<(f64, f64)>, (d, x)| match best {
            Some((bd, _)) if bd <= d => best,
            _ => Some((d, x)),
        })
        .map(|(_, x)| x);
    Ok(DerivativeScan {
        delta_grid: delta_grid.to_vec(),
        q_values,
        dq_ddelta,
        argmin,
        skipped,
    })
}

/// One `(L, h)` entry of the central-pair table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Cell {
    pub len: usize,
    pub h: f64,
    pub value: Result<f64>,
}

/// Central-pair concurrence for every `(L, h)`, sorted by `(L, h)`.
///
/// Cells with `h <= h_c` carry [`Error::FerroPhase`].
pub fn table1(delta: f64, h_list: &[f64], lens: &[usize], opts: &EdOptions) -> Vec<Table1Cell> {
    let mut cells: Vec<(usize, f64)> = lens
        .iter()
        .flat_map(|&len| h_list.iter().map(move |&h| (len, h)))
        .collect();
    cells.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    cells.dedup();
    cells
        .par_iter()
        .map(|&(len, h)| Table1Cell {
            len,
            h,
            value: table1_cell(delta, h, len, opts),
        })
        .collect()
}

fn table1_cell(delta: f64, h: f64, len: usize, opts: &EdOptions) -> Result<f64> {
    let h_c = critical_field(delta)?;
    if h <= h_c {
        return Err(Error::FerroPhase { h, h_c });
    }
    if len % 2 != 0 {
        return Err(Error::InvalidParams(format!("central pair needs even L, got {len}")));
    }
    let gs = solve(ModelParams::new(delta, h)?, len, opts)?;
    ground_pair_concurrence(&gs, len / 2, len / 2 + 1)
}
