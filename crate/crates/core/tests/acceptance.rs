//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so that every criterion is
//! reported even when an earlier one fails. Lines starting with `check` are
//! supplementary and do not affect the exit code.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use kinkchain::analysis::{
    anisotropy_sweep, bond_profile, central_pair_series, fit_stabilization,
    ground_pair_concurrence, q_derivative_scan, solve, table1, EdOptions,
};
use kinkchain::eigen::ground_state_scan;
use kinkchain::entangle::{
    concurrence, global_q_full, global_q_wedge_full, kink_concurrence, kink_concurrence_in_sector,
    kink_global_q, kink_pair_rdm, pair_rdm, site_rdm, wootters_concurrence, zz_correlation,
};
use kinkchain::kinkstate::{build_field_aligned_kink_state, build_kink_state, critical_energy};
use kinkchain::linalg::symmetric_eigen;
use kinkchain::omega::{normalization, omega_pair, omega_single, OmegaTable};
use kinkchain::{
    KinkParams, LanczosConfig, ModelParams, PairDensityMatrix, ScaledValue, SectorBasis,
    SectorHamiltonian, StateVector,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const TABLE1_LENS: [usize; 10] = [6, 8, 10, 12, 14, 16, 18, 20, 22, 24];
const TABLE1_FIELDS: [f64; 3] = [0.6, 5.0, 20.0];
#[rustfmt::skip]
const TABLE1: [[f64; 3]; 10] = [
    [0.599509933, 0.607452653, 0.607652241],
    [0.597825866, 0.600881874, 0.601276968],
    [0.597506824, 0.598224627, 0.598334941],
    [0.597449660, 0.597593622, 0.597617282],
    [0.597439774, 0.597466481, 0.597471030],
    [0.597438106, 0.597442834, 0.597443658],
    [0.597437830, 0.597438641, 0.597438785],
    [0.597437785, 0.597437921, 0.597437945],
    [0.597437778, 0.597437800, 0.597437804],
    [0.597437776, 0.597437780, 0.597437781],
];
const ASYMPTOTE: f64 = 0.5974378;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Grid `start, start + step, ...` up to `stop`, built from integers so the
/// points are reproducible.
fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n)
        .map(|k| ((start + k as f64 * step) * 1e10).round() / 1e10)
        .collect()
}

fn criterion_1() -> Outcome {
    let cells = table1(1.5, &TABLE1_FIELDS, &TABLE1_LENS, &EdOptions::default());
    let mut worst = (0.0f64, 0usize, 0.0f64);
    for cell in &cells {
        let li = TABLE1_LENS.iter().position(|&l| l == cell.len).unwrap();
        let hi = TABLE1_FIELDS.iter().position(|&h| h == cell.h).unwrap();
        let got = cell.value.clone().map_err(|e| format!("L={} h={}: {e}", cell.len, cell.h))?;
        let diff = (got - TABLE1[li][hi]).abs();
        if diff > worst.0 {
            worst = (diff, cell.len, cell.h);
        }
    }
    ensure(cells.len() == 30, || format!("{} cells", cells.len()))?;
    let msg = format!("30 entries, max |ΔC| = {:.2e} (L={}, h={})", worst.0, worst.1, worst.2);
    ensure(worst.0 <= 1e-7, || msg.clone())?;
    Ok(msg)
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for delta in [1.1, 1.5, 2.0, 3.0] {
        let kp = KinkParams::from_delta(delta).map_err(err)?;
        for len in 2..=10usize {
            for two_m in (-(len as i64)..=len as i64).step_by(2) {
                let state = build_kink_state(&kp, len, two_m).map_err(err)?;
                for a in 1..len {
                    for b in a + 1..=len {
                        let analytic = kink_concurrence_in_sector(&kp, len, a, b, two_m).map_err(err)?;
                        let dense = concurrence(&pair_rdm(&state, a, b).map_err(err)?).map_err(err)?;
                        worst = worst.max((analytic - dense).abs());
                        count += 1;
                    }
                }
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:.2e}"))?;
    let kp = KinkParams::from_delta(1.5).map_err(err)?;
    let c24 = kink_concurrence(&kp, 24, 12, 13).map_err(err)?;
    let d24 = (c24 - TABLE1[9][0]).abs();
    ensure(d24 <= 5e-7, || format!("L=24 analytic {c24:.9} vs table {:.9}", TABLE1[9][0]))?;
    Ok(format!(
        "{count} pairs, max deviation {worst:.2e}; L=24 analytic C = {c24:.9} (|Δ| = {d24:.1e})"
    ))
}

fn fit_series(lens: &[usize]) -> Result<kinkchain::FitResult, String> {
    let series = central_pair_series(1.36, 0.5, lens, &EdOptions::default()).map_err(err)?;
    let points: Vec<(f64, f64)> = series.iter().map(|&(l, c)| (l as f64, c)).collect();
    fit_stabilization(&points).map_err(err)
}

fn criterion_3() -> Outcome {
    let lens: Vec<usize> = (6..=16).step_by(2).collect();
    let fit = fit_series(&lens)?;
    let msg = format!(
        "L=6..16: A0 = {:.6} (target 0.612792 ± 2e-3), A1 = {:.6} (0.359898 ± 5e-2), A2 = {:.6} (0.669476 ± 5e-2)",
        fit.a0, fit.a1, fit.a2
    );
    let ok = (fit.a0 - 0.612792).abs() <= 2e-3
        && (fit.a1 - 0.359898).abs() <= 5e-2
        && (fit.a2 - 0.669476).abs() <= 5e-2;
    ensure(ok, || msg.clone())?;
    Ok(msg)
}

fn criterion_4() -> Outcome {
    let len = 22;
    let deltas = grid(1.0, 1.7, 0.02);
    let pairs = [(len / 2, len / 2 + 1), (len / 2, len / 2 + 2)];
    let sweep = anisotropy_sweep(len, 5.0, &pairs, &deltas, &EdOptions::default()).map_err(err)?;
    let nn = sweep.curves[0].argmax;
    let nnn = sweep.curves[1].argmax;
    let msg = format!("argmax C(11,12) at Δ = {nn:.2} (1.36 ± 0.02), C(11,13) at Δ = {nnn:.2} (1.18 ± 0.02)");
    ensure((nn - 1.36).abs() <= 0.02 + 1e-9 && (nnn - 1.18).abs() <= 0.02 + 1e-9, || msg.clone())?;
    Ok(msg)
}

fn criterion_5() -> Outcome {
    let opts = EdOptions::default();
    let mut worst_low = 0.0f64;
    let mut min_high = f64::INFINITY;
    for delta in [1.5, 2.0] {
        let hc = kinkchain::critical_field(delta).map_err(err)?;
        for len in [4usize, 6, 8, 10, 12] {
            let (a, b) = (len / 2, len / 2 + 1);
            let below = solve(ModelParams::new(delta, hc - 0.02).map_err(err)?, len, &opts).map_err(err)?;
            let above = solve(ModelParams::new(delta, hc + 0.05).map_err(err)?, len, &opts).map_err(err)?;
            let c_lo = ground_pair_concurrence(&below, a, b).map_err(err)?;
            let c_hi = ground_pair_concurrence(&above, a, b).map_err(err)?;
            ensure(c_lo < 1e-10 && c_hi > 0.3, || {
                format!("L={len} Δ={delta}: C(h_c-0.02) = {c_lo:e}, C(h_c+0.05) = {c_hi}")
            })?;
            worst_low = worst_low.max(c_lo);
            min_high = min_high.min(c_hi);
        }
    }
    let mut worst_spread = 0.0f64;
    for delta in [1.5, 2.0] {
        let hc = kinkchain::critical_field(delta).map_err(err)?;
        for len in 2..=10usize {
            let report = ground_state_scan(
                ModelParams::new(delta, hc).map_err(err)?,
                len,
                1e-8,
                &LanczosConfig::default(),
            )
            .map_err(err)?;
            let spread = report.spread();
            ensure(spread <= 1e-8 && report.winners.len() == len + 1, || {
                format!("L={len} Δ={delta}: sector spread {spread:e}")
            })?;
            worst_spread = worst_spread.max(spread);
        }
    }
    Ok(format!(
        "max C below = {worst_low:.1e}, min C above = {min_high:.4}; sector spread at h_c ≤ {worst_spread:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let deltas = grid(0.6, 1.4, 0.02);
    let opts = EdOptions::default();
    let s12 = q_derivative_scan(12, 1.0, &deltas, &opts).map_err(err)?;
    let s8 = q_derivative_scan(8, 1.0, &deltas, &opts).map_err(err)?;
    let depth = |s: &kinkchain::DerivativeScan| {
        s.dq_ddelta.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    };
    let arg = s12.argmin.ok_or("no derivative values")?;
    let (d12, d8) = (depth(&s12), depth(&s8));
    let msg = format!(
        "L=12 argmin dQ/dΔ at Δ = {arg:.2}; min dQ/dΔ = {d12:.4} (L=12) vs {d8:.4} (L=8); skipped {}",
        s12.skipped.len() + s8.skipped.len()
    );
    ensure((arg - 1.0).abs() <= 0.02 + 1e-9 && d12 < d8, || msg.clone())?;
    Ok(msg)
}

/// Double-double arithmetic for the Ω enumeration oracle.
#[derive(Clone, Copy)]
struct Dd(f64, f64);

impl Dd {
    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p) + self.0 * o.1 + self.1 * o.0;
        let hi = p + e;
        Dd(hi, e - (hi - p))
    }

    fn add(self, o: Dd) -> Dd {
        let s = self.0 + o.0;
        let bb = s - self.0;
        let e = (self.0 - (s - bb)) + (o.0 - bb) + self.1 + o.1;
        let hi = s + e;
        Dd(hi, e - (hi - s))
    }

    fn powi(base: f64, e: i64) -> Dd {
        let b = if e < 0 {
            let y = 1.0 / base;
            let r = (-base).mul_add(y, 1.0);
            Dd(y, 0.0).add(Dd(y * r, 0.0))
        } else {
            Dd(base, 0.0)
        };
        let (mut acc, mut sq, mut n) = (Dd(1.0, 0.0), b, e.unsigned_abs());
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(sq);
            }
            sq = sq.mul(sq);
            n >>= 1;
        }
        acc
    }
}

fn enumerate_omega(q: f64, sites: &[usize]) -> Vec<f64> {
    let n = sites.len();
    let mut sums = vec![Dd(0.0, 0.0); n + 1];
    for mask in 0u32..(1u32 << n) {
        let e: i64 = sites
            .iter()
            .enumerate()
            .map(|(k, &j)| if (mask >> k) & 1 == 1 { j as i64 } else { -(j as i64) })
            .sum();
        let u = mask.count_ones() as usize;
        sums[u] = sums[u].add(Dd::powi(q, e));
    }
    sums.into_iter().map(|d| d.0 + d.1).collect()
}

fn random_complex_state(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

fn random_x_state(rng: &mut ChaCha8Rng) -> PairDensityMatrix {
    let raw: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.0..1.0) + 1e-3);
    let total: f64 = raw.iter().sum();
    let p = raw.map(|x| x / total);
    let z = rng.gen_range(-1.0..1.0) * (p[1] * p[2]).sqrt();
    let w = rng.gen_range(-1.0..1.0) * (p[0] * p[3]).sqrt();
    let mut e = [[0.0; 4]; 4];
    for i in 0..4 {
        e[i][i] = p[i];
    }
    e[1][2] = z;
    e[2][1] = z;
    e[0][3] = w;
    e[3][0] = w;
    PairDensityMatrix::new(e, (1, 2))
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Full `2^L` Hamiltonian from local spin operators. Site `j` is bit `j-1`,
/// so the Kronecker product runs from site `L` down to site 1.
fn full_hamiltonian(len: usize, p: &ModelParams) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(2, 2);
    let sz = DMatrix::from_row_slice(2, 2, &[-0.5, 0.0, 0.0, 0.5]);
    let sp = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
    let sm = sp.transpose();
    let site_op = |ops: &[(usize, &DMatrix<f64>)]| {
        let mut m = DMatrix::<f64>::identity(1, 1);
        for site in (1..=len).rev() {
            let op = ops.iter().find(|(s, _)| *s == site).map(|(_, o)| *o).unwrap_or(&id);
            m = kron(&m, op);
        }
        m
    };
    let dim = 1 << len;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for i in 1..len {
        let flip = site_op(&[(i, &sp), (i + 1, &sm)]) + site_op(&[(i, &sm), (i + 1, &sp)]);
        h -= flip * (0.5 * p.j);
        h -= site_op(&[(i, &sz), (i + 1, &sz)]) * p.delta;
    }
    h -= (site_op(&[(1, &sz)]) - site_op(&[(len, &sz)])) * p.h;
    h
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);

    // (a) Ω dynamic programme against exhaustive enumeration.
    let mut worst_a = 0.0f64;
    for trial in 0..400 {
        let size = trial % 15;
        let mut sites: Vec<usize> = (1..=40).collect();
        for i in 0..size {
            let j = rng.gen_range(i..sites.len());
            sites.swap(i, j);
        }
        sites.truncate(size);
        sites.sort_unstable();
        let q = KinkParams::from_delta(rng.gen_range(1.0..3.0)).map_err(err)?.q;
        let table = OmegaTable::build(q, &sites);
        for (u, expected) in enumerate_omega(q, &sites).into_iter().enumerate() {
            let got = table.get(2 * u as i64 - size as i64).to_f64();
            worst_a = worst_a.max(((got - expected) / expected).abs());
        }
    }
    ensure(worst_a <= 1e-14, || format!("(a) Ω relative deviation {worst_a:e}"))?;

    // (b) purity form against wedge form of Q.
    let mut worst_b = 0.0f64;
    for _ in 0..100 {
        let psi = random_complex_state(&mut rng, 1 << 8);
        let q1 = global_q_full(&psi).map_err(err)?;
        let q2 = global_q_wedge_full(&psi).map_err(err)?;
        worst_b = worst_b.max((q1 - q2).abs());
    }
    ensure(worst_b <= 1e-10, || format!("(b) Q deviation {worst_b:e}"))?;

    // (c) closed-form X-state concurrence against the four-eigenvalue formula.
    let mut worst_c = 0.0f64;
    for _ in 0..1000 {
        let rho = random_x_state(&mut rng);
        let closed = concurrence(&rho).map_err(err)?;
        let general = wootters_concurrence(&rho.as_matrix().map(|x| Complex64::new(x, 0.0)));
        worst_c = worst_c.max((closed - general).abs());
    }
    ensure(worst_c <= 1e-10, || format!("(c) concurrence deviation {worst_c:e}"))?;

    // (d) union of sector spectra against the full Hilbert space.
    let mut worst_d = 0.0f64;
    for len in 2..=8usize {
        for _ in 0..2 {
            let p = ModelParams::new(rng.gen_range(-2.0..2.5), rng.gen_range(0.0..2.0)).map_err(err)?;
            let mut sectors: Vec<f64> = Vec::with_capacity(1 << len);
            for basis in SectorBasis::all_sectors(len).map_err(err)? {
                let m = SectorHamiltonian::new(p, basis).dense_matrix().map_err(err)?;
                sectors.extend(symmetric_eigen(&m).0);
            }
            sectors.sort_by(f64::total_cmp);
            let mut full: Vec<f64> = full_hamiltonian(len, &p).symmetric_eigenvalues().iter().copied().collect();
            full.sort_by(f64::total_cmp);
            ensure(full.len() == sectors.len(), || format!("(d) L={len}: dimension mismatch"))?;
            for (a, b) in sectors.iter().zip(&full) {
                worst_d = worst_d.max((a - b).abs());
            }
        }
    }
    ensure(worst_d <= 1e-10, || format!("(d) spectrum deviation {worst_d:e}"))?;

    Ok(format!(
        "(a) {worst_a:.1e} (b) {worst_b:.1e} (c) {worst_c:.1e} (d) {worst_d:.1e}"
    ))
}

fn check_rdm(rho: &PairDensityMatrix, what: &str) -> Result<(), String> {
    let tr = (rho.trace() - 1.0).abs();
    let min = rho.min_eigenvalue();
    ensure(tr <= 1e-12 && min >= -1e-12 && rho.is_symmetric(1e-12), || {
        format!("{what}: trace error {tr:e}, min eigenvalue {min:e}")
    })
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let opts = EdOptions::default();
    let mut n_rdm = 0;

    // Reduced density matrices from ED ground states.
    for (delta, h) in [(1.5, 0.6), (0.5, 0.0), (-1.5, 0.0), (2.0, 3.0), (1.2, 0.2)] {
        let gs = solve(ModelParams::new(delta, h).map_err(err)?, 10, &opts).map_err(err)?;
        for state in &gs.states {
            for a in 1..10 {
                for b in a + 1..=10 {
                    check_rdm(&pair_rdm(state, a, b).map_err(err)?, "ED")?;
                    n_rdm += 1;
                }
                let s = site_rdm(state, a).map_err(err)?;
                ensure((s.p_up + s.p_down - 1.0).abs() <= 1e-12, || "site trace".into())?;
            }
        }
    }
    // ... and from the analytic kink path.
    for &(delta, len) in &[(2.0, 50usize), (1.5, 120), (3.0, 200)] {
        let kp = KinkParams::from_delta(delta).map_err(err)?;
        for _ in 0..20 {
            let a = rng.gen_range(1..len);
            let b = rng.gen_range(a + 1..=len);
            let two_m = 2 * rng.gen_range(-(len as i64) / 4..=(len as i64) / 4) + (len as i64 % 2);
            check_rdm(&kink_pair_rdm(&kp, len, a, b, two_m).map_err(err)?, "kink")?;
            n_rdm += 1;
        }
    }

    // Decomposition identities.
    let mut worst_id = 0.0f64;
    for &len in &[10usize, 37, 64, 128, 200] {
        for delta in [1.1, 1.5, 2.5] {
            let kp = KinkParams::from_delta(delta).map_err(err)?;
            for _ in 0..10 {
                let two_m = 2 * rng.gen_range(-(len as i64) / 3..=(len as i64) / 3) + (len as i64 % 2);
                let norm = normalization(&kp, len, two_m).map_err(err)?;
                let a = rng.gen_range(1..len);
                let b = rng.gen_range(a + 1..=len);
                let (o1, o0, om1) = omega_pair(&kp, len, a, b, two_m).map_err(err)?;
                let pw = |e: i64| ScaledValue::powi(kp.q, e);
                let (ai, bi) = (a as i64, b as i64);
                let pair = pw(ai + bi) * o1 + (pw(ai - bi) + pw(bi - ai)) * o0 + pw(-ai - bi) * om1;
                worst_id = worst_id.max((pair.ratio(&norm) - 1.0).abs());
                let (up, down) = omega_single(&kp, len, a, two_m).map_err(err)?;
                let single = pw(ai) * up + pw(-ai) * down;
                worst_id = worst_id.max((single.ratio(&norm) - 1.0).abs());
            }
        }
    }
    ensure(worst_id <= 1e-12, || format!("decomposition identity deviation {worst_id:e}"))?;

    // Ferromagnetic phase.
    for delta in [1.5, 2.0, 3.0] {
        let hc = kinkchain::critical_field(delta).map_err(err)?;
        for len in [4usize, 7, 10] {
            for h in [0.0, 0.5 * hc, hc - 1e-3] {
                let prof = bond_profile(len, ModelParams::new(delta, h).map_err(err)?, &opts).map_err(err)?;
                ensure(prof.values.iter().all(|&c| c == 0.0), || {
                    format!("ferro L={len} Δ={delta} h={h}: {:?}", prof.values)
                })?;
            }
        }
    }

    // Oscillating profile for Δ = 0.5, h = 0.
    let prof = bond_profile(22, ModelParams::new(0.5, 0.0).map_err(err)?, &opts).map_err(err)?;
    let c = &prof.values;
    ensure(c.len() == 21 && c[0] > c[1], || format!("C(1) = {}, C(2) = {}", c[0], c[1]))?;
    let alternating = c.windows(3).all(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0);
    ensure(alternating, || format!("profile does not alternate: {c:?}"))?;

    let gs = solve(ModelParams::new(0.5, 0.0).map_err(err)?, 10, &opts).map_err(err)?;
    let state = gs.unique().ok_or("L=10 ground state not unique")?;
    let zz: Vec<f64> = (1..10)
        .map(|i| zz_correlation(state, i, i + 1))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    ensure(zz.iter().all(|&z| z < 0.0), || format!("zz = {zz:?}"))?;

    Ok(format!(
        "{n_rdm} density matrices valid; identities to {worst_id:.1e}; ferro C = 0; \
         L=22 profile alternates (C1 = {:.4} > C2 = {:.4}); zz < 0 at L=10",
        c[0], c[1]
    ))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn criterion_9() -> Outcome {
    let kp = KinkParams::from_delta(1.5).map_err(err)?;
    let (c, tc) = timed(|| kink_concurrence(&kp, 1000, 500, 501));
    let c = c.map_err(err)?;
    let (q, tq) = timed(|| kink_global_q(&kp, 1000, 0));
    let q = q.map_err(err)?;
    let msg = format!(
        "C(500,501) = {c:.9} in {:.3} s; Q = {q:.6} in {:.3} s",
        tc.as_secs_f64(),
        tq.as_secs_f64()
    );
    ensure(c.is_finite() && q.is_finite(), || msg.clone())?;
    ensure(tc < Duration::from_secs(1) && tq < Duration::from_secs(1), || msg.clone())?;
    ensure((c - ASYMPTOTE).abs() <= 1e-6, || msg.clone())?;
    Ok(msg)
}

/// Fit over the full window starting at L = 2.
fn check_fit_full_window() -> Outcome {
    let lens: Vec<usize> = (2..=16).step_by(2).collect();
    let fit = fit_series(&lens)?;
    Ok(format!(
        "fit over L=2..16: A0 = {:.6}, A1 = {:.6}, A2 = {:.6}, rms = {:.1e}",
        fit.a0, fit.a1, fit.a2, fit.rms_residual
    ))
}

/// The field-aligned kink state is an eigenvector of H(h_c) in every sector.
fn check_kink_eigenstate() -> Outcome {
    let mut worst = 0.0f64;
    for delta in [1.1, 1.5, 2.0, 3.0] {
        let kp = KinkParams::from_delta(delta).map_err(err)?;
        let p = ModelParams::new(delta, kp.h_c).map_err(err)?;
        for len in 2..=12usize {
            let e0 = critical_energy(&kp, len);
            for basis in SectorBasis::all_sectors(len).map_err(err)? {
                let s = build_field_aligned_kink_state(&kp, len, basis.two_m()).map_err(err)?;
                let hv = SectorHamiltonian::new(p, basis).matvec(s.amplitudes()).map_err(err)?;
                let r: f64 = hv
                    .iter()
                    .zip(s.amplitudes())
                    .map(|(a, b)| (a - e0 * b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max(r);
            }
        }
    }
    ensure(worst <= 1e-10, || format!("residual {worst:e}"))?;
    Ok(format!("‖Hψ − E_c ψ‖ ≤ {worst:.1e} for L ≤ 12, all sectors"))
}

/// Equal-weight mixture of the degenerate sectors at h_c is unentangled.
fn check_critical_mixture() -> Outcome {
    let mut worst = 0.0f64;
    for delta in [1.5, 2.0] {
        let kp = KinkParams::from_delta(delta).map_err(err)?;
        for len in [4usize, 6, 8, 10] {
            let states: Vec<StateVector> = SectorBasis::all_sectors(len)
                .map_err(err)?
                .iter()
                .map(|b| build_field_aligned_kink_state(&kp, len, b.two_m()))
                .collect::<Result<_, _>>()
                .map_err(err)?;
            for a in 1..len {
                let rdms: Vec<PairDensityMatrix> = states
                    .iter()
                    .map(|s| pair_rdm(s, a, a + 1))
                    .collect::<Result<_, _>>()
                    .map_err(err)?;
                let mix = PairDensityMatrix::average(&rdms).map_err(err)?;
                worst = worst.max(concurrence(&mix).map_err(err)?);
            }
        }
    }
    ensure(worst == 0.0, || format!("mixture concurrence {worst:e}"))?;
    Ok("nearest-neighbour concurrence of the sector mixture is 0".into())
}

fn run(label: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f))
        .unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
    let secs = start.elapsed().as_secs_f64();
    let (tag, detail, ok) = match result {
        Ok(d) => ("PASS", d, true),
        Err(d) => ("FAIL", d, false),
    };
    println!("{tag} {label} [{secs:.1} s]: {detail}");
    ok
}

fn main() {
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let wanted = |name: &str| only.is_empty() || only.iter().any(|o| name.contains(o.as_str()));

    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("criterion 1 (central-pair table)", criterion_1),
        ("criterion 2 (analytic vs dense kink concurrence)", criterion_2),
        ("criterion 3 (stabilization fit)", criterion_3),
        ("criterion 4 (anisotropy peaks)", criterion_4),
        ("criterion 5 (jump at h_c)", criterion_5),
        ("criterion 6 (dQ/dΔ minimum)", criterion_6),
        ("criterion 7 (oracle equivalences)", criterion_7),
        ("criterion 8 (invariants)", criterion_8),
        ("criterion 9 (L = 1000 scalability)", criterion_9),
    ];
    let checks: [(&str, fn() -> Outcome); 3] = [
        ("check fit window", check_fit_full_window),
        ("check kink eigenstate", check_kink_eigenstate),
        ("check critical mixture", check_critical_mixture),
    ];

    let mut failed = Vec::new();
    for (label, f) in criteria {
        if wanted(label) && !run(label, f) {
            failed.push(label);
        }
    }
    for (label, f) in checks {
        if wanted(label) {
            run(label, f);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria passed");
    } else {
        println!("acceptance: {} failed: {}", failed.len(), failed.join(", "));
        std::process::exit(1);
    }
}
