use kinkchain::analysis::{
    anisotropy_sweep, bond_profile, central_pair_series, critical_field, detect_jump,
    fit_stabilization, q_derivative_scan, table1, EdOptions,
};
use kinkchain::basis::DEFAULT_MAX_LEN;
use kinkchain::entangle::{kink_concurrence_in_sector, kink_global_q};
use kinkchain::{KinkParams, LanczosConfig, ModelParams};

use crate::cli::{
    FitArgs, JumpArgs, KinkArgs, ProfileArgs, QscanArgs, Solver, SweepArgs, Table1Args,
};
use crate::error::CliError;
use crate::grid::{parse_floats, parse_ints, parse_pair, require_ascending};
use crate::output::{Cell, Param, Table};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn ed_options(s: &Solver) -> Result<EdOptions, CliError> {
    if !(s.tol > 0.0 && s.tol.is_finite()) {
        return Err(usage("--tol must be positive"));
    }
    if s.max_matvecs == 0 {
        return Err(usage("--max-matvecs must be positive"));
    }
    Ok(EdOptions {
        lanczos: LanczosConfig {
            tol: s.tol,
            max_matvecs: s.max_matvecs,
            ..LanczosConfig::default()
        },
        ..EdOptions::default()
    })
}

fn check_ed_len(len: usize) -> Result<(), CliError> {
    if !(2..=DEFAULT_MAX_LEN).contains(&len) {
        return Err(usage(format!("L must lie in [2, {DEFAULT_MAX_LEN}], got {len}")));
    }
    Ok(())
}

fn check_pair(pair: (usize, usize), len: usize) -> Result<(), CliError> {
    let (a, b) = pair;
    if !(1 <= a && a < b && b <= len) {
        return Err(usage(format!("pair ({a},{b}) needs 1 <= a < b <= {len}")));
    }
    Ok(())
}

fn params(delta: f64, h: f64) -> Result<ModelParams, CliError> {
    ModelParams::new(delta, h).map_err(|e| usage(e.to_string()))
}

fn central_pair(len: usize) -> (usize, usize) {
    (len / 2, len / 2 + 1)
}

fn solver_params(t: &mut Table, s: &Solver) {
    t.param("tol", Param::Float(s.tol))
        .param("max_matvecs", Param::Int(s.max_matvecs as i64));
}

/// Rows for every successful cell; failed cells are reported and turn the
/// exit code to 1 after the table is written.
pub struct Outcome {
    pub table: Table,
    pub failures: Vec<String>,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Self {
            table,
            failures: Vec::new(),
        }
    }
}

pub fn cmd_table1(a: &Table1Args) -> Result<Outcome, CliError> {
    let fields = parse_floats(&a.h)?;
    let lens = parse_ints(&a.lens)?;
    for &len in &lens {
        check_ed_len(len)?;
        if len % 2 != 0 {
            return Err(usage(format!("central pair needs even L, got {len}")));
        }
    }
    for &h in &fields {
        params(a.delta, h)?;
    }
    let opts = ed_options(&a.solver)?;

    let mut t = Table::new("table1", &["L", "h", "concurrence"]);
    t.param("delta", Param::Float(a.delta))
        .param("h", Param::Floats(fields.clone()))
        .param("L", Param::Ints(lens.clone()));
    solver_params(&mut t, &a.solver);
    let mut failures = Vec::new();
    for cell in table1(a.delta, &fields, &lens, &opts) {
        match cell.value {
            Ok(c) => t.push(vec![Cell::Int(cell.len as i64), Cell::Param(cell.h), Cell::Measure(c)]),
            Err(e) => failures.push(format!("L={} h={}: {e}", cell.len, cell.h)),
        }
    }
    Ok(Outcome { table: t, failures })
}

pub fn cmd_profile(a: &ProfileArgs) -> Result<Outcome, CliError> {
    check_ed_len(a.len)?;
    let p = params(a.delta, a.h)?;
    let prof = bond_profile(a.len, p, &ed_options(&a.solver)?)?;
    let mut t = Table::new("profile", &["i", "j", "concurrence", "zz"]);
    t.param("L", Param::Int(a.len as i64))
        .param("delta", Param::Float(a.delta))
        .param("h", Param::Float(a.h))
        .param("polarized", Param::Bool(prof.polarized));
    solver_params(&mut t, &a.solver);
    if prof.polarized {
        log::warn!("ground state is the polarized doublet; reporting one of its product states");
    }
    for (i, (&c, &zz)) in prof.values.iter().zip(&prof.zz).enumerate() {
        t.push(vec![
            Cell::Int(i as i64 + 1),
            Cell::Int(i as i64 + 2),
            Cell::Measure(c),
            Cell::Measure(zz),
        ]);
    }
    Ok(t.into())
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<Outcome, CliError> {
    check_ed_len(a.len)?;
    let deltas = parse_floats(&a.delta)?;
    require_ascending(&deltas, "anisotropy")?;
    for &d in &deltas {
        params(d, a.h)?;
    }
    let pairs: Vec<(usize, usize)> = if a.pairs.is_empty() {
        let (c, _) = central_pair(a.len);
        vec![(c, c + 1), (c, c + 2)]
    } else {
        a.pairs.iter().map(|s| parse_pair(s)).collect::<Result<_, _>>()?
    };
    for &p in &pairs {
        check_pair(p, a.len)?;
    }
    let sweep = anisotropy_sweep(a.len, a.h, &pairs, &deltas, &ed_options(&a.solver)?)?;
    let mut t = Table::new("sweep", &["a", "b", "delta", "concurrence", "argmax"]);
    t.param("L", Param::Int(a.len as i64))
        .param("h", Param::Float(a.h))
        .param("delta", Param::Floats(deltas.clone()))
        .param("pairs", Param::Pairs(pairs.clone()));
    solver_params(&mut t, &a.solver);
    for curve in &sweep.curves {
        for (&d, &c) in sweep.delta_grid.iter().zip(&curve.values) {
            t.push(vec![
                Cell::Int(curve.pair.0 as i64),
                Cell::Int(curve.pair.1 as i64),
                Cell::Param(d),
                Cell::Measure(c),
                Cell::Param(curve.argmax),
            ]);
        }
    }
    Ok(t.into())
}

pub fn cmd_jump(a: &JumpArgs) -> Result<Outcome, CliError> {
    check_ed_len(a.len)?;
    let fields = parse_floats(&a.h)?;
    require_ascending(&fields, "field")?;
    for &h in &fields {
        params(a.delta, h)?;
    }
    let pair = match &a.pair {
        Some(s) => parse_pair(s)?,
        None => central_pair(a.len),
    };
    check_pair(pair, a.len)?;
    let jump = detect_jump(a.len, a.delta, pair, &fields, &ed_options(&a.solver)?)?;
    let mut t = Table::new(
        "jump",
        &["L", "delta", "a", "b", "h_c", "h_jump", "c_below", "c_above"],
    );
    t.param("L", Param::Int(a.len as i64))
        .param("delta", Param::Float(a.delta))
        .param("h", Param::Floats(fields))
        .param("pair", Param::Pairs(vec![pair]));
    solver_params(&mut t, &a.solver);
    let h_c = critical_field(a.delta).map_or(Cell::Empty, Cell::Measure);
    t.push(vec![
        Cell::Int(a.len as i64),
        Cell::Param(a.delta),
        Cell::Int(pair.0 as i64),
        Cell::Int(pair.1 as i64),
        h_c,
        Cell::Param(jump.h_jump),
        Cell::Measure(jump.c_below),
        Cell::Measure(jump.c_above),
    ]);
    Ok(t.into())
}

fn read_series(path: &std::path::Path, h: Option<f64>) -> Result<Vec<(usize, f64)>, CliError> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| usage(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|c| c == name);
    let li = col("L").ok_or_else(|| usage("input needs an `L` column"))?;
    let ci = col("concurrence").ok_or_else(|| usage("input needs a `concurrence` column"))?;
    let hi = col("h");
    let mut series = Vec::new();
    let mut fields_seen: Vec<f64> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| usage(e.to_string()))?;
        let field = |i: usize| rec.get(i).unwrap_or("").to_string();
        if let Some(hi) = hi {
            let hv: f64 = field(hi).parse().map_err(|_| usage("bad h value in input"))?;
            if let Some(want) = h {
                if hv != want {
                    continue;
                }
            }
            if !fields_seen.contains(&hv) {
                fields_seen.push(hv);
            }
        }
        let len: usize = field(li).parse().map_err(|_| usage("bad L value in input"))?;
        let c: f64 = field(ci).parse().map_err(|_| usage("bad concurrence value in input"))?;
        series.push((len, c));
    }
    if fields_seen.len() > 1 {
        return Err(usage("input holds several fields; select one with --h"));
    }
    series.sort_by_key(|s| s.0);
    Ok(series)
}

pub fn cmd_fit(a: &FitArgs) -> Result<Outcome, CliError> {
    let mut t = Table::new(
        "fit",
        &["L", "concurrence", "fitted", "a0", "a1", "a2", "rms_residual", "iterations"],
    );
    let series = match &a.input {
        Some(path) => {
            t.param("input", Param::Text(path.display().to_string()));
            if let Some(h) = a.h {
                t.param("h", Param::Float(h));
            }
            read_series(path, a.h)?
        }
        None => {
            let delta = a.delta.ok_or_else(|| usage("--delta is required"))?;
            let h = a.h.ok_or_else(|| usage("--h is required"))?;
            let lens = parse_ints(a.lens.as_deref().unwrap_or_default())?;
            for &len in &lens {
                check_ed_len(len)?;
                if len % 2 != 0 {
                    return Err(usage(format!("central pair needs even L, got {len}")));
                }
            }
            params(delta, h)?;
            t.param("delta", Param::Float(delta))
                .param("h", Param::Float(h))
                .param("L", Param::Ints(lens.clone()));
            solver_params(&mut t, &a.solver);
            central_pair_series(delta, h, &lens, &ed_options(&a.solver)?)?
        }
    };
    let points: Vec<(f64, f64)> = series.iter().map(|&(l, c)| (l as f64, c)).collect();
    let fit = fit_stabilization(&points)?;
    t.param("decay_identifiable", Param::Bool(fit.decay_identifiable));
    for &(len, c) in &series {
        let fitted = fit.a0 + fit.a1 * (-fit.a2 * len as f64).exp();
        t.push(vec![
            Cell::Int(len as i64),
            Cell::Measure(c),
            Cell::Measure(fitted),
            Cell::Measure(fit.a0),
            Cell::Measure(fit.a1),
            Cell::Measure(fit.a2),
            Cell::Measure(fit.rms_residual),
            Cell::Int(fit.iterations as i64),
        ]);
    }
    Ok(t.into())
}

pub fn cmd_qscan(a: &QscanArgs) -> Result<Outcome, CliError> {
    check_ed_len(a.len)?;
    let deltas = parse_floats(&a.delta)?;
    require_ascending(&deltas, "anisotropy")?;
    if deltas.len() < 3 {
        return Err(usage("qscan needs at least 3 anisotropy values"));
    }
    for &d in &deltas {
        params(d, a.h)?;
    }
    let scan = q_derivative_scan(a.len, a.h, &deltas, &ed_options(&a.solver)?)?;
    let mut t = Table::new("qscan", &["delta", "Q", "dQ_ddelta", "argmin"]);
    t.param("L", Param::Int(a.len as i64))
        .param("h", Param::Float(a.h))
        .param("delta", Param::Floats(deltas))
        .param("skipped", Param::Floats(scan.skipped.clone()));
    solver_params(&mut t, &a.solver);
    let argmin = scan.argmin.map_or(Cell::Empty, Cell::Param);
    for ((&d, q), dq) in scan.delta_grid.iter().zip(&scan.q_values).zip(&scan.dq_ddelta) {
        t.push(vec![
            Cell::Param(d),
            q.map_or(Cell::Empty, Cell::Measure),
            dq.map_or(Cell::Empty, Cell::Measure),
            argmin.clone(),
        ]);
    }
    Ok(t.into())
}

pub fn cmd_kink(a: &KinkArgs) -> Result<Outcome, CliError> {
    if a.len < 2 {
        return Err(usage(format!("L must be at least 2, got {}", a.len)));
    }
    let kp = KinkParams::from_delta(a.delta).map_err(|e| usage(e.to_string()))?;
    let two_m = a.two_m.unwrap_or((a.len % 2) as i64);
    if two_m.unsigned_abs() as usize > a.len || (two_m - a.len as i64) % 2 != 0 {
        return Err(usage(format!("no sector 2m = {two_m} for L = {}", a.len)));
    }
    let pairs: Vec<(usize, usize)> = if a.pairs.is_empty() {
        vec![central_pair(a.len)]
    } else {
        a.pairs.iter().map(|s| parse_pair(s)).collect::<Result<_, _>>()?
    };
    for &p in &pairs {
        check_pair(p, a.len)?;
    }
    let q_global = kink_global_q(&kp, a.len, two_m)?;
    let mut t = Table::new(
        "kink",
        &["L", "delta", "q", "h_c", "two_m", "a", "b", "concurrence", "Q"],
    );
    t.param("L", Param::Int(a.len as i64))
        .param("delta", Param::Float(a.delta))
        .param("two_m", Param::Int(two_m))
        .param("pairs", Param::Pairs(pairs.clone()));
    for &(pa, pb) in &pairs {
        let c = kink_concurrence_in_sector(&kp, a.len, pa, pb, two_m)?;
        t.push(vec![
            Cell::Int(a.len as i64),
            Cell::Param(a.delta),
            Cell::Measure(kp.q),
            Cell::Measure(kp.h_c),
            Cell::Int(two_m),
            Cell::Int(pa as i64),
            Cell::Int(pb as i64),
            Cell::Measure(c),
            Cell::Measure(q_global),
        ]);
    }
    Ok(t.into())
}
