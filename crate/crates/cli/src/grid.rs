//! Range and list syntax for numeric arguments.
//!
//! A list is comma separated; each item is a number or an inclusive range
//! `start:stop:step`. A range contains `start + k*step` for every `k >= 0`
//! with the point not beyond `stop + step/2`. Points are rounded to the
//! largest number of decimals written in the range, so `0.6:1.4:0.02`
//! yields exactly `0.6, 0.62, ..., 1.4`.

use crate::error::CliError;

fn decimals(s: &str) -> usize {
    let mantissa = s.split(['e', 'E']).next().unwrap_or(s);
    mantissa.split_once('.').map_or(0, |(_, frac)| frac.len())
}

fn parse_f64(s: &str) -> Result<f64, CliError> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("not a number: {s:?}")))?;
    if !x.is_finite() {
        return Err(CliError::Usage(format!("not a finite number: {s:?}")));
    }
    Ok(x)
}

fn parse_usize(s: &str) -> Result<usize, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("not a non-negative integer: {s:?}")))
}

fn float_range(item: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = item.split(':').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("range must be start:stop:step, got {item:?}")));
    }
    let (start, stop, step) = (parse_f64(parts[0])?, parse_f64(parts[1])?, parse_f64(parts[2])?);
    if step <= 0.0 {
        return Err(CliError::Usage(format!("range step must be positive in {item:?}")));
    }
    if stop < start {
        return Err(CliError::Usage(format!("range stop below start in {item:?}")));
    }
    let places = parts.iter().map(|p| decimals(p)).max().unwrap_or(0).min(15) as i32;
    let unit = 10f64.powi(places);
    let count = ((stop - start) / step + 0.5).floor() as usize;
    if count > 1_000_000 {
        return Err(CliError::Usage(format!("range {item:?} has too many points")));
    }
    Ok((0..=count)
        .map(|k| ((start + k as f64 * step) * unit).round() / unit)
        .collect())
}

fn int_range(item: &str) -> Result<Vec<usize>, CliError> {
    let parts: Vec<&str> = item.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("range must be start:stop:step, got {item:?}")));
    }
    let (start, stop, step) = (parse_usize(parts[0])?, parse_usize(parts[1])?, parse_usize(parts[2])?);
    if step == 0 {
        return Err(CliError::Usage(format!("range step must be positive in {item:?}")));
    }
    if stop < start {
        return Err(CliError::Usage(format!("range stop below start in {item:?}")));
    }
    Ok((start..=stop).step_by(step).collect())
}

fn items(spec: &str) -> Result<Vec<&str>, CliError> {
    let items: Vec<&str> = spec.split(',').map(str::trim).collect();
    if spec.trim().is_empty() || items.iter().any(|s| s.is_empty()) {
        return Err(CliError::Usage(format!("empty entry in list {spec:?}")));
    }
    Ok(items)
}

/// Parses a list of real numbers and ranges.
pub fn parse_floats(spec: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for item in items(spec)? {
        if item.contains(':') {
            out.extend(float_range(item)?);
        } else {
            out.push(parse_f64(item)?);
        }
    }
    Ok(out)
}

/// Parses a list of non-negative integers and ranges.
pub fn parse_ints(spec: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for item in items(spec)? {
        if item.contains(':') {
            out.extend(int_range(item)?);
        } else {
            out.push(parse_usize(item)?);
        }
    }
    Ok(out)
}

/// Parses `a,b` into a site pair.
pub fn parse_pair(spec: &str) -> Result<(usize, usize), CliError> {
    match spec.split(',').map(parse_usize).collect::<Result<Vec<_>, _>>()?.as_slice() {
        &[a, b] => Ok((a, b)),
        _ => Err(CliError::Usage(format!("pair must be a,b, got {spec:?}"))),
    }
}

pub fn require_ascending(grid: &[f64], what: &str) -> Result<(), CliError> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage(format!("{what} grid must be strictly ascending")));
    }
    Ok(())
}
