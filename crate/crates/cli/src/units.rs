//! Duration and count parsing for command-line values.

/// Parses `100us`, `1.5ms`, `10s`, `250ns`. Bare numbers are rejected
/// except `0`.
pub fn parse_duration(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if s == "0" {
        return Ok(0.0);
    }
    let (num, scale) = if let Some(n) = s.strip_suffix("ns") {
        (n, 1e9)
    } else if let Some(n) = s.strip_suffix("us").or_else(|| s.strip_suffix("µs")) {
        (n, 1e6)
    } else if let Some(n) = s.strip_suffix("ms") {
        (n, 1e3)
    } else if let Some(n) = s.strip_suffix('s') {
        (n, 1.0)
    } else {
        return Err(format!("duration `{s}` needs a unit suffix (ns, us, ms, s)"));
    };
    let v: f64 = num.trim().parse().map_err(|_| format!("duration `{s}` is not a number"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("duration `{s}` must be non-negative"));
    }
    Ok(v / scale)
}

/// Band edge: a duration or `inf`.
pub fn parse_edge(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "∞" => Ok(f64::INFINITY),
        other => parse_duration(other),
    }
}

/// `LO:HI` band, e.g. `2us:600us` or `600us:inf`.
pub fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("band `{s}` must look like LO:HI"))?;
    let lo = parse_duration(lo)?;
    let hi = parse_edge(hi)?;
    if !(hi > lo) {
        return Err(format!("band `{s}` must have HI above LO"));
    }
    Ok((lo, hi))
}

/// Integer count that also accepts scientific notation such as `1e6`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.trim().parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a count"))?;
    if !v.is_finite() || v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(format!("`{s}` is not a whole non-negative count"));
    }
    Ok(v as u64)
}
