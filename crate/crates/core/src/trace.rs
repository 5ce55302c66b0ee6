//! Measured idle traces and residency summaries.
//!
//! Interval traces are CSV with a preamble line:
//!
//! ```text
//! # horizon_us=10000 cores=2
//! core,start_us,end_us,state
//! 0,0,50,C6
//! ```
//!
//! Times are microseconds (decimals allowed, kept to nanosecond precision)
//! and intervals are half-open. Residency summaries are `core,state,fraction`
//! CSV in the style of per-core turbostat columns.

use std::collections::BTreeMap;
use std::io::Read;

use indexmap::IndexMap;

use crate::cstate::{oracle_select, CStateTable, Scope};
use crate::error::{Error, Result};
use crate::interval::{self, ns_to_secs, Interval};
use crate::report::{ResidencyReport, MEASURED_SUM_TOLERANCE};
use crate::sim::SimResult;

pub const ACTIVE_STATE: &str = "C0";
/// Label for simulator intervals exported without a table.
pub const UNLABELED_IDLE: &str = "IDLE";

const TRACE_HEADER: &str = "core,start_us,end_us,state";
const SUMMARY_HEADER: &str = "core,state,fraction";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceInterval {
    pub start_ns: u64,
    pub end_ns: u64,
    pub state: String,
}

impl TraceInterval {
    pub fn span(&self) -> Interval {
        Interval::new(self.start_ns, self.end_ns)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdleIntervalTrace {
    pub horizon_ns: u64,
    /// One sorted list per core.
    pub intervals: Vec<Vec<TraceInterval>>,
}

fn parse_us(field: &str, line: usize, what: &str) -> Result<u64> {
    let v: f64 =
        field.trim().parse().map_err(|_| Error::Parse { line, msg: format!("{what} `{field}` is not a number") })?;
    if !v.is_finite() || v < 0.0 {
        return Err(Error::Parse { line, msg: format!("{what} `{field}` must be a non-negative time") });
    }
    Ok((v * 1000.0).round() as u64)
}

fn format_us(ns: u64) -> String {
    let (whole, frac) = (ns / 1000, ns % 1000);
    if frac == 0 {
        whole.to_string()
    } else {
        let digits = format!("{frac:03}");
        format!("{whole}.{}", digits.trim_end_matches('0'))
    }
}

fn parse_preamble(line: &str) -> Result<(u64, usize)> {
    let err = |msg: &str| Error::Parse { line: 1, msg: msg.to_string() };
    let body = line.trim().strip_prefix('#').ok_or_else(|| err("missing `# horizon_us=<v> cores=<n>` preamble"))?;
    let (mut horizon, mut cores) = (None, None);
    for token in body.split_whitespace() {
        match token.split_once('=') {
            Some(("horizon_us", v)) => horizon = Some(parse_us(v, 1, "horizon_us")?),
            Some(("cores", v)) => {
                cores = Some(v.parse::<usize>().map_err(|_| err(&format!("cores `{v}` is not a count")))?)
            }
            _ => {}
        }
    }
    let horizon = horizon.ok_or_else(|| err("preamble lacks horizon_us"))?;
    let cores = cores.ok_or_else(|| err("preamble lacks cores"))?;
    if horizon == 0 || cores == 0 {
        return Err(err("horizon and core count must be positive"));
    }
    Ok((horizon, cores))
}

/// Splits off the first line and returns `(first_line, rest)`.
fn split_first_line(text: &str) -> (&str, &str) {
    match text.split_once('\n') {
        Some((a, b)) => (a.trim_end_matches('\r'), b),
        None => (text, ""),
    }
}

fn csv_rows(body: &str, first_line: usize, expected_header: &str) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(body.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Parse { line: first_line, msg: e.to_string() })?;
    if header.iter().collect::<Vec<_>>().join(",") != expected_header {
        return Err(Error::Parse { line: first_line, msg: format!("expected header `{expected_header}`") });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(first_line, |p| first_line + p.line() as usize - 1);
            Error::Parse { line, msg: e.to_string() }
        })?;
        let line = rec.position().map_or(first_line, |p| first_line + p.line() as usize - 1);
        rows.push((line, rec));
    }
    Ok(rows)
}

/// Reads and validates an interval trace. Rows may be in any order.
pub fn parse_interval_trace<R: Read>(mut source: R) -> Result<IdleIntervalTrace> {
    let mut text = String::new();
    source.read_to_string(&mut text).map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
    let (first, body) = split_first_line(&text);
    let (horizon_ns, cores) = parse_preamble(first)?;

    let mut per_core: Vec<Vec<(usize, TraceInterval)>> = vec![Vec::new(); cores];
    for (line, rec) in csv_rows(body, 2, TRACE_HEADER)? {
        let core: usize =
            rec[0].parse().map_err(|_| Error::Parse { line, msg: format!("core `{}` is not an index", &rec[0]) })?;
        if core >= cores {
            return Err(Error::Parse { line, msg: format!("core {core} is not below declared count {cores}") });
        }
        let start_ns = parse_us(&rec[1], line, "start_us")?;
        let end_ns = parse_us(&rec[2], line, "end_us")?;
        if end_ns <= start_ns {
            return Err(Error::Parse { line, msg: "interval end must be after its start".into() });
        }
        if end_ns > horizon_ns {
            return Err(Error::Parse { line, msg: "interval ends past the horizon".into() });
        }
        let state = rec[3].to_string();
        if state.is_empty() {
            return Err(Error::Parse { line, msg: "state name is empty".into() });
        }
        per_core[core].push((line, TraceInterval { start_ns, end_ns, state }));
    }

    let mut intervals = Vec::with_capacity(cores);
    for (core, mut rows) in per_core.into_iter().enumerate() {
        rows.sort_by_key(|(_, iv)| (iv.start_ns, iv.end_ns));
        for pair in rows.windows(2) {
            if pair[1].1.start_ns < pair[0].1.end_ns {
                let line = pair[0].0.max(pair[1].0);
                return Err(Error::Parse { line, msg: format!("interval overlaps another on core {core}") });
            }
        }
        intervals.push(rows.into_iter().map(|(_, iv)| iv).collect());
    }
    Ok(IdleIntervalTrace { horizon_ns, intervals })
}

impl IdleIntervalTrace {
    pub fn cores(&self) -> usize {
        self.intervals.len()
    }

    pub fn horizon_secs(&self) -> f64 {
        ns_to_secs(self.horizon_ns)
    }

    /// Canonical CSV: rows ordered by core, then start time.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# horizon_us={} cores={}\n{TRACE_HEADER}\n", format_us(self.horizon_ns), self.cores());
        for (core, list) in self.intervals.iter().enumerate() {
            for iv in list {
                out.push_str(&format!("{core},{},{},{}\n", format_us(iv.start_ns), format_us(iv.end_ns), iv.state));
            }
        }
        out
    }

    /// Converts simulator output. With a table each idle period is labeled
    /// by the oracle choice for its length; otherwise it is labeled `IDLE`.
    pub fn from_sim(result: &SimResult, table: Option<&CStateTable>) -> Self {
        let intervals = result
            .core_idle
            .iter()
            .map(|list| {
                list.iter()
                    .map(|iv| TraceInterval {
                        start_ns: iv.start,
                        end_ns: iv.end,
                        state: table.map_or(UNLABELED_IDLE, |t| oracle_select(t, iv.len_secs())).to_string(),
                    })
                    .collect()
            })
            .collect();
        IdleIntervalTrace { horizon_ns: result.horizon_ns, intervals }
    }

    /// Idle spans of one core, optionally restricted to a set of states.
    pub fn idle_spans(&self, core: usize, states: Option<&[String]>) -> Vec<Interval> {
        let spans = self.intervals[core]
            .iter()
            .filter(|iv| states.is_none_or(|set| set.contains(&iv.state)))
            .map(TraceInterval::span)
            .collect();
        interval::normalize(spans)
    }
}

/// Per-core residency: summed interval time per state over the horizon,
/// remainder to `C0`. States follow `C0` in name order.
pub fn residency_from_trace(trace: &IdleIntervalTrace) -> Vec<ResidencyReport> {
    trace
        .intervals
        .iter()
        .map(|list| {
            let mut per_state: BTreeMap<&str, u64> = BTreeMap::new();
            for iv in list {
                *per_state.entry(iv.state.as_str()).or_default() += iv.end_ns - iv.start_ns;
            }
            let idle: u64 = per_state.values().sum();
            let h = trace.horizon_ns as f64;
            let mut report = ResidencyReport::new(Scope::Core);
            report.entries.insert(ACTIVE_STATE.to_string(), (trace.horizon_ns - idle) as f64 / h);
            for (state, ns) in per_state {
                *report.entries.entry(state.to_string()).or_default() += ns as f64 / h;
            }
            report.horizon_s = Some(trace.horizon_secs());
            report
        })
        .collect()
}

/// Maximal spans during which every core is idle. With `require_states`,
/// a core only counts as idle while in one of those states.
pub fn package_overlap(trace: &IdleIntervalTrace, require_states: Option<&[String]>) -> Vec<Interval> {
    let per_core: Vec<Vec<Interval>> = (0..trace.cores()).map(|c| trace.idle_spans(c, require_states)).collect();
    interval::intersect_all(&per_core)
}

/// Package residency from the overlap spans, each classified against the
/// package table by its length.
pub fn package_residency_from_trace(
    trace: &IdleIntervalTrace,
    table: &CStateTable,
    require_states: Option<&[String]>,
) -> Result<ResidencyReport> {
    if table.scope() != Scope::Package {
        return Err(Error::Scope { expected: Scope::Package.to_string(), found: table.scope().to_string() });
    }
    Ok(package_residency_from_spans(&package_overlap(trace, require_states), trace.horizon_ns, table))
}

pub fn package_residency_from_spans(spans: &[Interval], horizon_ns: u64, table: &CStateTable) -> ResidencyReport {
    let mut report = table.empty_report();
    let mut ns: IndexMap<&str, u64> = IndexMap::new();
    for iv in spans {
        *ns.entry(oracle_select(table, iv.len_secs())).or_default() += iv.len();
    }
    let h = horizon_ns as f64;
    let idle: u64 = ns.values().sum();
    for (state, v) in ns {
        report.entries[state] = v as f64 / h;
    }
    report.entries[table.active_name()] = (horizon_ns - idle) as f64 / h;
    report.horizon_s = Some(ns_to_secs(horizon_ns));
    report
}

/// Per-core `state → fraction` as reported by a residency tool.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidencySummary {
    pub per_core: BTreeMap<usize, IndexMap<String, f64>>,
}

pub fn parse_residency_summary<R: Read>(mut source: R) -> Result<ResidencySummary> {
    let mut text = String::new();
    source.read_to_string(&mut text).map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
    let mut per_core: BTreeMap<usize, IndexMap<String, f64>> = BTreeMap::new();
    for (line, rec) in csv_rows(&text, 1, SUMMARY_HEADER)? {
        let core: usize =
            rec[0].parse().map_err(|_| Error::Parse { line, msg: format!("core `{}` is not an index", &rec[0]) })?;
        let fraction: f64 = rec[2]
            .parse()
            .map_err(|_| Error::Parse { line, msg: format!("fraction `{}` is not a number", &rec[2]) })?;
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::Parse { line, msg: format!("fraction {fraction} outside [0,1]") });
        }
        let state = rec[1].to_string();
        if per_core.entry(core).or_default().insert(state.clone(), fraction).is_some() {
            return Err(Error::Parse { line, msg: format!("duplicate row for core {core} state {state}") });
        }
    }
    if per_core.is_empty() {
        return Err(Error::Parse { line: 1, msg: "summary has no rows".into() });
    }
    for (core, states) in &per_core {
        let total: f64 = states.values().sum();
        if total > 1.0 + MEASURED_SUM_TOLERANCE {
            return Err(Error::Parse { line: 1, msg: format!("core {core} fractions sum to {total}") });
        }
    }
    Ok(ResidencySummary { per_core })
}

impl ResidencySummary {
    /// Core report with any unlisted remainder credited to `C0`.
    pub fn core_report(&self, core: usize) -> Option<ResidencyReport> {
        let states = self.per_core.get(&core)?;
        let total: f64 = states.values().sum();
        let mut report = ResidencyReport::new(Scope::Core);
        let listed_active = states.get(ACTIVE_STATE).copied().unwrap_or(0.0);
        report.entries.insert(ACTIVE_STATE.to_string(), listed_active + (1.0 - total).max(0.0));
        for (state, &f) in states {
            if state != ACTIVE_STATE {
                report.entries.insert(state.clone(), f);
            }
        }
        Some(report)
    }

    /// Average of the per-core reports.
    pub fn mean_report(&self) -> ResidencyReport {
        let n = self.per_core.len() as f64;
        let mut mean = ResidencyReport::new(Scope::Core);
        for &core in self.per_core.keys() {
            let r = self.core_report(core).expect("core present");
            for (state, f) in r.entries {
                *mean.entries.entry(state).or_default() += f / n;
            }
        }
        mean
    }
}
