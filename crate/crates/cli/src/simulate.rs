//! `simulate`: run the event simulator, export its trace, and optionally
//! check the empirical bands against the closed forms.

use std::path::PathBuf;

use clap::Args;
use idlegap::cstate::CStateTable;
use idlegap::queueing::{self, BandEnd, Level, QueueKind, QueueParams};
use idlegap::report::round_sig;
use idlegap::sim::{band_intervals, simulate, Dispatch, IdleSource, SimConfig, SimResult};
use idlegap::trace::IdleIntervalTrace;
use serde::Serialize;

use crate::model::PointInfo;
use crate::render::{json, num, opt_num, Rows};
use crate::scenario::ScenarioArgs;
use crate::units::parse_count;
use crate::{CliError, OutFormat, Output};

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Measured arrivals per arrival stream (per core for mm1/cxmm1).
    #[arg(long, value_parser = parse_count, default_value = "100000")]
    pub arrivals: u64,
    /// Warmup arrivals discarded before measuring; defaults to 10% of --arrivals.
    #[arg(long, value_parser = parse_count)]
    pub warmup: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// M/M/c dispatch: lowest-index, random-idle, longest-idle-first.
    #[arg(long, value_parser = clap::value_parser!(Dispatch), default_value = "lowest-index")]
    pub dispatch: Dispatch,
    /// Write the idle-interval trace CSV here, labeled by the oracle state.
    #[arg(long = "trace-out")]
    pub trace_out: Option<PathBuf>,
    /// Compare against the closed-form model and fail (exit 3) beyond --tol.
    #[arg(long)]
    pub check: bool,
    #[arg(long, default_value_t = 0.01)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t)]
    pub out: OutFormat,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoreStats {
    pub core: usize,
    pub busy_fraction: f64,
    pub idle_periods: usize,
    pub mean_idle_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PackageStats {
    pub idle_fraction: f64,
    pub idle_periods: usize,
    pub mean_idle_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BandRow {
    pub state: String,
    pub lo_s: f64,
    pub hi_s: Option<f64>,
    pub fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub simulated: f64,
    pub model: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckDoc {
    pub max_abs_deviation: f64,
    pub tol: f64,
    pub passed: bool,
    pub items: Vec<CheckItem>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateDoc {
    pub command: &'static str,
    #[serde(flatten)]
    pub point: PointInfo,
    pub seed: u64,
    pub arrivals: u64,
    pub warmup_arrivals: u64,
    pub dispatch: Dispatch,
    pub horizon_s: f64,
    pub jobs: u64,
    pub per_core: Vec<CoreStats>,
    pub package: PackageStats,
    /// Idle bands by core-table state, averaged over cores.
    pub core_bands: Vec<BandRow>,
    pub package_bands: Vec<BandRow>,
    pub trace_path: Option<String>,
    pub check: Option<CheckDoc>,
}

fn table_bands(table: &CStateTable) -> Vec<(String, f64, f64)> {
    table.bands().into_iter().map(|(name, lo, hi)| (name.to_string(), lo, hi.as_secs())).collect()
}

fn edges_of(bands: &[(String, f64, f64)]) -> Vec<f64> {
    let mut edges: Vec<f64> = bands.iter().map(|b| b.1).collect();
    edges.push(f64::INFINITY);
    edges
}

fn mean_core_bands(result: &SimResult, bands: &[(String, f64, f64)]) -> Result<Vec<f64>, CliError> {
    if bands.is_empty() {
        return Ok(Vec::new());
    }
    let edges = edges_of(bands);
    let mut acc = vec![0.0; bands.len()];
    for core in 0..result.cores() {
        let b = band_intervals(&result.core_idle[core], result.horizon_ns, &edges).map_err(sim_err)?;
        for (a, f) in acc.iter_mut().zip(b.fractions) {
            *a += f / result.cores() as f64;
        }
    }
    Ok(acc)
}

fn sim_err(e: idlegap::Error) -> CliError {
    CliError::config("simulate", e.to_string())
}

fn band_rows(bands: &[(String, f64, f64)], fractions: &[f64]) -> Vec<BandRow> {
    bands
        .iter()
        .zip(fractions)
        .map(|((state, lo, hi), &f)| BandRow {
            state: state.clone(),
            lo_s: round_sig(*lo),
            hi_s: hi.is_finite().then(|| round_sig(*hi)),
            fraction: round_sig(f),
        })
        .collect()
}

fn check_items(
    params: &QueueParams,
    result: &SimResult,
    core_bands: &[(String, f64, f64)],
    core_fracs: &[f64],
    pkg_bands: &[(String, f64, f64)],
    pkg_fracs: &[f64],
) -> Result<Vec<CheckItem>, CliError> {
    let mut items = Vec::new();
    let mut add = |name: String, simulated: f64, model: f64| {
        items.push(CheckItem { name, simulated, model, deviation: (simulated - model).abs() });
    };
    let busy: f64 = result.busy_fractions().iter().sum::<f64>() / result.cores() as f64;
    add("busy_fraction".into(), busy, queueing::busy_fraction(params).map_err(sim_err)?);
    if params.kind != QueueKind::Mmc {
        for ((state, lo, hi), &f) in core_bands.iter().zip(core_fracs) {
            let model =
                queueing::idle_band_fraction(params, Level::Core, *lo, BandEnd::from_secs(*hi)).map_err(sim_err)?;
            add(format!("core_band:{state}"), f, model);
        }
    }
    if params.kind != QueueKind::Mm1 || params.cores > 1 {
        let law = queueing::package_idle_law(params).map_err(sim_err)?;
        add("package_idle_fraction".into(), result.package_idle_fraction(), law.idle_fraction);
        for ((state, lo, hi), &f) in pkg_bands.iter().zip(pkg_fracs) {
            let model =
                queueing::idle_band_fraction(params, Level::Package, *lo, BandEnd::from_secs(*hi)).map_err(sim_err)?;
            add(format!("package_band:{state}"), f, model);
        }
    }
    Ok(items)
}

pub fn execute(args: &SimulateArgs) -> Result<SimulateDoc, CliError> {
    let scenario = args.scenario.resolve()?;
    if scenario.is_sweep() {
        return Err(CliError::config(
            "--sweep-service",
            "simulate runs a single scenario; sweep axes are not supported",
        ));
    }
    let params = scenario.points()?[0].params;
    if args.arrivals == 0 {
        return Err(CliError::config("--arrivals", "at least one arrival is required"));
    }
    if !(args.tol >= 0.0) {
        return Err(CliError::config("--tol", "tolerance must be non-negative"));
    }
    let mut config = SimConfig::new(params, args.seed, args.arrivals).with_dispatch(args.dispatch);
    if let Some(w) = args.warmup {
        config = config.with_warmup(w);
    }
    let result = simulate(&config).map_err(|e| CliError::config("--arrivals", e.to_string()))?;

    let core_bands = scenario.core_table.as_ref().map(table_bands).unwrap_or_default();
    let core_fracs = mean_core_bands(&result, &core_bands)?;
    let pkg_bands = scenario.pkg_table.as_ref().map(table_bands).unwrap_or_default();
    let pkg_fracs = if pkg_bands.is_empty() {
        Vec::new()
    } else {
        band_intervals(&result.package_idle, result.horizon_ns, &edges_of(&pkg_bands)).map_err(sim_err)?.fractions
    };

    let trace_path = match &args.trace_out {
        Some(path) => {
            let trace = IdleIntervalTrace::from_sim(&result, scenario.core_table.as_ref());
            std::fs::write(path, trace.to_csv())
                .map_err(|e| CliError::config("--trace-out", format!("{}: {e}", path.display())))?;
            Some(path.display().to_string())
        }
        None => None,
    };

    let check = if args.check {
        let items = check_items(&params, &result, &core_bands, &core_fracs, &pkg_bands, &pkg_fracs)?;
        let max = items.iter().map(|i| i.deviation).fold(0.0, f64::max);
        Some(CheckDoc {
            max_abs_deviation: round_sig(max),
            tol: args.tol,
            passed: max <= args.tol,
            items: items
                .into_iter()
                .map(|i| CheckItem {
                    name: i.name,
                    simulated: round_sig(i.simulated),
                    model: round_sig(i.model),
                    deviation: round_sig(i.deviation),
                })
                .collect(),
        })
    } else {
        None
    };

    let per_core = (0..result.cores())
        .map(|core| CoreStats {
            core,
            busy_fraction: round_sig(result.busy_fraction(core)),
            idle_periods: result.core_idle[core].len(),
            mean_idle_s: result.mean_idle_secs(IdleSource::Core(core)).map(round_sig),
        })
        .collect();
    Ok(SimulateDoc {
        command: "simulate",
        point: PointInfo::new(&params),
        seed: config.seed,
        arrivals: config.arrivals,
        warmup_arrivals: config.warmup_arrivals,
        dispatch: config.dispatch,
        horizon_s: round_sig(result.horizon_secs()),
        jobs: result.jobs,
        per_core,
        package: PackageStats {
            idle_fraction: round_sig(result.package_idle_fraction()),
            idle_periods: result.package_idle.len(),
            mean_idle_s: result.mean_idle_secs(IdleSource::Package).map(round_sig),
        },
        core_bands: band_rows(&core_bands, &core_fracs),
        package_bands: band_rows(&pkg_bands, &pkg_fracs),
        trace_path,
        check,
    })
}

fn rows(doc: &SimulateDoc) -> Rows {
    let mut rows = Rows::new(&["section", "key", "value"]);
    let mut push = |section: &str, key: String, value: String| rows.push(vec![section.into(), key, value]);
    push("run", "horizon_s".into(), num(doc.horizon_s));
    push("run", "jobs".into(), doc.jobs.to_string());
    for c in &doc.per_core {
        push("core_busy", c.core.to_string(), num(c.busy_fraction));
        push("core_idle_periods", c.core.to_string(), c.idle_periods.to_string());
        push("core_mean_idle_s", c.core.to_string(), opt_num(c.mean_idle_s));
    }
    push("package", "idle_fraction".into(), num(doc.package.idle_fraction));
    push("package", "idle_periods".into(), doc.package.idle_periods.to_string());
    push("package", "mean_idle_s".into(), opt_num(doc.package.mean_idle_s));
    for b in &doc.core_bands {
        push("core_band", b.state.clone(), num(b.fraction));
    }
    for b in &doc.package_bands {
        push("package_band", b.state.clone(), num(b.fraction));
    }
    if let Some(check) = &doc.check {
        for i in &check.items {
            push("check", i.name.clone(), num(i.deviation));
        }
        push("check", "max_abs_deviation".into(), num(check.max_abs_deviation));
    }
    rows
}

pub fn render(doc: &SimulateDoc, format: OutFormat) -> String {
    match format {
        OutFormat::Json => json(doc),
        OutFormat::Csv => rows(doc).csv(),
        OutFormat::Table => rows(doc).table(),
    }
}

pub fn run(args: &SimulateArgs) -> Result<Output, CliError> {
    let doc = execute(args)?;
    let text = render(&doc, args.out);
    let failure = doc
        .check
        .as_ref()
        .filter(|c| !c.passed)
        .map(|c| CliError::Check { deviation: c.max_abs_deviation, tol: c.tol });
    Ok(Output { text, failure })
}
