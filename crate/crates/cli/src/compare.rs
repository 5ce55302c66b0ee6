//! `compare`: ideal-versus-measured residency gaps.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use idlegap::cstate::{ideal_core_residency, ideal_package_residency, residency_gap, Scope};
use idlegap::report::{GapReport, ResidencyReport};
use idlegap::trace::parse_residency_summary;
use serde::Serialize;

use crate::model::PointInfo;
use crate::render::{json, num, Rows};
use crate::scenario::{resolve_fixture, ScenarioArgs};
use crate::{CliError, OutFormat, Output};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    #[default]
    Core,
    Package,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Ideal residency report (JSON). When absent, the ideal is computed
    /// from the scenario flags, one point per sweep value.
    #[arg(long)]
    pub ideal: Option<PathBuf>,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Which ideal to compute from the scenario.
    #[arg(long, value_enum, default_value_t)]
    pub scope: ScopeArg,
    /// Measured input: report JSON, `state,fraction` CSV, or a
    /// `core,state,fraction` summary. Give one, or one per sweep point.
    #[arg(long, required = true)]
    pub measured: Vec<PathBuf>,
    /// Core to take from a per-core summary; default averages all cores.
    #[arg(long = "measured-core")]
    pub measured_core: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    pub out: OutFormat,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparePoint {
    pub point: Option<PointInfo>,
    pub measured_source: String,
    #[serde(flatten)]
    pub gap: GapReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareDoc {
    pub command: &'static str,
    pub points: Vec<ComparePoint>,
}

/// Loads a measured residency in any of the accepted forms.
pub fn load_measured(path: &Path, scope: Scope, core: Option<usize>) -> Result<ResidencyReport, CliError> {
    let flag = "--measured";
    let resolved = resolve_fixture(path, flag)?;
    let text = std::fs::read_to_string(&resolved)
        .map_err(|e| CliError::config(flag, format!("{}: {e}", resolved.display())))?;
    let bad = |e: idlegap::Error| CliError::config(flag, format!("{}: {e}", resolved.display()));
    let header = text.lines().next().unwrap_or("").trim();
    if header.starts_with('{') || resolved.extension().is_some_and(|e| e == "json") {
        return ResidencyReport::from_json_reader(text.as_bytes()).map_err(bad);
    }
    if header == "core,state,fraction" {
        let summary = parse_residency_summary(text.as_bytes()).map_err(bad)?;
        let mut report = match core {
            Some(c) => summary.core_report(c).ok_or_else(|| {
                CliError::config("--measured-core", format!("core {c} not in {}", resolved.display()))
            })?,
            None => summary.mean_report(),
        };
        report.scope = scope;
        return Ok(report);
    }
    ResidencyReport::from_csv_reader(text.as_bytes(), scope).map_err(bad)
}

pub fn execute(args: &CompareArgs) -> Result<CompareDoc, CliError> {
    let scope = match args.scope {
        ScopeArg::Core => Scope::Core,
        ScopeArg::Package => Scope::Package,
    };
    let ideals: Vec<(Option<PointInfo>, ResidencyReport)> = match &args.ideal {
        Some(path) => {
            let resolved = resolve_fixture(path, "--ideal")?;
            let file = std::fs::File::open(&resolved)
                .map_err(|e| CliError::config("--ideal", format!("{}: {e}", resolved.display())))?;
            let report = ResidencyReport::from_json_reader(file)
                .map_err(|e| CliError::config("--ideal", format!("{}: {e}", resolved.display())))?;
            vec![(None, report)]
        }
        None => {
            let scenario = args.scenario.resolve()?;
            let mut out = Vec::new();
            for p in scenario.points()? {
                let report = match scope {
                    Scope::Core => {
                        let table = scenario
                            .core_table
                            .as_ref()
                            .ok_or_else(|| CliError::config("--cstates", "a core table is required"))?;
                        ideal_core_residency(&p.params, table)
                    }
                    Scope::Package => {
                        let table = scenario
                            .pkg_table
                            .as_ref()
                            .ok_or_else(|| CliError::config("--pkg-cstates", "a package table is required"))?;
                        ideal_package_residency(&p.params, table)
                    }
                }
                .map_err(|e| CliError::config("--queue", e.to_string()))?;
                out.push((Some(PointInfo::new(&p.params)), report));
            }
            out
        }
    };

    if args.measured.len() != 1 && args.measured.len() != ideals.len() {
        return Err(CliError::config(
            "--measured",
            format!("give one measured input or one per point ({}), got {}", ideals.len(), args.measured.len()),
        ));
    }
    let mut points = Vec::with_capacity(ideals.len());
    for (i, (point, ideal)) in ideals.into_iter().enumerate() {
        let path = &args.measured[if args.measured.len() == 1 { 0 } else { i }];
        let measured = load_measured(path, ideal.scope, args.measured_core)?;
        let gap = residency_gap(&ideal, &measured).map_err(|e| CliError::config("--measured", e.to_string()))?;
        points.push(ComparePoint { point, measured_source: path.display().to_string(), gap: gap.rounded() });
    }
    Ok(CompareDoc { command: "compare", points })
}

fn rows(doc: &CompareDoc) -> Rows {
    let mut rows = Rows::new(&[
        "point",
        "service_mean_s",
        "utilization",
        "cores",
        "state",
        "ideal",
        "measured",
        "gap",
        "headline",
    ]);
    for (i, p) in doc.points.iter().enumerate() {
        let (service, util, cores) = match &p.point {
            Some(info) => (num(info.service_mean_s), num(info.utilization), info.cores.to_string()),
            None => Default::default(),
        };
        for r in &p.gap.rows {
            rows.push(vec![
                i.to_string(),
                service.clone(),
                util.clone(),
                cores.clone(),
                r.state.clone(),
                num(r.ideal),
                num(r.measured),
                num(r.gap),
                (r.state == p.gap.headline.state).to_string(),
            ]);
        }
    }
    rows
}

pub fn render(doc: &CompareDoc, format: OutFormat) -> String {
    match format {
        OutFormat::Json => json(doc),
        OutFormat::Csv => rows(doc).csv(),
        OutFormat::Table => rows(doc).table(),
    }
}

pub fn run(args: &CompareArgs) -> Result<Output, CliError> {
    let doc = execute(args)?;
    Ok(Output::ok(render(&doc, args.out)))
}
