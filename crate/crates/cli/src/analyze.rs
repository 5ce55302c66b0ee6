//! `analyze`: measured core and package residency from an interval trace.

use std::path::{Path, PathBuf};

use clap::Args;
use idlegap::interval::{self, ns_to_secs};
use idlegap::report::{round_sig, ResidencyReport};
use idlegap::trace::{package_overlap, package_residency_from_spans, parse_interval_trace, residency_from_trace};
use serde::Serialize;

use crate::render::{json, num, opt_num, Rows};
use crate::scenario::{load_table, resolve_fixture, DEFAULT_PKG_TABLE};
use crate::{CliError, OutFormat, Output};

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Interval trace CSV (`# horizon_us=.. cores=..` preamble).
    #[arg(long)]
    pub trace: PathBuf,
    /// Package C-state table (JSON), resolved against the fixture directory.
    #[arg(long = "pkg-cstates")]
    pub pkg_cstates: Option<PathBuf>,
    /// Count a core as idle for the package only while in this state. Repeatable.
    #[arg(long = "require-state")]
    pub require_state: Vec<String>,
    #[arg(long, value_enum, default_value_t)]
    pub out: OutFormat,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoreReport {
    pub core: usize,
    #[serde(flatten)]
    pub report: ResidencyReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapDoc {
    pub spans: usize,
    pub idle_fraction: f64,
    pub mean_span_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeDoc {
    pub command: &'static str,
    pub horizon_s: f64,
    pub cores: usize,
    pub require_state: Vec<String>,
    pub core_residency: Vec<CoreReport>,
    pub package_overlap: OverlapDoc,
    pub package_residency: ResidencyReport,
}

pub fn execute(args: &AnalyzeArgs) -> Result<AnalyzeDoc, CliError> {
    let path = resolve_fixture(&args.trace, "--trace")?;
    let file =
        std::fs::File::open(&path).map_err(|e| CliError::config("--trace", format!("{}: {e}", path.display())))?;
    let trace = parse_interval_trace(std::io::BufReader::new(file))
        .map_err(|e| CliError::config("--trace", format!("{}: {e}", path.display())))?;
    let table = load_table(args.pkg_cstates.as_deref().unwrap_or(Path::new(DEFAULT_PKG_TABLE)), "--pkg-cstates")?;
    if table.scope() != idlegap::cstate::Scope::Package {
        return Err(CliError::config("--pkg-cstates", "table scope must be package"));
    }

    let filter = (!args.require_state.is_empty()).then_some(args.require_state.as_slice());
    let spans = package_overlap(&trace, filter);
    let idle_ns = interval::total_len(&spans);
    let package_residency = package_residency_from_spans(&spans, trace.horizon_ns, &table);

    Ok(AnalyzeDoc {
        command: "analyze",
        horizon_s: round_sig(trace.horizon_secs()),
        cores: trace.cores(),
        require_state: args.require_state.clone(),
        core_residency: residency_from_trace(&trace)
            .into_iter()
            .enumerate()
            .map(|(core, r)| CoreReport { core, report: r.rounded() })
            .collect(),
        package_overlap: OverlapDoc {
            spans: spans.len(),
            idle_fraction: round_sig(idle_ns as f64 / trace.horizon_ns as f64),
            mean_span_s: (!spans.is_empty()).then(|| round_sig(ns_to_secs(idle_ns) / spans.len() as f64)),
        },
        package_residency: package_residency.rounded(),
    })
}

fn rows(doc: &AnalyzeDoc) -> Rows {
    let mut rows = Rows::new(&["scope", "core", "state", "fraction"]);
    for c in &doc.core_residency {
        for (state, &f) in &c.report.entries {
            rows.push(vec!["core".into(), c.core.to_string(), state.clone(), num(f)]);
        }
    }
    for (state, &f) in &doc.package_residency.entries {
        rows.push(vec!["package".into(), String::new(), state.clone(), num(f)]);
    }
    rows
}

pub fn render(doc: &AnalyzeDoc, format: OutFormat) -> String {
    match format {
        OutFormat::Json => json(doc),
        OutFormat::Csv => rows(doc).csv(),
        OutFormat::Table => {
            let mut out = format!(
                "horizon {}s, {} cores, {} package idle spans (mean {}s)\n",
                num(doc.horizon_s),
                doc.cores,
                doc.package_overlap.spans,
                opt_num(doc.package_overlap.mean_span_s)
            );
            out.push_str(&rows(doc).table());
            out
        }
    }
}

pub fn run(args: &AnalyzeArgs) -> Result<Output, CliError> {
    let doc = execute(args)?;
    Ok(Output::ok(render(&doc, args.out)))
}
