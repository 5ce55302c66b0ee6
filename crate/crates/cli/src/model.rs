//! `model`: closed-form idle laws, bands, and ideal residency per sweep point.

use clap::Args;
use idlegap::cstate::{ideal_core_residency, ideal_package_residency};
use idlegap::queueing::{self, BandEnd, IdleLaw, Level, QueueKind, QueueParams};
use idlegap::report::{round_sig, ResidencyReport};
use serde::Serialize;

use crate::render::{json, num, Rows};
use crate::scenario::{Scenario, ScenarioArgs};
use crate::{CliError, OutFormat, Output};

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, value_enum, default_value_t)]
    pub out: OutFormat,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointInfo {
    pub queue: QueueKind,
    pub cores: u32,
    pub lambda_per_core: f64,
    pub service_mean_s: f64,
    pub utilization: f64,
}

impl PointInfo {
    pub fn new(p: &QueueParams) -> Self {
        PointInfo {
            queue: p.kind,
            cores: p.cores,
            lambda_per_core: round_sig(p.lambda_per_core),
            service_mean_s: round_sig(p.service_mean),
            utilization: round_sig(p.utilization()),
        }
    }

    pub fn cells(&self) -> Vec<String> {
        vec![
            self.queue.label().to_string(),
            self.cores.to_string(),
            num(self.lambda_per_core),
            num(self.service_mean_s),
            num(self.utilization),
        ]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LawDoc {
    pub rate: f64,
    pub idle_fraction: f64,
    pub mean_period_s: f64,
}

impl From<IdleLaw> for LawDoc {
    fn from(law: IdleLaw) -> Self {
        LawDoc {
            rate: round_sig(law.rate),
            idle_fraction: round_sig(law.idle_fraction),
            mean_period_s: round_sig(law.mean_period()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BandDoc {
    pub level: Level,
    pub lo_s: f64,
    /// `null` for an unbounded band.
    pub hi_s: Option<f64>,
    pub fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelPoint {
    #[serde(flatten)]
    pub point: PointInfo,
    pub busy_fraction: f64,
    pub core_idle_law: Option<LawDoc>,
    pub package_idle_law: Option<LawDoc>,
    pub bands: Vec<BandDoc>,
    pub core_residency: Option<ResidencyReport>,
    pub package_residency: Option<ResidencyReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelDoc {
    pub command: &'static str,
    pub points: Vec<ModelPoint>,
}

fn has_core_view(p: &QueueParams) -> bool {
    p.kind != QueueKind::Mmc
}

fn has_package_view(p: &QueueParams) -> bool {
    p.kind != QueueKind::Mm1 || p.cores > 1
}

fn err(e: idlegap::Error) -> CliError {
    CliError::config("model", e.to_string())
}

pub fn evaluate_point(scenario: &Scenario, params: &QueueParams) -> Result<ModelPoint, CliError> {
    let busy = queueing::busy_fraction(params).map_err(err)?;
    let core_law = has_core_view(params).then(|| queueing::core_idle_law(params)).transpose().map_err(err)?;
    let pkg_law = has_package_view(params).then(|| queueing::package_idle_law(params)).transpose().map_err(err)?;

    let mut bands = Vec::new();
    for &(lo, hi) in &scenario.bands {
        for (level, present) in [(Level::Core, core_law.is_some()), (Level::Package, pkg_law.is_some())] {
            if present {
                let fraction = queueing::idle_band_fraction(params, level, lo, BandEnd::from_secs(hi)).map_err(err)?;
                bands.push(BandDoc {
                    level,
                    lo_s: round_sig(lo),
                    hi_s: hi.is_finite().then(|| round_sig(hi)),
                    fraction: round_sig(fraction),
                });
            }
        }
    }

    let core_residency = match (&scenario.core_table, has_core_view(params)) {
        (Some(t), true) => Some(ideal_core_residency(params, t).map_err(err)?.rounded()),
        _ => None,
    };
    let package_residency = match (&scenario.pkg_table, has_package_view(params)) {
        (Some(t), true) => Some(ideal_package_residency(params, t).map_err(err)?.rounded()),
        _ => None,
    };
    Ok(ModelPoint {
        point: PointInfo::new(params),
        busy_fraction: round_sig(busy),
        core_idle_law: core_law.map(Into::into),
        package_idle_law: pkg_law.map(Into::into),
        bands,
        core_residency,
        package_residency,
    })
}

/// Evaluates every sweep point on scoped threads; output follows sweep order.
pub fn evaluate(scenario: &Scenario) -> Result<ModelDoc, CliError> {
    let points = scenario.points()?;
    let results: Vec<Result<ModelPoint, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = points.iter().map(|p| s.spawn(move || evaluate_point(scenario, &p.params))).collect();
        handles.into_iter().map(|h| h.join().expect("model worker panicked")).collect()
    });
    Ok(ModelDoc { command: "model", points: results.into_iter().collect::<Result<_, _>>()? })
}

const CSV_HEADER: [&str; 9] =
    ["point", "queue", "cores", "lambda_per_core", "service_mean_s", "utilization", "section", "key", "value"];

fn rows(doc: &ModelDoc) -> Rows {
    let mut rows = Rows::new(&CSV_HEADER);
    for (i, p) in doc.points.iter().enumerate() {
        let mut push = |section: &str, key: String, value: f64| {
            let mut row = vec![i.to_string()];
            row.extend(p.point.cells());
            row.extend([section.to_string(), key, num(value)]);
            rows.push(row);
        };
        push("busy", "fraction".into(), p.busy_fraction);
        for (section, law) in [("core_law", &p.core_idle_law), ("package_law", &p.package_idle_law)] {
            if let Some(law) = law {
                push(section, "rate".into(), law.rate);
                push(section, "idle_fraction".into(), law.idle_fraction);
                push(section, "mean_period_s".into(), law.mean_period_s);
            }
        }
        for b in &p.bands {
            let section = match b.level {
                Level::Core => "band_core",
                Level::Package => "band_package",
            };
            let hi = b.hi_s.map_or("inf".to_string(), num);
            push(section, format!("{}:{}", num(b.lo_s), hi), b.fraction);
        }
        for (section, report) in [("core_residency", &p.core_residency), ("package_residency", &p.package_residency)] {
            if let Some(r) = report {
                for (state, &f) in &r.entries {
                    push(section, state.clone(), f);
                }
            }
        }
    }
    rows
}

pub fn render(doc: &ModelDoc, format: OutFormat) -> String {
    match format {
        OutFormat::Json => json(doc),
        OutFormat::Csv => rows(doc).csv(),
        OutFormat::Table => {
            let mut out = String::new();
            for (i, p) in doc.points.iter().enumerate() {
                out.push_str(&format!(
                    "point {i}: {} cores={} lambda={} service={}s util={}\n",
                    p.point.queue.label(),
                    p.point.cores,
                    num(p.point.lambda_per_core),
                    num(p.point.service_mean_s),
                    num(p.point.utilization)
                ));
                let mut t = Rows::new(&["section", "key", "value"]);
                for row in rows(&ModelDoc { command: doc.command, points: vec![p.clone()] }).rows_from(6) {
                    t.push(row);
                }
                out.push_str(&t.table());
                out.push('\n');
            }
            out
        }
    }
}

pub fn run(args: &ModelArgs) -> Result<Output, CliError> {
    let scenario = args.scenario.resolve()?;
    let doc = evaluate(&scenario)?;
    Ok(Output::ok(render(&doc, args.out)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use idlegap::cstate::CStateTable;

    fn scenario(kind: QueueKind, cores: u32) -> Scenario {
        Scenario {
            kind,
            cores,
            lambda: Some(2000.0),
            util: Some(0.2),
            service: None,
            core_table: Some(CStateTable::default_core()),
            pkg_table: Some(CStateTable::default_package()),
            bands: vec![(2e-6, 600e-6), (0.0, 183e-6)],
            sweep_service: vec![],
            sweep_cores: vec![],
            sweep_util: vec![],
        }
    }

    #[test]
    fn mm1_point() {
        let doc = evaluate(&scenario(QueueKind::Mm1, 1)).unwrap();
        let p = &doc.points[0];
        assert!(p.package_idle_law.is_none());
        assert!((p.bands[0].fraction - 0.270).abs() < 0.001);
        assert_eq!(p.core_residency.as_ref().unwrap().get("C6"), 0.530102);
    }

    #[test]
    fn mmc_point_has_no_core_view() {
        let doc = evaluate(&scenario(QueueKind::Mmc, 10)).unwrap();
        let p = &doc.points[0];
        assert!(p.core_idle_law.is_none() && p.core_residency.is_none());
        assert!(p.bands.iter().all(|b| b.level == Level::Package));
        assert!((p.package_idle_law.as_ref().unwrap().idle_fraction - 0.135335).abs() < 1e-6);
    }

    #[test]
    fn csv_rows_are_long_format() {
        let doc = evaluate(&scenario(QueueKind::Cxmm1, 10)).unwrap();
        let csv = render(&doc, OutFormat::Csv);
        assert!(csv.starts_with("point,queue,cores,lambda_per_core,service_mean_s,utilization,section,key,value\n"));
        assert!(csv.contains("band_package,0:0.000183,"));
        assert!(csv.contains("package_residency,PC0-idle,"));
    }
}
