//! Scenario flags, config-file merging, and sweep expansion.

use std::path::{Path, PathBuf};

use clap::Args;
use idlegap::cstate::CStateTable;
use idlegap::queueing::{QueueKind, QueueParams};
use serde::Deserialize;

use crate::units::{parse_band, parse_duration};
use crate::CliError;

/// Environment variable overriding the fixture directory.
pub const FIXTURE_ENV: &str = "IDLEGAP_FIXTURES";
pub const DEFAULT_CORE_TABLE: &str = "core_skx.json";
pub const DEFAULT_PKG_TABLE: &str = "pkg_skx.json";

#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// JSON config file with the same keys as these flags (snake_case).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Queue discipline: mm1, cxmm1, or mmc.
    #[arg(long, value_parser = clap::value_parser!(QueueKind))]
    pub queue: Option<QueueKind>,
    /// Arrival rate per core, per second.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Per-core utilization.
    #[arg(long)]
    pub util: Option<f64>,
    /// Mean service time with a unit suffix, e.g. 100us.
    #[arg(long, value_parser = parse_duration)]
    pub service: Option<f64>,
    #[arg(long)]
    pub cores: Option<u32>,
    /// Core C-state table (JSON), resolved against the fixture directory.
    #[arg(long)]
    pub cstates: Option<PathBuf>,
    /// Package C-state table (JSON), resolved against the fixture directory.
    #[arg(long = "pkg-cstates")]
    pub pkg_cstates: Option<PathBuf>,
    /// Idle band LO:HI to report, e.g. 2us:600us or 600us:inf. Repeatable.
    #[arg(long = "band", value_parser = parse_band)]
    pub bands: Vec<(f64, f64)>,
    /// Comma-separated mean service times to sweep.
    #[arg(long = "sweep-service", value_delimiter = ',', value_parser = parse_duration)]
    pub sweep_service: Vec<f64>,
    /// Comma-separated core counts to sweep.
    #[arg(long = "sweep-cores", value_delimiter = ',')]
    pub sweep_cores: Vec<u32>,
    /// Comma-separated utilizations to sweep.
    #[arg(long = "sweep-util", value_delimiter = ',')]
    pub sweep_util: Vec<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    queue: Option<String>,
    lambda: Option<f64>,
    util: Option<f64>,
    service: Option<String>,
    cores: Option<u32>,
    cstates: Option<PathBuf>,
    pkg_cstates: Option<PathBuf>,
    #[serde(default)]
    bands: Vec<String>,
    #[serde(default)]
    sweep_service: Vec<String>,
    #[serde(default)]
    sweep_cores: Vec<u32>,
    #[serde(default)]
    sweep_util: Vec<f64>,
}

/// A fully resolved scenario: queue inputs, loaded tables, and sweep axes.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: QueueKind,
    pub cores: u32,
    pub lambda: Option<f64>,
    pub util: Option<f64>,
    pub service: Option<f64>,
    pub core_table: Option<CStateTable>,
    pub pkg_table: Option<CStateTable>,
    pub bands: Vec<(f64, f64)>,
    pub sweep_service: Vec<f64>,
    pub sweep_cores: Vec<u32>,
    pub sweep_util: Vec<f64>,
}

/// One evaluated sweep point.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub params: QueueParams,
}

pub fn fixture_root() -> PathBuf {
    std::env::var_os(FIXTURE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("fixtures"))
}

/// Uses `path` as given when it exists, otherwise looks in the fixture
/// directory. Missing files are an error.
pub fn resolve_fixture(path: &Path, flag: &'static str) -> Result<PathBuf, CliError> {
    if path.exists() {
        return Ok(path.to_path_buf());
    }
    let candidate = fixture_root().join(path);
    if candidate.exists() {
        return Ok(candidate);
    }
    Err(CliError::config(flag, format!("{} not found (also looked in {})", path.display(), fixture_root().display())))
}

pub fn load_table(path: &Path, flag: &'static str) -> Result<CStateTable, CliError> {
    let resolved = resolve_fixture(path, flag)?;
    CStateTable::load(&resolved).map_err(|e| CliError::config(flag, format!("{}: {e}", resolved.display())))
}

fn parse_strings<T>(
    values: &[String],
    flag: &'static str,
    parse: fn(&str) -> Result<T, String>,
) -> Result<Vec<T>, CliError> {
    values.iter().map(|v| parse(v).map_err(|e| CliError::config(flag, e))).collect()
}

impl ScenarioArgs {
    fn merged(&self) -> Result<ScenarioArgs, CliError> {
        let mut out = self.clone();
        let Some(path) = &self.config else {
            return Ok(out);
        };
        let path = &resolve_fixture(path, "--config")?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("--config", format!("{}: {e}", path.display())))?;
        let file: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| CliError::config("--config", format!("{}: {e}", path.display())))?;
        if out.queue.is_none() {
            if let Some(q) = &file.queue {
                out.queue = Some(q.parse().map_err(|e: idlegap::Error| CliError::config("--config", e.to_string()))?);
            }
        }
        out.lambda = out.lambda.or(file.lambda);
        out.util = out.util.or(file.util);
        if out.service.is_none() {
            if let Some(s) = &file.service {
                out.service = Some(parse_duration(s).map_err(|e| CliError::config("--config", e))?);
            }
        }
        out.cores = out.cores.or(file.cores);
        out.cstates = out.cstates.or(file.cstates);
        out.pkg_cstates = out.pkg_cstates.or(file.pkg_cstates);
        if out.bands.is_empty() {
            out.bands = parse_strings(&file.bands, "--config", parse_band)?;
        }
        if out.sweep_service.is_empty() {
            out.sweep_service = parse_strings(&file.sweep_service, "--config", parse_duration)?;
        }
        if out.sweep_cores.is_empty() {
            out.sweep_cores = file.sweep_cores;
        }
        if out.sweep_util.is_empty() {
            out.sweep_util = file.sweep_util;
        }
        Ok(out)
    }

    /// Merges the config file, loads the tables this queue needs, and
    /// checks the sweep axes.
    pub fn resolve(&self) -> Result<Scenario, CliError> {
        let args = self.merged()?;
        let kind = args.queue.ok_or_else(|| CliError::config("--queue", "a queue discipline is required"))?;
        let cores = args.cores.unwrap_or(1);
        if cores == 0 || args.sweep_cores.contains(&0) {
            return Err(CliError::config("--cores", "core count must be at least 1"));
        }
        let max_cores = args.sweep_cores.iter().copied().max().unwrap_or(cores);
        let needs_core = kind != QueueKind::Mmc;
        let needs_pkg = kind != QueueKind::Mm1 || max_cores > 1;

        let core_table = match (&args.cstates, needs_core) {
            (Some(p), _) => Some(load_table(p, "--cstates")?),
            (None, true) => Some(load_table(Path::new(DEFAULT_CORE_TABLE), "--cstates")?),
            (None, false) => None,
        };
        let pkg_table = match (&args.pkg_cstates, needs_pkg) {
            (Some(p), _) => Some(load_table(p, "--pkg-cstates")?),
            (None, true) => Some(load_table(Path::new(DEFAULT_PKG_TABLE), "--pkg-cstates")?),
            (None, false) => None,
        };
        if let Some(t) = &core_table {
            if t.scope() != idlegap::cstate::Scope::Core {
                return Err(CliError::config("--cstates", "table scope must be core"));
            }
        }
        if let Some(t) = &pkg_table {
            if t.scope() != idlegap::cstate::Scope::Package {
                return Err(CliError::config("--pkg-cstates", "table scope must be package"));
            }
        }
        let scenario = Scenario {
            kind,
            cores,
            lambda: args.lambda,
            util: args.util,
            service: args.service,
            core_table,
            pkg_table,
            bands: args.bands,
            sweep_service: args.sweep_service,
            sweep_cores: args.sweep_cores,
            sweep_util: args.sweep_util,
        };
        scenario.points()?;
        Ok(scenario)
    }
}

impl Scenario {
    pub fn is_sweep(&self) -> bool {
        !(self.sweep_service.is_empty() && self.sweep_cores.is_empty() && self.sweep_util.is_empty())
    }

    /// Sweep points ordered by service time, then core count, then
    /// utilization.
    pub fn points(&self) -> Result<Vec<Point>, CliError> {
        let services: Vec<Option<f64>> = if self.sweep_service.is_empty() {
            vec![self.service]
        } else {
            self.sweep_service.iter().map(|&s| Some(s)).collect()
        };
        let cores: Vec<u32> = if self.sweep_cores.is_empty() { vec![self.cores] } else { self.sweep_cores.clone() };
        let utils: Vec<Option<f64>> = if self.sweep_util.is_empty() {
            vec![self.util]
        } else {
            self.sweep_util.iter().map(|&u| Some(u)).collect()
        };
        let mut out = Vec::with_capacity(services.len() * cores.len() * utils.len());
        for &service in &services {
            for &c in &cores {
                for &util in &utils {
                    out.push(Point { params: derive_params(self.kind, c, self.lambda, util, service)? });
                }
            }
        }
        Ok(out)
    }
}

/// Any two of arrival rate, utilization, and service time fix the third.
fn derive_params(
    kind: QueueKind,
    cores: u32,
    lambda: Option<f64>,
    util: Option<f64>,
    service: Option<f64>,
) -> Result<QueueParams, CliError> {
    let (lambda, service, flag) = match (lambda, util, service) {
        (Some(l), Some(u), Some(s)) => {
            if (l * s - u).abs() > 1e-9 {
                return Err(CliError::config(
                    "--util",
                    format!("utilization {u} disagrees with lambda {l} × service {s}"),
                ));
            }
            (l, s, "--service")
        }
        (Some(l), Some(u), None) => {
            if !(l > 0.0) {
                return Err(CliError::config("--lambda", "arrival rate must be positive"));
            }
            (l, u / l, "--util")
        }
        (Some(l), None, Some(s)) => (l, s, "--service"),
        (None, Some(u), Some(s)) => {
            if !(s > 0.0) {
                return Err(CliError::config("--service", "service time must be positive"));
            }
            (u / s, s, "--util")
        }
        _ => {
            return Err(CliError::config("--lambda", "give two of --lambda, --util, --service (or sweep one of them)"))
        }
    };
    QueueParams::new(kind, lambda, service, cores).map_err(|e| CliError::config(flag, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_rules() {
        let p = derive_params(QueueKind::Mm1, 1, Some(2000.0), Some(0.2), None).unwrap();
        assert!((p.service_mean - 100e-6).abs() < 1e-15);
        let p = derive_params(QueueKind::Mm1, 1, None, Some(0.2), Some(10e-3)).unwrap();
        assert!((p.lambda_per_core - 20.0).abs() < 1e-12);
        assert!(derive_params(QueueKind::Mm1, 1, Some(2000.0), Some(0.3), Some(100e-6)).is_err());
        assert!(derive_params(QueueKind::Mm1, 1, Some(2000.0), Some(0.2), Some(100e-6)).is_ok());
        assert!(derive_params(QueueKind::Mm1, 1, Some(2000.0), None, None).is_err());
        let e = derive_params(QueueKind::Mm1, 1, Some(2000.0), Some(1.2), None).unwrap_err();
        assert!(e.to_string().contains("--util"), "{e}");
    }
}
