//! C-state tables and the ideal (oracle) residency model.
//!
//! The ideal system puts every idle period into the deepest state whose
//! target residency fits the period, and credits the whole period to that
//! state. Periods shorter than the shallowest threshold land in the
//! idle-but-no-savings bucket (`POLL` for cores, `PC0-idle` for packages).

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::queueing::{self, BandEnd, IdleLaw, QueueParams};
use crate::report::{GapReport, GapRow, ResidencyReport};

/// Bucket name used by governor replay for time lost to entry/exit.
pub const OVERHEAD_STATE: &str = "transition-overhead";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Core,
    Package,
}

impl Scope {
    pub fn default_active_name(self) -> &'static str {
        match self {
            Scope::Core => "C0",
            Scope::Package => "PC0",
        }
    }

    pub fn default_idle_shallow_name(self) -> &'static str {
        match self {
            Scope::Core => "POLL",
            Scope::Package => "PC0-idle",
        }
    }
}

impl std::fmt::Display for Scope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scope::Core => "core",
            Scope::Package => "package",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CState {
    pub name: String,
    /// Seconds.
    pub exit_latency: f64,
    /// Seconds. Minimum idle length for which the state is selected.
    pub target_residency: f64,
    /// 0 for the shallowest state.
    pub depth_rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CStateTable {
    scope: Scope,
    states: Vec<CState>,
    active_name: String,
    idle_shallow_name: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct StateDoc {
    name: String,
    exit_latency_us: f64,
    target_residency_us: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct TableDoc {
    scope: Scope,
    states: Vec<StateDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    active_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    idle_shallow_name: Option<String>,
}

impl CStateTable {
    /// Builds a table from `(name, exit_latency_s, target_residency_s)`
    /// triples in any order. States are ranked by target residency.
    pub fn new(scope: Scope, states: &[(&str, f64, f64)]) -> Result<Self> {
        Self::with_names(
            scope,
            states.iter().map(|&(n, e, t)| (n.to_string(), e, t)).collect(),
            scope.default_active_name().to_string(),
            scope.default_idle_shallow_name().to_string(),
        )
    }

    pub fn with_names(
        scope: Scope,
        mut states: Vec<(String, f64, f64)>,
        active_name: String,
        idle_shallow_name: String,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Table("at least one state is required".into()));
        }
        for (name, exit, target) in &states {
            if name.trim().is_empty() {
                return Err(Error::Table("state names must be non-empty".into()));
            }
            if !(exit.is_finite() && *exit >= 0.0) {
                return Err(Error::Table(format!("{name}: exit latency must be non-negative")));
            }
            if !(target.is_finite() && *target >= 0.0) {
                return Err(Error::Table(format!("{name}: target residency must be non-negative")));
            }
        }
        states.sort_by(|a, b| a.2.total_cmp(&b.2));
        for pair in states.windows(2) {
            if pair[0].2 == pair[1].2 {
                return Err(Error::Table(format!(
                    "{} and {} share target residency {}; selection would be ambiguous",
                    pair[0].0, pair[1].0, pair[0].2
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for name in states.iter().map(|s| &s.0).chain([&active_name, &idle_shallow_name]) {
            if !seen.insert(name.as_str()) {
                return Err(Error::Table(format!("duplicate state name {name}")));
            }
        }
        let states = states
            .into_iter()
            .enumerate()
            .map(|(depth_rank, (name, exit_latency, target_residency))| CState {
                name,
                exit_latency,
                target_residency,
                depth_rank,
            })
            .collect();
        Ok(CStateTable { scope, states, active_name, idle_shallow_name })
    }

    /// Loads the JSON table format (times in microseconds).
    pub fn from_json_reader<R: Read>(reader: R) -> Result<Self> {
        let doc: TableDoc =
            serde_json::from_reader(reader).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        let scope = doc.scope;
        Self::with_names(
            scope,
            doc.states.into_iter().map(|s| (s.name, s.exit_latency_us * 1e-6, s.target_residency_us * 1e-6)).collect(),
            doc.active_name.unwrap_or_else(|| scope.default_active_name().into()),
            doc.idle_shallow_name.unwrap_or_else(|| scope.default_idle_shallow_name().into()),
        )
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json_reader(s.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_reader(std::io::BufReader::new(file))
    }

    pub fn to_json(&self) -> String {
        let doc = TableDoc {
            scope: self.scope,
            states: self
                .states
                .iter()
                .map(|s| StateDoc {
                    name: s.name.clone(),
                    exit_latency_us: s.exit_latency * 1e6,
                    target_residency_us: s.target_residency * 1e6,
                })
                .collect(),
            active_name: Some(self.active_name.clone()),
            idle_shallow_name: Some(self.idle_shallow_name.clone()),
        };
        serde_json::to_string_pretty(&doc).expect("table serializes")
    }

    /// Skylake-like core table: C1 2 µs, C1E 20 µs, C6 600 µs targets.
    pub fn default_core() -> Self {
        Self::new(Scope::Core, &[("C1", 2e-6, 2e-6), ("C1E", 10e-6, 20e-6), ("C6", 133e-6, 600e-6)])
            .expect("default core table is valid")
    }

    /// Package table with a single PC6 state at 183 µs.
    pub fn default_package() -> Self {
        Self::new(Scope::Package, &[("PC6", 183e-6, 183e-6)]).expect("default package table is valid")
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    /// States from shallowest to deepest.
    pub fn states(&self) -> &[CState] {
        &self.states
    }

    pub fn active_name(&self) -> &str {
        &self.active_name
    }

    pub fn idle_shallow_name(&self) -> &str {
        &self.idle_shallow_name
    }

    pub fn deepest(&self) -> &CState {
        self.states.last().expect("tables are non-empty")
    }

    pub fn state(&self, name: &str) -> Option<&CState> {
        self.states.iter().find(|s| s.name == name)
    }

    /// Whether `name` is a sleep state of this table or its sub-threshold bucket.
    pub fn is_idle_name(&self, name: &str) -> bool {
        name == self.idle_shallow_name || self.state(name).is_some()
    }

    /// Exit latency for a state name; zero for the sub-threshold bucket.
    pub fn exit_latency_of(&self, name: &str) -> f64 {
        self.state(name).map_or(0.0, |s| s.exit_latency)
    }

    /// Target residency for a state name; zero for the sub-threshold bucket.
    pub fn target_residency_of(&self, name: &str) -> f64 {
        self.state(name).map_or(0.0, |s| s.target_residency)
    }

    /// Depth rank with the sub-threshold bucket at 0 and table states from 1.
    pub fn selection_rank(&self, name: &str) -> Option<usize> {
        if name == self.idle_shallow_name {
            Some(0)
        } else {
            self.state(name).map(|s| s.depth_rank + 1)
        }
    }

    /// `(state, lower edge, upper edge)` in seconds for the sub-threshold
    /// bucket followed by each table state.
    pub fn bands(&self) -> Vec<(&str, f64, BandEnd)> {
        let mut out = Vec::with_capacity(self.states.len() + 1);
        let first = self.states[0].target_residency;
        if first > 0.0 {
            out.push((self.idle_shallow_name.as_str(), 0.0, BandEnd::Finite(first)));
        }
        for (i, s) in self.states.iter().enumerate() {
            let hi = self.states.get(i + 1).map_or(BandEnd::Unbounded, |n| BandEnd::Finite(n.target_residency));
            out.push((s.name.as_str(), s.target_residency, hi));
        }
        out
    }

    /// Empty report keyed in canonical order (active, shallow, states).
    pub fn empty_report(&self) -> ResidencyReport {
        let mut r = ResidencyReport::new(self.scope);
        r.entries.insert(self.active_name.clone(), 0.0);
        r.entries.insert(self.idle_shallow_name.clone(), 0.0);
        for s in &self.states {
            r.entries.insert(s.name.clone(), 0.0);
        }
        r
    }
}

/// Deepest state whose target residency is at most `idle_len` seconds, or
/// the sub-threshold bucket when none fits.
pub fn oracle_select(table: &CStateTable, idle_len: f64) -> &str {
    table
        .states
        .iter()
        .rev()
        .find(|s| s.target_residency <= idle_len)
        .map_or(table.idle_shallow_name.as_str(), |s| s.name.as_str())
}

fn ideal_from_law(table: &CStateTable, law: &IdleLaw) -> Result<ResidencyReport> {
    let mut report = table.empty_report();
    report.entries[table.active_name.as_str()] = 1.0 - law.idle_fraction;
    for (name, lo, hi) in table.bands() {
        report.entries[name] = queueing::law_band_fraction(law, lo, hi)?;
    }
    Ok(report)
}

fn require_scope(table: &CStateTable, scope: Scope) -> Result<()> {
    if table.scope != scope {
        return Err(Error::Scope { expected: scope.to_string(), found: table.scope.to_string() });
    }
    Ok(())
}

/// Ideal per-core residency for a per-core queue.
pub fn ideal_core_residency(params: &QueueParams, table: &CStateTable) -> Result<ResidencyReport> {
    require_scope(table, Scope::Core)?;
    let law = queueing::core_idle_law(params)?;
    ideal_from_law(table, &law)
}

/// Ideal package residency. PC0 is the time at least one core is busy.
/// An mm1 queue with several cores is treated as independent per-core queues.
pub fn ideal_package_residency(params: &QueueParams, table: &CStateTable) -> Result<ResidencyReport> {
    require_scope(table, Scope::Package)?;
    let law = queueing::package_idle_law(params)?;
    ideal_from_law(table, &law)
}

/// Per-state `ideal − measured`. States missing from either side count as
/// zero. The headline row is the deepest sleep state of the ideal report.
pub fn residency_gap(ideal: &ResidencyReport, measured: &ResidencyReport) -> Result<GapReport> {
    if ideal.scope != measured.scope {
        return Err(Error::Scope { expected: ideal.scope.to_string(), found: measured.scope.to_string() });
    }
    let mut rows: Vec<GapRow> = ideal
        .entries
        .iter()
        .map(|(state, &i)| {
            let m = measured.get(state);
            GapRow { state: state.clone(), ideal: i, measured: m, gap: i - m }
        })
        .collect();
    for (state, &m) in &measured.entries {
        if !ideal.entries.contains_key(state) {
            rows.push(GapRow { state: state.clone(), ideal: 0.0, measured: m, gap: -m });
        }
    }
    let deepest = ideal
        .entries
        .keys()
        .rev()
        .find(|k| k.as_str() != OVERHEAD_STATE)
        .ok_or_else(|| Error::Report("ideal report has no states".into()))?;
    let headline = rows.iter().find(|r| &r.state == deepest).cloned().expect("deepest state has a row");
    Ok(GapReport { scope: ideal.scope, rows, headline })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> CStateTable {
        CStateTable::default_core()
    }

    #[test]
    fn oracle_select_examples() {
        let t = table();
        assert_eq!(oracle_select(&t, 100e-6), "C1E");
        assert_eq!(oracle_select(&t, 1e-6), "POLL");
        assert_eq!(oracle_select(&t, 10e-3), "C6");
        assert_eq!(oracle_select(&t, 2e-6), "C1");
        assert_eq!(oracle_select(&t, 0.0), "POLL");
    }

    #[test]
    fn table_rejects_ties_and_duplicates() {
        let e = CStateTable::new(Scope::Core, &[("C1", 0.0, 2e-6), ("C1E", 0.0, 2e-6)]);
        assert!(matches!(e, Err(Error::Table(_))));
        let e = CStateTable::new(Scope::Core, &[("C1", 0.0, 2e-6), ("C1", 0.0, 3e-6)]);
        assert!(matches!(e, Err(Error::Table(_))));
        let e = CStateTable::new(Scope::Core, &[("C0", 0.0, 2e-6)]);
        assert!(matches!(e, Err(Error::Table(_))));
        assert!(matches!(CStateTable::new(Scope::Core, &[]), Err(Error::Table(_))));
    }

    #[test]
    fn table_json_sorts_states() {
        let t = CStateTable::from_json_str(
            r#"{"scope":"core","states":[
                {"name":"C6","exit_latency_us":133,"target_residency_us":600},
                {"name":"C1","exit_latency_us":2,"target_residency_us":2}]}"#,
        )
        .unwrap();
        assert_eq!(t.states()[0].name, "C1");
        assert_eq!(t.deepest().name, "C6");
        assert_eq!(t.deepest().depth_rank, 1);
        assert!((t.deepest().target_residency - 600e-6).abs() < 1e-15);
        assert_eq!(t.idle_shallow_name(), "POLL");
        let back = CStateTable::from_json_str(&t.to_json()).unwrap();
        assert_eq!(back.states().len(), 2);
    }

    #[test]
    fn ideal_core_at_100us() {
        let p = QueueParams::mm1(2000.0, 100e-6).unwrap();
        let r = ideal_core_residency(&p, &table()).unwrap();
        let keys: Vec<_> = r.entries.keys().map(String::as_str).collect();
        assert_eq!(keys, ["C0", "POLL", "C1", "C1E", "C6"]);
        assert!((r.get("C0") - 0.2).abs() < 1e-12);
        assert!((r.get("POLL") - 6.4e-6).abs() < 1e-7);
        assert!((r.get("C1") - 6.2e-4).abs() < 1e-5);
        assert!((r.get("C1E") - 0.2693).abs() < 1e-4);
        assert!((r.get("C6") - 0.5301).abs() < 1e-4);
        r.check(1e-12).unwrap();
    }

    #[test]
    fn ideal_core_at_10ms() {
        let p = QueueParams::mm1(20.0, 10e-3).unwrap();
        let r = ideal_core_residency(&p, &table()).unwrap();
        assert!((r.get("C6") - 0.800).abs() < 0.001);
    }

    #[test]
    fn ideal_core_rejects_mmc_and_wrong_scope() {
        let p = QueueParams::mmc(4, 100.0, 1e-3).unwrap();
        assert!(matches!(ideal_core_residency(&p, &table()), Err(Error::Unsupported(_))));
        let p = QueueParams::mm1(100.0, 1e-3).unwrap();
        assert!(matches!(ideal_core_residency(&p, &CStateTable::default_package()), Err(Error::Scope { .. })));
    }

    #[test]
    fn ideal_package_examples() {
        let pkg = CStateTable::default_package();
        let p = QueueParams::cxmm1(10, 2000.0, 100e-6).unwrap();
        let r = ideal_package_residency(&p, &pkg).unwrap();
        assert!((r.get("PC0") - 0.8926).abs() < 1e-4);
        assert!((r.get("PC0-idle") - 0.0945).abs() < 1e-4);
        assert!((r.get("PC6") - 0.0129).abs() < 1e-4);

        let p = QueueParams::cxmm1(10, 20.0, 10e-3).unwrap();
        let r = ideal_package_residency(&p, &pkg).unwrap();
        assert!((r.get("PC6") - 0.1073).abs() < 1e-4);
        assert!((r.get("PC0-idle") - 7.0e-5).abs() < 1e-6);
    }

    #[test]
    fn single_core_package_matches_core() {
        let core = CStateTable::new(Scope::Core, &[("C6", 0.0, 183e-6)]).unwrap();
        let p = QueueParams::cxmm1(1, 2000.0, 100e-6).unwrap();
        let c = ideal_core_residency(&p, &core).unwrap();
        let k = ideal_package_residency(&p, &CStateTable::default_package()).unwrap();
        let cv: Vec<f64> = c.entries.values().copied().collect();
        let kv: Vec<f64> = k.entries.values().copied().collect();
        assert_eq!(cv, kv);
    }

    #[test]
    fn gap_examples() {
        let mut ideal = ResidencyReport::new(Scope::Core);
        ideal.entries.insert("C0".into(), 0.47);
        ideal.entries.insert("C1E".into(), 0.0);
        ideal.entries.insert("C6".into(), 0.53);
        let mut measured = ResidencyReport::new(Scope::Core);
        measured.entries.insert("C0".into(), 0.98);
        measured.entries.insert("C6".into(), 0.02);
        let g = residency_gap(&ideal, &measured).unwrap();
        assert_eq!(g.headline.state, "C6");
        assert!((g.headline.gap - 0.51).abs() < 1e-12);

        ideal.entries["C1E"] = 0.1;
        ideal.entries["C0"] = 0.37;
        let g = residency_gap(&ideal, &measured).unwrap();
        assert_eq!(g.row("C1E").unwrap().gap, 0.1);

        let g = residency_gap(&ideal, &ideal).unwrap();
        assert!(g.rows.iter().all(|r| r.gap == 0.0));

        let pkg = ResidencyReport::new(Scope::Package);
        assert!(matches!(residency_gap(&ideal, &pkg), Err(Error::Scope { .. })));
    }
}
