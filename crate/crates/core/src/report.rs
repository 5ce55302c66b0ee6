//! Residency reports and their JSON/CSV forms.

use std::io::Read;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::cstate::Scope;
use crate::error::{Error, Result};

/// Tolerance for reports built by this crate.
pub const SUM_TOLERANCE: f64 = 1e-6;
/// Tolerance for reports read from measurement fixtures.
pub const MEASURED_SUM_TOLERANCE: f64 = 1e-3;

/// Round to six significant digits. All emitted documents go through this
/// so output is stable across platforms.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

/// Fraction of wall-clock time spent in each state. Entry order is
/// meaningful: the active state first, then states from shallowest to
/// deepest, then any extra buckets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidencyReport {
    pub scope: Scope,
    pub entries: IndexMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_s: Option<f64>,
}

impl ResidencyReport {
    pub fn new(scope: Scope) -> Self {
        ResidencyReport { scope, entries: IndexMap::new(), horizon_s: None }
    }

    pub fn get(&self, state: &str) -> f64 {
        self.entries.get(state).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Checks fractions lie in [0,1] and sum to 1 within `tolerance`.
    pub fn check(&self, tolerance: f64) -> Result<()> {
        for (state, &f) in &self.entries {
            if !(-tolerance..=1.0 + tolerance).contains(&f) {
                return Err(Error::Report(format!("state {state} has fraction {f} outside [0,1]")));
            }
        }
        let total = self.total();
        if (total - 1.0).abs() > tolerance {
            return Err(Error::Report(format!("fractions sum to {total}, expected 1")));
        }
        Ok(())
    }

    /// Same report with every fraction rounded to six significant digits.
    pub fn rounded(&self) -> ResidencyReport {
        ResidencyReport {
            scope: self.scope,
            entries: self.entries.iter().map(|(k, &v)| (k.clone(), round_sig(v))).collect(),
            horizon_s: self.horizon_s.map(round_sig),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rounded()).expect("report serializes")
    }

    /// `state,fraction` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,fraction\n");
        for (state, &f) in &self.entries {
            out.push_str(&format!("{state},{}\n", round_sig(f)));
        }
        out
    }

    /// Reads a JSON report and validates it as a measured input.
    pub fn from_json_reader<R: Read>(reader: R) -> Result<Self> {
        let report: ResidencyReport =
            serde_json::from_reader(reader).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        report.check(MEASURED_SUM_TOLERANCE)?;
        Ok(report)
    }

    /// Reads `state,fraction` CSV.
    pub fn from_csv_reader<R: Read>(reader: R, scope: Scope) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?.clone();
        if headers.iter().collect::<Vec<_>>() != ["state", "fraction"] {
            return Err(Error::Parse { line: 1, msg: "expected header `state,fraction`".into() });
        }
        let mut report = ResidencyReport::new(scope);
        for (i, row) in rdr.records().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            let state = row[0].to_string();
            let fraction: f64 =
                row[1].parse().map_err(|_| Error::Parse { line, msg: format!("bad fraction `{}`", &row[1]) })?;
            if report.entries.insert(state.clone(), fraction).is_some() {
                return Err(Error::Parse { line, msg: format!("duplicate state {state}") });
            }
        }
        report.check(MEASURED_SUM_TOLERANCE)?;
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub state: String,
    pub ideal: f64,
    pub measured: f64,
    /// `ideal − measured`; positive means opportunity left unused.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub scope: Scope,
    pub rows: Vec<GapRow>,
    /// Row for the deepest state of the ideal report.
    pub headline: GapRow,
}

impl GapReport {
    pub fn row(&self, state: &str) -> Option<&GapRow> {
        self.rows.iter().find(|r| r.state == state)
    }

    pub fn rounded(&self) -> GapReport {
        let r = |row: &GapRow| GapRow {
            state: row.state.clone(),
            ideal: round_sig(row.ideal),
            measured: round_sig(row.measured),
            gap: round_sig(row.gap),
        };
        GapReport { scope: self.scope, rows: self.rows.iter().map(r).collect(), headline: r(&self.headline) }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rounded()).expect("gap report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,ideal,measured,gap\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.state,
                round_sig(row.ideal),
                round_sig(row.measured),
                round_sig(row.gap)
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_six_digits() {
        assert_eq!(round_sig(0.530_106_4), 0.530_106);
        assert_eq!(round_sig(6.400_08e-6), 6.400_08e-6);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(123_456_789.0), 123_457_000.0);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let mut r = ResidencyReport::new(Scope::Core);
        r.entries.insert("C0".into(), 0.5);
        r.entries.insert("C6".into(), 0.5);
        r.horizon_s = Some(1e-4);
        let back = ResidencyReport::from_json_reader(r.to_json().as_bytes()).unwrap();
        assert_eq!(back, r);
        let back = ResidencyReport::from_csv_reader(r.to_csv().as_bytes(), Scope::Core).unwrap();
        assert_eq!(back.entries, r.entries);
    }

    #[test]
    fn measured_sum_is_checked() {
        let doc = "state,fraction\nC0,0.5\nC6,0.2\n";
        assert!(matches!(ResidencyReport::from_csv_reader(doc.as_bytes(), Scope::Core), Err(Error::Report(_))));
        let doc = "state,fraction\nC0,0.5\nC0,0.5\n";
        assert!(matches!(
            ResidencyReport::from_csv_reader(doc.as_bytes(), Scope::Core),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn json_preserves_entry_order() {
        let mut r = ResidencyReport::new(Scope::Package);
        r.entries.insert("PC0".into(), 0.9);
        r.entries.insert("PC0-idle".into(), 0.05);
        r.entries.insert("PC6".into(), 0.05);
        let json = r.to_json();
        let a = json.find("\"PC0\"").unwrap();
        let b = json.find("\"PC0-idle\"").unwrap();
        let c = json.find("\"PC6\"").unwrap();
        assert!(a < b && b < c);
    }
}
