//! Shared rendering helpers.

use idlegap::report::round_sig;
use serde::Serialize;

pub fn json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("document serializes");
    s.push('\n');
    s
}

/// Six-significant-digit text for CSV and tables.
pub fn num(x: f64) -> String {
    if x.is_infinite() {
        return "inf".into();
    }
    round_sig(x).to_string()
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Rows of already-formatted cells.
#[derive(Debug, Default)]
pub struct Rows {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Rows {
    pub fn new(header: &[&str]) -> Self {
        Rows { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Rows with the leading `first_col` columns dropped.
    pub fn rows_from(&self, first_col: usize) -> Vec<Vec<String>> {
        self.rows.iter().map(|r| r[first_col..].to_vec()).collect()
    }

    pub fn csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn table(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&self.header);
        out.push_str(&line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>()));
        for row in &self.rows {
            out.push_str(&line(row));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_table() {
        assert_eq!(num(0.530_106_4), "0.530106");
        assert_eq!(num(f64::INFINITY), "inf");
        let mut rows = Rows::new(&["state", "fraction"]);
        rows.push(vec!["C6".into(), "0.5".into()]);
        assert_eq!(rows.csv(), "state,fraction\nC6,0.5\n");
        assert_eq!(rows.table(), "state  fraction\n-----  --------\nC6     0.5\n");
    }
}
