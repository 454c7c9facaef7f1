//! Deterministic report artifacts: flat key-value listings and CSV tables.
//!
//! Rows keep insertion order and floats use the shortest round-trip
//! formatting, so byte-identical inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;

#[derive(Debug, Clone, Default)]
pub struct KvReport {
    rows: Vec<(String, String)>,
}

impl KvReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.rows.push((key.to_string(), value.to_string()));
    }

    pub fn push_bool(&mut self, key: &str, value: bool) {
        self.push(key, if value { "pass" } else { "FAIL" });
    }

    pub fn extend_prefixed(&mut self, prefix: &str, other: &KvReport) {
        for (k, v) in &other.rows {
            self.rows.push((format!("{prefix}.{k}"), v.clone()));
        }
    }

    pub fn rows(&self) -> &[(String, String)] {
        &self.rows
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.rows.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in &self.rows {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_row(&mut self, cells: &[&dyn std::fmt::Display]) {
        assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells.iter().map(|c| c.to_string()).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_report_is_ordered_and_round_trips_floats() {
        let mut r = KvReport::new();
        r.push("norm", 0.1 + 0.2);
        r.push("a", 2f64.sqrt());
        r.push_bool("ok", true);
        let s = r.render();
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("norm"));
        assert!(lines[1].starts_with("a"));
        assert!(lines[0].contains("0.30000000000000004"));
        assert_eq!(r.get("ok"), Some("pass"));
    }

    #[test]
    fn csv_renders_deterministically() {
        let mut t = CsvTable::new(&["r", "value"]);
        t.push_row(&[&0.5, &1.25]);
        t.push_row(&[&0.25, &(1.0f64 / 3.0)]);
        let a = t.render();
        let b = t.render();
        assert_eq!(a, b);
        assert_eq!(a.lines().next().unwrap(), "r,value");
        assert!(a.contains("0.3333333333333333"));
    }
}
