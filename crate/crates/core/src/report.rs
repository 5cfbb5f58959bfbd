//! Structured check reports shared by the engine, the realization verifier and
//! the numeric lab.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub label: String,
    pub residual: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub order: Option<u32>,
    pub residual: String,
    pub pass: bool,
    pub entries: Vec<ReportEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(check: impl Into<String>, order: Option<u32>) -> Self {
        Report { check: check.into(), order, residual: "0".into(), pass: true, entries: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, label: impl Into<String>, residual: impl Into<String>, pass: bool) {
        self.entries.push(ReportEntry { label: label.into(), residual: residual.into(), pass });
        self.finish();
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    fn finish(&mut self) {
        self.pass = self.entries.iter().all(|e| e.pass);
        let failing: Vec<&str> = self.entries.iter().filter(|e| !e.pass).map(|e| e.residual.as_str()).collect();
        self.residual = if failing.is_empty() { "0".into() } else { failing.join("; ") };
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let order = self.order.map(|n| format!(" (order {n})")).unwrap_or_default();
        let _ = writeln!(out, "{}{}: {}", self.check, order, if self.pass { "PASS" } else { "FAIL" });
        let width = self.entries.iter().map(|e| e.label.len()).max().unwrap_or(0);
        for e in &self.entries {
            let _ = writeln!(out, "  {:<width$}  {}  {}", e.label, if e.pass { "ok  " } else { "FAIL" }, e.residual);
        }
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        out
    }
}
