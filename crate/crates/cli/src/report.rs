//! Reproduction reports: one row per checked claim, written as JSON and
//! Markdown.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;
use crate::output::write_atomic;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimRow {
    pub id: String,
    pub claim: String,
    pub computed: String,
    pub expected: String,
    pub tolerance: String,
    pub pass: bool,
    /// Grid, flow time, tolerances and whatever else the value depends on.
    pub metadata: BTreeMap<String, Value>,
}

impl ClaimRow {
    pub fn new(id: impl Into<String>, claim: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            claim: claim.into(),
            computed: String::new(),
            expected: String::new(),
            tolerance: String::new(),
            pass: false,
            metadata: BTreeMap::new(),
        }
    }

    pub fn meta(mut self, key: &str, v: impl Serialize) -> Self {
        self.metadata.insert(key.to_string(), serde_json::to_value(v).expect("metadata serializes"));
        self
    }

    pub fn failed_with(mut self, err: impl std::fmt::Display) -> Self {
        self.computed = format!("error: {err}");
        self.pass = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphHash {
    pub claim: String,
    pub label: String,
    pub cubes: usize,
    pub edges: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproductionReport {
    pub suite: String,
    pub config: RunConfig,
    pub graphs: Vec<GraphHash>,
    pub rows: Vec<ClaimRow>,
    pub passed: usize,
    pub failed: usize,
}

impl ReproductionReport {
    pub fn new(suite: &str, config: &RunConfig, rows: Vec<ClaimRow>, graphs: Vec<GraphHash>) -> Self {
        let passed = rows.iter().filter(|r| r.pass).count();
        let failed = rows.len() - passed;
        Self { suite: suite.to_string(), config: config.clone(), graphs, rows, passed, failed }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self, runtimes: &BTreeMap<String, f64>) -> String {
        let mut s = format!("# Reproduction report: {}\n\n{} passed, {} failed.\n\n", self.suite, self.passed, self.failed);
        s.push_str("| id | claim | computed | expected | tolerance | result | time (s) |\n|---|---|---|---|---|---|---|\n");
        for r in &self.rows {
            let t = runtimes.get(&r.id).map_or(String::from("-"), |t| format!("{t:.1}"));
            s.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} | {} |\n",
                r.id,
                cell(&r.claim),
                cell(&r.computed),
                cell(&r.expected),
                cell(&r.tolerance),
                if r.pass { "PASS" } else { "FAIL" },
                t
            ));
        }
        if !self.graphs.is_empty() {
            s.push_str("\n## Transition graphs\n\n| claim | graph | cubes | edges | sha256 |\n|---|---|---|---|---|\n");
            for g in &self.graphs {
                s.push_str(&format!("| {} | {} | {} | {} | `{}` |\n", g.claim, g.label, g.cubes, g.edges, g.sha256));
            }
        }
        s.push_str("\n## Configuration\n\n```toml\n");
        s.push_str(&self.config.to_toml());
        s.push_str("```\n");
        s
    }
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

/// Writes `report.json` and `report.md` into `dir` and returns their paths.
/// Wall-clock times go to the Markdown only, so the JSON is reproducible.
pub fn emit_report(report: &ReproductionReport, runtimes: &BTreeMap<String, f64>, dir: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
    let json = dir.join("report.json");
    let md = dir.join("report.md");
    write_atomic(&json, report.to_json().as_bytes())?;
    write_atomic(&md, report.to_markdown(runtimes).as_bytes())?;
    Ok((json, md))
}
