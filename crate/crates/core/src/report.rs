//! Check records and suite reports shared by every suite.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One verified law. Numeric checks carry a residual and tolerance and pass
/// iff residual ≤ tolerance; boolean checks carry `holds`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub law: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holds: Option<bool>,
    pub pass: bool,
}

impl Check {
    pub fn numeric(id: impl Into<String>, law: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            id: id.into(),
            law: law.into(),
            residual: Some(residual),
            tolerance: Some(tolerance),
            holds: None,
            pass: residual <= tolerance,
        }
    }

    pub fn boolean(id: impl Into<String>, law: impl Into<String>, holds: bool) -> Self {
        Self { id: id.into(), law: law.into(), residual: None, tolerance: None, holds: Some(holds), pass: holds }
    }

    fn prefixed(mut self, prefix: &str) -> Self {
        self.id = format!("{prefix}.{}", self.id);
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: String,
    pub tool_version: String,
    pub seed: u64,
    pub tolerance_scale: f64,
    pub config: Value,
    pub checks: Vec<Check>,
    pub summary: Summary,
    pub details: BTreeMap<String, Value>,
}

impl SuiteReport {
    /// Assembles a report; checks are prefixed with `suite` unless already
    /// qualified, and ordered by id.
    pub fn new(
        suite: &str,
        seed: u64,
        tolerance_scale: f64,
        config: Value,
        checks: Vec<Check>,
        details: BTreeMap<String, Value>,
    ) -> Self {
        let mut checks: Vec<Check> = checks.into_iter().map(|c| c.prefixed(suite)).collect();
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        let passed = checks.iter().filter(|c| c.pass).count();
        Self {
            schema_version: SCHEMA_VERSION,
            suite: suite.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            seed,
            tolerance_scale,
            config,
            summary: Summary { total: checks.len(), passed, failed: checks.len() - passed },
            checks,
            details,
        }
    }

    /// Merges several suite reports under one name, keeping their
    /// qualified check ids and nesting their details by suite.
    pub fn merge(suite: &str, seed: u64, tolerance_scale: f64, config: Value, parts: Vec<SuiteReport>) -> Self {
        let mut checks = Vec::new();
        let mut details = BTreeMap::new();
        for part in parts {
            checks.extend(part.checks);
            details.insert(part.suite.clone(), serde_json::to_value(part.details).expect("plain data"));
        }
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        let passed = checks.iter().filter(|c| c.pass).count();
        Self {
            schema_version: SCHEMA_VERSION,
            suite: suite.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            seed,
            tolerance_scale,
            config,
            summary: Summary { total: checks.len(), passed, failed: checks.len() - passed },
            checks,
            details,
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report values are finite");
        text.push('\n');
        text
    }

    /// One line per check followed by the summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "suite {} (schema {}, version {}, seed {})", self.suite, self.schema_version, self.tool_version, self.seed);
        let width = self.checks.iter().map(|c| c.id.len()).max().unwrap_or(0);
        for c in &self.checks {
            let status = if c.pass { "PASS" } else { "FAIL" };
            let value = match (c.residual, c.tolerance, c.holds) {
                (Some(r), Some(t), _) => format!("residual {r:.3e} <= {t:.1e}"),
                (_, _, Some(h)) => format!("holds {h}"),
                _ => String::new(),
            };
            let _ = writeln!(out, "{status} {:width$}  {value:<32} {}", c.id, c.law);
        }
        let s = self.summary;
        let _ = writeln!(out, "{} checks, {} passed, {} failed", s.total, s.passed, s.failed);
        out
    }
}

/// Replaces non-finite numbers, which JSON cannot carry, by null.
pub fn finite_or_null(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_pass_rule() {
        assert!(Check::numeric("a", "law", 1e-13, 1e-12).pass);
        assert!(!Check::numeric("a", "law", 2e-12, 1e-12).pass);
        assert!(!Check::numeric("a", "law", f64::NAN, 1e-12).pass);
        assert!(Check::numeric("a", "law", 0.0, 0.0).pass);
    }

    #[test]
    fn report_orders_and_counts() {
        let checks = vec![Check::boolean("z", "last", false), Check::numeric("a", "first", 0.0, 1.0)];
        let r = SuiteReport::new("demo", 7, 1.0, Value::Null, checks, BTreeMap::new());
        assert_eq!(r.checks[0].id, "demo.a");
        assert_eq!(r.summary, Summary { total: 2, passed: 1, failed: 1 });
        assert!(!r.passed());
        let back: SuiteReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_text().contains("FAIL demo.z"));
    }

    #[test]
    fn merged_reports_keep_ids() {
        let a = SuiteReport::new("a", 1, 1.0, Value::Null, vec![Check::boolean("x", "", true)], BTreeMap::new());
        let b = SuiteReport::new("b", 1, 1.0, Value::Null, vec![Check::boolean("x", "", true)], BTreeMap::new());
        let all = SuiteReport::merge("all", 1, 1.0, Value::Null, vec![b, a]);
        let ids: Vec<&str> = all.checks.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["a.x", "b.x"]);
        assert!(all.details.contains_key("a"));
    }
}
