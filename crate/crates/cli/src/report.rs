//! Experiment reports.
//!
//! A report is the single machine-readable artifact of a run: an environment
//! stamp, one row per family member, and one verdict per assertion the
//! experiment makes about its own output.  Nothing in it depends on wall
//! time, hostnames, or iteration order of hash maps, so identical configs on
//! one thread reproduce the file byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::Result;
use serde::{Deserialize, Serialize};

/// How the run was invoked.  `spectral_window` records the largest boundary
/// mode the rank estimates looked at for the run's leading resolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub seed: u64,
    pub threads: usize,
    pub spectral_window: usize,
}

/// One measured quantity per family member, keyed by column name.  Values
/// are numbers where possible and strings for annotations (for instance a
/// rank profile that failed to separate).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Row {
    pub index: usize,
    pub label: String,
    pub values: BTreeMap<String, serde_json::Value>,
}

impl Row {
    pub fn new(index: usize, label: impl Into<String>) -> Self {
        Row {
            index,
            label: label.into(),
            values: BTreeMap::new(),
        }
    }

    pub fn num(&mut self, key: &str, v: f64) -> &mut Self {
        self.values.insert(key.to_string(), json_f64(v));
        self
    }

    pub fn int(&mut self, key: &str, v: i64) -> &mut Self {
        self.values
            .insert(key.to_string(), serde_json::Value::from(v));
        self
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) -> &mut Self {
        self.values
            .insert(key.to_string(), serde_json::Value::String(v.into()));
        self
    }
}

/// Non-finite measurements are reported as strings so the JSON stays valid
/// and the failure stays visible.
fn json_f64(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v)
        .map(serde_json::Value::Number)
        .unwrap_or_else(|| serde_json::Value::String(format!("{v}")))
}

/// One assertion: what was measured, what was required, whether it held.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub measured: f64,
    pub tolerance: String,
    pub pass: bool,
}

impl Verdict {
    pub fn new(name: impl Into<String>, measured: f64, tolerance: impl Into<String>, pass: bool) -> Self {
        Verdict {
            name: name.into(),
            measured,
            tolerance: tolerance.into(),
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub environment: Environment,
    pub rows: Vec<Row>,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
}

impl Report {
    pub fn new(experiment: &str, environment: Environment) -> Self {
        Report {
            experiment: experiment.to_string(),
            environment,
            rows: Vec::new(),
            verdicts: Vec::new(),
            pass: true,
        }
    }

    pub fn push_verdict(&mut self, v: Verdict) {
        self.pass &= v.pass;
        self.verdicts.push(v);
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Plain-text rendering: environment, measurement table, verdict list.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let env = &self.environment;
        let _ = writeln!(out, "experiment: {}", self.experiment);
        let _ = writeln!(
            out,
            "environment: {} {} seed={} threads={} spectral_window={}",
            env.package, env.version, env.seed, env.threads, env.spectral_window
        );
        let _ = writeln!(out);

        // Column set is the union over rows, ordered by name; rows are
        // already ordered by family index.
        let mut columns: Vec<&str> = Vec::new();
        for row in &self.rows {
            for key in row.values.keys() {
                if !columns.contains(&key.as_str()) {
                    columns.push(key);
                }
            }
        }
        columns.sort_unstable();
        let _ = writeln!(out, "rows:");
        let _ = writeln!(out, "  #  label  {}", columns.join("  "));
        for row in &self.rows {
            let mut line = format!("  {}  {}", row.index, row.label);
            for col in &columns {
                let cell = match row.values.get(*col) {
                    Some(serde_json::Value::Number(n)) => match n.as_f64() {
                        Some(v) if n.is_f64() => format!("{v:.6e}"),
                        _ => n.to_string(),
                    },
                    Some(serde_json::Value::String(s)) => s.clone(),
                    Some(other) => other.to_string(),
                    None => "-".to_string(),
                };
                let _ = write!(line, "  {cell}");
            }
            let _ = writeln!(out, "{line}");
        }

        let _ = writeln!(out);
        let _ = writeln!(out, "verdicts:");
        for v in &self.verdicts {
            let _ = writeln!(
                out,
                "  [{}] {} — measured {:.6e}, required {}",
                if v.pass { "pass" } else { "FAIL" },
                v.name,
                v.measured,
                v.tolerance
            );
        }
        let _ = writeln!(
            out,
            "result: {}",
            if self.pass { "pass" } else { "FAIL" }
        );
        out
    }
}
