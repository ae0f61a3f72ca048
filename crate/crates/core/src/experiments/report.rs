//! Experiment reports: named rows, derived constants, verdicts, and the
//! JSON/CSV/plot-data writers. Reports embed the full environment block so
//! a run can be reproduced bit-for-bit.

use serde::Serialize;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Holds => write!(f, "holds"),
            Verdict::Violated => write!(f, "violated"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Reproducibility block: everything a rerun needs.
#[derive(Debug, Clone, Serialize, Default)]
pub struct Environment {
    pub alpha: f64,
    pub h: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tol: f64,
}

/// One measured row: a label plus named numeric fields in fixed order.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub name: String,
    pub fields: Vec<(String, f64)>,
}

impl ReportRow {
    pub fn new(name: impl Into<String>) -> ReportRow {
        ReportRow { name: name.into(), fields: Vec::new() }
    }

    pub fn push(mut self, key: &str, value: f64) -> ReportRow {
        self.fields.push((key.to_string(), value));
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// Two-column plot data file content.
#[derive(Debug, Clone)]
pub struct PlotData {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub experiment: String,
    pub statement: String,
    pub environment: Environment,
    pub rows: Vec<ReportRow>,
    pub derived: Vec<(String, f64)>,
    pub verdict: Verdict,
    pub verdict_reason: String,
    pub notes: Vec<String>,
    pub plots: Vec<PlotData>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, statement: &str, environment: Environment) -> ExperimentReport {
        ExperimentReport {
            experiment: experiment.to_string(),
            statement: statement.to_string(),
            environment,
            rows: Vec::new(),
            derived: Vec::new(),
            verdict: Verdict::Inconclusive,
            verdict_reason: String::new(),
            notes: Vec::new(),
            plots: Vec::new(),
        }
    }

    pub fn derive(&mut self, key: &str, value: f64) {
        self.derived.push((key.to_string(), value));
    }

    pub fn derived_value(&self, key: &str) -> Option<f64> {
        self.derived.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn conclude(&mut self, verdict: Verdict, reason: impl Into<String>) {
        self.verdict = verdict;
        self.verdict_reason = reason.into();
    }

    /// Deterministic JSON rendering (struct order for the frame, field
    /// insertion order inside rows).
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = serde_json::Map::new();
                m.insert("name".into(), serde_json::Value::String(r.name.clone()));
                for (k, v) in &r.fields {
                    m.insert(k.clone(), number(*v));
                }
                serde_json::Value::Object(m)
            })
            .collect();
        let derived: serde_json::Map<String, serde_json::Value> = self
            .derived
            .iter()
            .map(|(k, v)| (k.clone(), number(*v)))
            .collect();
        serde_json::json!({
            "experiment": self.experiment,
            "statement": self.statement,
            "environment": self.environment,
            "rows": rows,
            "derived": serde_json::Value::Object(derived),
            "verdict": self.verdict,
            "verdict_reason": self.verdict_reason,
            "notes": self.notes,
        })
    }

    /// CSV of the rows: header from the first row's field names.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let Some(first) = self.rows.first() else {
            writeln!(w, "name")?;
            return Ok(());
        };
        let header: Vec<&str> = first.fields.iter().map(|(k, _)| k.as_str()).collect();
        writeln!(w, "name,{}", header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = header
                .iter()
                .map(|k| match row.get(k) {
                    Some(v) => format!("{v:.12e}"),
                    None => String::new(),
                })
                .collect();
            writeln!(w, "{},{}", row.name, cells.join(","))?;
        }
        Ok(())
    }

    /// Two-column whitespace-separated plot files.
    pub fn write_plot<W: Write>(plot: &PlotData, w: &mut W) -> std::io::Result<()> {
        for (x, y) in &plot.points {
            writeln!(w, "{x:.12e} {y:.12e}")?;
        }
        Ok(())
    }
}

fn number(v: f64) -> serde_json::Value {
    // Infinities and NaN are not JSON numbers; encode them as strings.
    match serde_json::Number::from_f64(v) {
        Some(n) => serde_json::Value::Number(n),
        None => serde_json::Value::String(format!("{v}")),
    }
}
