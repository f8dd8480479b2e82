//! Run reports for the excision commands and their JSON, CSV and text forms.

use std::io::Write;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs: Inputs,
    pub outputs: Outputs,
    pub timing_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    /// SHA-256 of the canonical JSON of the parsed shape.
    pub shape_digest: String,
    pub k: usize,
    pub o: Vec<f64>,
    pub direction: Vec<f64>,
    pub beta: f64,
    pub tol: f64,
    pub verify_tol: f64,
    pub verify: String,
    pub seed: u64,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub x: f64,
    pub residual: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub exact: Option<ExactCheck>,
    pub mc: Option<McCheck>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactCheck {
    pub composite: Vec<f64>,
    pub distance: f64,
    pub relative_distance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCheck {
    pub estimate: Vec<f64>,
    pub std_error: Vec<f64>,
    pub samples_accepted: u64,
    pub samples_total: u64,
    /// Largest deviation from `P` in standard errors.
    pub sigmas: f64,
    pub passed: bool,
}

pub const MC_SIGMAS: f64 = 4.0;

pub fn shape_digest<T: Serialize>(shape: &T) -> Result<String> {
    let canonical = serde_json::to_vec(shape)?;
    Ok(hex::encode(Sha256::digest(canonical)))
}

/// `(field, value)` pairs with dotted paths and `[i]` indices. Numbers keep
/// their shortest round-trip form.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
        match value {
            Value::Object(map) => {
                for (key, v) in map {
                    let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
                    walk(&path, v, out);
                }
            }
            Value::Array(items) => {
                for (i, v) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), v, out);
                }
            }
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
            Value::Null => out.push((prefix.to_string(), String::new())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut out = Vec::new();
    walk("", value, &mut out);
    out
}

pub fn write_csv<W: Write>(value: &Value, writer: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["field", "value"])?;
    for (field, v) in flatten(value) {
        csv.write_record([field, v])?;
    }
    csv.flush()?;
    Ok(())
}

fn point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(", "))
}

pub fn write_text<W: Write>(report: &RunReport, mut w: W) -> Result<()> {
    let (i, o) = (&report.inputs, &report.outputs);
    writeln!(w, "shape     {}", i.shape_digest)?;
    writeln!(w, "k         {}", i.k)?;
    writeln!(w, "O         {}", point(&i.o))?;
    writeln!(w, "beta      {}", i.beta)?;
    writeln!(w, "x         {}", o.x)?;
    writeln!(w, "residual  {:e}", o.residual)?;
    writeln!(w, "Q         {}", point(&o.q))?;
    writeln!(w, "P         {}", point(&o.p))?;
    if let Some(e) = &o.exact {
        writeln!(w, "composite {}", point(&e.composite))?;
        writeln!(
            w,
            "exact     {} (relative distance {:e}, tol {:e})",
            verdict(e.passed),
            e.relative_distance,
            i.verify_tol
        )?;
    }
    if let Some(m) = &o.mc {
        writeln!(w, "estimate  {}", point(&m.estimate))?;
        writeln!(
            w,
            "mc        {} ({:.3} standard errors, {} of {} accepted, seed {})",
            verdict(m.passed),
            m.sigmas,
            m.samples_accepted,
            m.samples_total,
            i.seed
        )?;
    }
    writeln!(w, "result    {}", verdict(o.passed))?;
    Ok(())
}

fn verdict(passed: bool) -> &'static str {
    if passed { "PASS" } else { "FAIL" }
}
