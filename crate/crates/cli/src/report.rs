//! Report document emitted by every command.
//!
//! Reports are deterministic for fixed inputs, flags, and seed: maps are
//! ordered, floats are printed as 17-significant-digit decimal strings, +∞
//! serializes as the string `"inf"`, and wall time is only recorded when
//! `--timing` is given.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::formats::format_f64;

#[derive(Debug, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<InputRecord>,
    pub tolerances: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub results: Value,
    pub wall_time_ms: Option<u64>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            inputs: Vec::new(),
            tolerances: BTreeMap::new(),
            seed: None,
            results: Value::Null,
            wall_time_ms: None,
        }
    }

    pub fn record_input(&mut self, path: &str, bytes: &[u8]) {
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        let digest = hasher.finalize();
        let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect::<String>();
        self.inputs.push(InputRecord { path: path.to_string(), sha256 });
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.to_string(), num(value));
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn emit(&self, out: Option<&std::path::Path>) -> std::io::Result<()> {
        let rendered = self.render();
        match out {
            Some(path) => std::fs::write(path, rendered),
            None => std::io::stdout().write_all(rendered.as_bytes()),
        }
    }
}

/// A float as a JSON value: decimal string, or `"inf"` for +∞.
pub fn num(x: f64) -> Value {
    if x.is_infinite() && x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String(format_f64(x))
    }
}

/// A float tagged with the tolerance it was certified under.
pub fn certified(value: f64, tol: f64) -> Value {
    json!({ "value": num(value), "tolerance": num(tol) })
}
