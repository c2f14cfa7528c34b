//! Canonical JSON reports.

use serde_json::{Map, Value};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Fail,
    Inconclusive,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub instance_digest: Option<String>,
    pub results: Value,
    pub status: Status,
    pub seed: Option<u64>,
    /// Wall-clock time; only recorded on request so that reports stay reproducible.
    pub timing_ms: Option<u128>,
}

impl Report {
    pub fn new(command: &str, results: Value, status: Status) -> Self {
        Self { command: command.to_string(), instance_digest: None, results, status, seed: None, timing_ms: None }
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::from(self.command.clone()));
        m.insert("instance_digest".into(), self.instance_digest.clone().map_or(Value::Null, Value::from));
        m.insert("results".into(), self.results.clone());
        m.insert("seed".into(), self.seed.map_or(Value::Null, Value::from));
        m.insert("status".into(), Value::from(self.status.as_str()));
        m.insert("tool_version".into(), Value::from(TOOL_VERSION));
        if let Some(t) = self.timing_ms {
            m.insert("timing_ms".into(), Value::from(t as u64));
        }
        Value::Object(m)
    }

    /// Sorted keys, two-space indentation, trailing newline. Big integers
    /// and rationals are carried as strings, so number formatting is fixed.
    pub fn to_canonical_string(&self) -> String {
        canonical(&self.to_value())
    }
}

pub fn canonical(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&sort(v)).expect("serialisable");
    s.push('\n');
    s
}

// serde_json's map is ordered already unless `preserve_order` gets enabled
// somewhere in the dependency graph; sort explicitly so that cannot matter.
fn sort(v: &Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            Value::Object(keys.into_iter().map(|k| (k.clone(), sort(&m[k]))).collect())
        }
        Value::Array(a) => Value::Array(a.iter().map(sort).collect()),
        _ => v.clone(),
    }
}
