use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// One pass/fail comparison `measured ≤ tolerance` (or a boolean condition
/// reported with tolerance 0).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), pass: measured <= tolerance, measured, tolerance }
    }

    /// A condition without a numeric margin; `measured` is 1 when it holds.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), pass: ok, measured: if ok { 1.0 } else { 0.0 }, tolerance: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub outputs: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub version: String,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            checks: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn input(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.inputs.insert(key.to_string(), v.into());
        self
    }

    pub fn output(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.outputs.insert(key.to_string(), v.into());
        self
    }

    pub fn check(&mut self, c: Check) -> &mut Self {
        self.checks.push(c);
        self
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn all_pass(&self) -> bool {
        self.failures() == 0
    }

    pub fn output_f64(&self, key: &str) -> Option<f64> {
        self.outputs.get(key).and_then(Value::as_f64)
    }

    /// Pretty-printed JSON with keys sorted at every level.
    pub fn to_json(&self) -> String {
        // serde_json's default map is ordered, so a round trip through Value sorts keys
        let v = serde_json::to_value(self).expect("reports contain only serializable data");
        serde_json::to_string_pretty(&v).expect("values serialize") + "\n"
    }
}
