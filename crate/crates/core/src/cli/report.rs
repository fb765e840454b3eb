//! Command reports: plain text or the stable JSON schema
//! `{command, inputs, result, verdicts, exact}`.

use serde_json::{json, Map, Value};

use crate::opalgebra::Q;

/// Exact rationals always travel as `"p/q"` strings.
pub fn rat(c: &Q) -> Value {
    Value::String(format!("{}/{}", c.numer(), c.denom()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub inputs: Map<String, Value>,
    pub result: Value,
    /// Human-readable body for text mode.
    pub lines: Vec<String>,
    pub verdicts: Vec<Verdict>,
    pub exact: bool,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            command: command.to_string(),
            inputs: Map::new(),
            result: Value::Null,
            lines: Vec::new(),
            verdicts: Vec::new(),
            exact: true,
        }
    }

    pub fn input(mut self, key: &str, value: impl Into<Value>) -> Report {
        self.inputs.insert(key.to_string(), value.into());
        self
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    pub fn verdict(&mut self, name: &str, passed: bool, detail: Option<String>) {
        self.verdicts.push(Verdict { name: name.to_string(), passed, detail });
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn to_json(&self) -> Value {
        let verdicts: Vec<Value> = self
            .verdicts
            .iter()
            .map(|v| json!({"name": v.name, "passed": v.passed, "detail": v.detail}))
            .collect();
        json!({
            "command": self.command,
            "inputs": Value::Object(self.inputs.clone()),
            "result": self.result,
            "verdicts": verdicts,
            "exact": self.exact,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        for v in &self.verdicts {
            let tag = if v.passed { "PASS" } else { "FAIL" };
            match &v.detail {
                Some(d) => out.push_str(&format!("{tag} {}: {d}\n", v.name)),
                None => out.push_str(&format!("{tag} {}\n", v.name)),
            }
        }
        out
    }
}
