use std::collections::BTreeMap;

use qprove_core::VerificationResult;
use serde_json::{json, Value};

/// Everything a run produced, in the order the parameters were given.
pub struct RunReport {
    pub command: String,
    pub results: Vec<VerificationResult>,
    pub seed: Option<u64>,
    pub elapsed_millis: u64,
    pub extras: BTreeMap<String, Value>,
}

impl RunReport {
    pub fn new(command: String, results: Vec<VerificationResult>) -> Self {
        Self {
            command,
            results,
            seed: None,
            elapsed_millis: 0,
            extras: BTreeMap::new(),
        }
    }

    pub fn success(&self) -> bool {
        self.results.iter().all(VerificationResult::is_verified)
    }

    pub fn verified_count(&self) -> usize {
        self.results.iter().filter(|r| r.is_verified()).count()
    }

    pub fn to_json(&self, include_sides: bool) -> Value {
        let results: Vec<Value> = self.results.iter().map(|r| r.to_json(include_sides)).collect();
        json!({
            "tool_version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "results": results,
            "seed": self.seed,
            "elapsed_millis": self.elapsed_millis,
            "success": self.success(),
            "extras": self.extras,
        })
    }
}
