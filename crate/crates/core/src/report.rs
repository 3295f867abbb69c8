use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A sample point at which a condition was observed to fail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub note: String,
}

impl Witness {
    pub fn new(point: Vec<f64>, note: impl Into<String>) -> Self {
        Self {
            point,
            note: note.into(),
        }
    }
}

/// Verdict of a sampled condition check together with the constants it estimated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub id: String,
    pub pass: bool,
    pub constants: BTreeMap<String, f64>,
    pub witness: Option<Witness>,
    /// Names of the sub-conditions that failed, in the order they were checked.
    pub failures: Vec<String>,
}

impl ConditionReport {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            pass: true,
            constants: BTreeMap::new(),
            witness: None,
            failures: Vec::new(),
        }
    }

    pub fn constant(&mut self, name: &str, value: f64) {
        self.constants.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.constants.get(name).copied()
    }

    /// Records a failed sub-condition. The first witness is kept.
    pub fn fail(&mut self, what: &str, witness: Witness) {
        self.pass = false;
        self.failures.push(what.to_string());
        if self.witness.is_none() {
            self.witness = Some(witness);
        }
    }

    /// Folds another report in, prefixing its constants with `prefix.`.
    pub fn absorb(&mut self, prefix: &str, other: ConditionReport) {
        for (k, v) in other.constants {
            self.constants.insert(format!("{prefix}.{k}"), v);
        }
        for f in other.failures {
            self.failures.push(format!("{prefix}.{f}"));
        }
        if !other.pass {
            self.pass = false;
            if self.witness.is_none() {
                self.witness = other.witness;
            }
        }
    }
}
