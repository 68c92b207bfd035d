//! Structured verification results.
//!
//! A [`Report`] serializes to the JSON layout
//! `{theorem, config, verdict, constants, grid_sizes, seeds, tolerances, checks, notes}`.
//! Maps are `BTreeMap`s so that identical inputs produce byte-identical output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const TORUS_NOTE: &str =
    "domain: 2π-periodic torus with integer lattice frequencies used as the surrogate for R^n";
pub const SAMPLING_NOTE: &str =
    "sampled margins refute or lower-bound the true constant; they never certify it";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Combine two verdicts: any failure wins, then any inconclusive.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    pub fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 3,
        }
    }
}

/// One named judgement inside a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The module invariant the value was judged against.
    pub invariant: String,
    pub value: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub theorem: String,
    pub config: serde_json::Value,
    pub verdict: Verdict,
    pub constants: BTreeMap<String, f64>,
    pub grid_sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(theorem: impl Into<String>) -> Self {
        Report {
            theorem: theorem.into(),
            config: serde_json::Value::Null,
            verdict: Verdict::Pass,
            constants: BTreeMap::new(),
            grid_sizes: Vec::new(),
            seeds: Vec::new(),
            tolerances: BTreeMap::new(),
            checks: Vec::new(),
            notes: vec![TORUS_NOTE.to_string()],
        }
    }

    pub fn with_config(mut self, config: serde_json::Value) -> Self {
        self.config = config;
        self
    }

    pub fn constant(&mut self, name: impl Into<String>, value: f64) {
        self.constants.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.constants.get(name).copied()
    }

    pub fn note(&mut self, note: impl Into<String>) {
        let note = note.into();
        if !self.notes.contains(&note) {
            self.notes.push(note);
        }
    }

    /// Record a check and fold its verdict into the report verdict.
    pub fn check(
        &mut self,
        name: impl Into<String>,
        invariant: impl Into<String>,
        value: f64,
        tolerance: f64,
        verdict: Verdict,
    ) -> Verdict {
        let name = name.into();
        self.tolerances.insert(name.clone(), tolerance);
        self.checks.push(Check {
            name,
            invariant: invariant.into(),
            value,
            tolerance,
            verdict,
        });
        self.verdict = self.verdict.and(verdict);
        verdict
    }

    /// Merge another report's checks and constants under a prefix.
    pub fn absorb(&mut self, prefix: &str, other: &Report) {
        for (k, v) in &other.constants {
            self.constants.insert(format!("{prefix}.{k}"), *v);
        }
        for (k, v) in &other.tolerances {
            self.tolerances.insert(format!("{prefix}.{k}"), *v);
        }
        for c in &other.checks {
            let mut c = c.clone();
            c.name = format!("{prefix}.{}", c.name);
            self.checks.push(c);
        }
        for n in &other.notes {
            self.note(n.clone());
        }
        for g in &other.grid_sizes {
            if !self.grid_sizes.contains(g) {
                self.grid_sizes.push(*g);
            }
        }
        for s in &other.seeds {
            if !self.seeds.contains(s) {
                self.seeds.push(*s);
            }
        }
        self.verdict = self.verdict.and(other.verdict);
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_folding() {
        use Verdict::*;
        assert_eq!(Pass.and(Pass), Pass);
        assert_eq!(Pass.and(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.and(Fail), Fail);
    }

    #[test]
    fn json_is_stable() {
        let mut r = Report::new("demo");
        r.constant("b", 2.0);
        r.constant("a", 1.0);
        r.check("x", "inv", 0.5, 1.0, Verdict::Pass);
        let a = r.to_json();
        let b = r.clone().to_json();
        assert_eq!(a, b);
        assert!(a.find("\"a\"").unwrap() < a.find("\"b\"").unwrap());
        let back: Report = serde_json::from_str(&a).unwrap();
        assert_eq!(back, r);
    }
}
