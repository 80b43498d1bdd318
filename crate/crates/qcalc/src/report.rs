//! Check results and run reports emitted by the verification suites and the
//! CLI. Timing is tracked in-process but never serialized, so emitted
//! reports are byte-stable for fixed inputs and seed.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Check {
    pub fn pass(name: impl Into<String>) -> Self {
        Check { name: name.into(), status: Status::Pass, witness: None }
    }

    pub fn fail(name: impl Into<String>, witness: impl Into<String>) -> Self {
        Check { name: name.into(), status: Status::Fail, witness: Some(witness.into()) }
    }

    /// Pass/fail from a predicate, attaching the witness only on failure.
    pub fn expect(name: impl Into<String>, ok: bool, witness: impl FnOnce() -> String) -> Self {
        if ok {
            Self::pass(name)
        } else {
            Self::fail(name, witness())
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.status {
            Status::Pass => write!(f, "PASS {}", self.name),
            Status::Fail => {
                write!(f, "FAIL {}", self.name)?;
                if let Some(w) = &self.witness {
                    write!(f, ": {w}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing, default)]
    pub timing_ms: u128,
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> Self {
        RunReport {
            command: command.into(),
            params: BTreeMap::new(),
            checks: Vec::new(),
            timing_ms: 0,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_constructors() {
        let p = Check::pass("a");
        assert!(p.passed());
        assert_eq!(p.to_string(), "PASS a");
        let f = Check::fail("b", "got 1");
        assert!(!f.passed());
        assert_eq!(f.to_string(), "FAIL b: got 1");
        assert!(Check::expect("c", true, || unreachable!()).passed());
        assert!(!Check::expect("d", false, || "w".to_string()).passed());
    }

    #[test]
    fn report_round_trips_through_json() {
        let mut r = RunReport::new("verify nilpotency").param("N", 3).param("n", 2);
        r.checks.push(Check::pass("trial 0"));
        r.checks.push(Check::fail("trial 1", "nonzero form"));
        assert!(!r.all_passed());
        r.timing_ms = 42;
        let s = r.to_json();
        let back: RunReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back.command, r.command);
        assert_eq!(back.checks, r.checks);
        // witness field is omitted when absent; timing never serializes
        assert!(!s.contains("\"witness\": null"));
        assert!(!s.contains("timing_ms"));
        assert_eq!(back.timing_ms, 0);
    }
}
