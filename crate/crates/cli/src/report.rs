use std::fmt;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub witness: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, witness: Value) -> Self {
        Check {
            name: name.into(),
            status: if passed { Status::Pass } else { Status::Fail },
            witness,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub elapsed_ms: u128,
}

/// Everything a run produces. Apart from `timing`, identical configurations
/// give identical reports.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: Value,
    pub checks: Vec<Check>,
    /// Computed artifacts and observations that are not pass/fail checks.
    pub findings: Value,
    pub timing: Timing,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!("{} {}\n", c.status, c.name));
        }
        let failed = self.checks.iter().filter(|c| c.status == Status::Fail).count();
        out.push_str(&format!(
            "{} checks, {} passed, {} failed ({} ms)\n",
            self.checks.len(),
            self.checks.len() - failed,
            failed,
            self.timing.elapsed_ms
        ));
        out
    }
}
