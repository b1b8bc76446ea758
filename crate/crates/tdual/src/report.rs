//! Verdict reports shared by the checkers and the CLI.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub verdict: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub case: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(case: impl Into<String>) -> Self {
        Report { case: case.into(), checks: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, verdict: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), verdict, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Appends every check of `other`, prefixing names with `prefix/`.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for c in other.checks {
            self.checks.push(Check { name: format!("{prefix}/{}", c.name), ..c });
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.case);
        for c in &self.checks {
            let v = if c.verdict { "pass" } else { "FAIL" };
            if c.detail.is_empty() {
                s.push_str(&format!("  [{v}] {}\n", c.name));
            } else {
                s.push_str(&format!("  [{v}] {}: {}\n", c.name, c.detail));
            }
        }
        s
    }
}
