//! Axiom-by-axiom verification reports.

use std::fmt;

use serde::Serialize;

use crate::blockalg::Witness;
use crate::scalars::Certified;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
    Skipped,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Indeterminate => "INDETERMINATE",
            Verdict::Skipped => "SKIPPED",
        };
        f.write_str(s)
    }
}

impl From<Certified> for Verdict {
    fn from(c: Certified) -> Verdict {
        match c {
            Certified::Positive => Verdict::Pass,
            Certified::NotPositive => Verdict::Fail,
            Certified::Indeterminate => Verdict::Indeterminate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Report {
        Report { title: title.into(), checks: Vec::new() }
    }

    /// Records an equality check from its residual witness.
    pub fn equality(&mut self, name: impl Into<String>, residual: Option<Witness>) -> &mut Report {
        let verdict = if residual.is_some() { Verdict::Fail } else { Verdict::Pass };
        self.checks.push(Check { name: name.into(), verdict, witness: residual, note: None });
        self
    }

    pub fn flag(&mut self, name: impl Into<String>, ok: bool, note: Option<String>) -> &mut Report {
        let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        self.checks.push(Check { name: name.into(), verdict, witness: None, note });
        self
    }

    pub fn push(&mut self, name: impl Into<String>, verdict: Verdict, note: Option<String>) -> &mut Report {
        self.checks.push(Check { name: name.into(), verdict, witness: None, note });
        self
    }

    /// Appends another report's checks as `prefix: name`.
    pub fn absorb(&mut self, prefix: &str, other: Report) -> &mut Report {
        for mut c in other.checks {
            c.name = format!("{prefix}: {}", c.name);
            self.checks.push(c);
        }
        self
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn verdict_of(&self, name: &str) -> Option<Verdict> {
        self.get(name).map(|c| c.verdict)
    }

    /// True when no check failed or was indeterminate.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| matches!(c.verdict, Verdict::Pass | Verdict::Skipped))
    }

    pub fn has_failure(&self) -> bool {
        self.checks.iter().any(|c| c.verdict == Verdict::Fail)
    }

    pub fn has_indeterminate(&self) -> bool {
        self.checks.iter().any(|c| c.verdict == Verdict::Indeterminate)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.verdict == Verdict::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "== {} ==", self.title)?;
        for c in &self.checks {
            write!(f, "{:<14} {}", c.verdict.to_string(), c.name)?;
            if let Some(w) = &c.witness {
                write!(f, "  [{w}]")?;
            }
            if let Some(n) = &c.note {
                write!(f, "  ({n})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_aggregate() {
        let mut r = Report::new("t");
        r.flag("a", true, None).push("b", Verdict::Skipped, None);
        assert!(r.passed());
        r.push("c", Verdict::Indeterminate, None);
        assert!(!r.passed() && !r.has_failure() && r.has_indeterminate());
        r.equality("d", Some(Witness { block: vec!["x".into()], row: 0, col: 1, magnitude: 2.0 }));
        assert!(r.has_failure());
        assert_eq!(r.failures().count(), 1);
        assert!(r.to_string().contains("FAIL"));
        assert!(r.to_json().contains("\"fail\""));
    }
}
