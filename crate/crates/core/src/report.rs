//! Verification reports: named checks with measured values and thresholds.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    /// Headline measurement compared against `threshold`.
    pub measured: f64,
    pub threshold: f64,
    /// What the check reproduces, in words.
    pub anchor: String,
    /// Secondary measurements.
    pub values: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    /// Wall-clock seconds; not serialised so reports stay reproducible.
    #[serde(skip)]
    pub elapsed: Option<f64>,
}

impl Check {
    pub fn new(id: u32, name: impl Into<String>, anchor: impl Into<String>) -> Self {
        Check {
            id,
            name: name.into(),
            passed: true,
            measured: 0.0,
            threshold: 0.0,
            anchor: anchor.into(),
            values: BTreeMap::new(),
            notes: Vec::new(),
            elapsed: None,
        }
    }

    /// Set the headline measurement; the check fails if it exceeds
    /// `threshold` or is not finite.
    pub fn headline(&mut self, measured: f64, threshold: f64) {
        self.measured = measured;
        self.threshold = threshold;
        self.passed &= measured.is_finite() && measured <= threshold;
    }

    /// Record a secondary value checked against `≤ threshold`.
    pub fn bound(&mut self, key: &str, value: f64, threshold: f64) {
        self.values.insert(key.to_string(), value);
        if !(value.is_finite() && value <= threshold) {
            self.passed = false;
            self.notes.push(format!("{key} = {value:e} exceeds {threshold:e}"));
        }
    }

    /// Record a boolean requirement.
    pub fn require(&mut self, what: &str, ok: bool) {
        if !ok {
            self.passed = false;
            self.notes.push(format!("failed: {what}"));
        }
    }

    pub fn value(&mut self, key: &str, value: f64) {
        self.values.insert(key.to_string(), value);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// A check that could not run because an operation failed.
    pub fn errored(mut self, err: &crate::Error) -> Self {
        self.passed = false;
        self.measured = f64::NAN;
        self.notes.push(format!("error: {err}"));
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion {:>2} {}: measured {:.3e} (threshold {:.1e}) [{}]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.threshold,
            self.anchor
        )?;
        if let Some(t) = self.elapsed {
            write!(f, " in {t:.2}s")?;
        }
        for n in &self.notes {
            write!(f, "\n    {n}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new(seed: u64, checks: Vec<Check>) -> Self {
        VerificationReport {
            seed,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_status_and_bounds() {
        let mut c = Check::new(1, "a", "anchor");
        c.headline(1e-9, 1e-8);
        assert!(c.passed);
        c.bound("x", 2.0, 1.0);
        assert!(!c.passed);
        let mut ok = Check::new(2, "b", "anchor");
        ok.headline(0.0, 1.0);
        let r = VerificationReport::new(3, vec![c, ok.clone()]);
        assert!(!r.passed);
        assert_eq!(r.failed().count(), 1);
        assert!(VerificationReport::new(3, vec![ok]).passed);
        let mut nan = Check::new(4, "nan", "a");
        nan.headline(f64::NAN, 1.0);
        assert!(!nan.passed);
    }

    #[test]
    fn elapsed_is_not_serialised() {
        let mut c = Check::new(1, "a", "anchor");
        c.elapsed = Some(1.5);
        let s = serde_json::to_string(&c).unwrap();
        assert!(!s.contains("elapsed"));
        assert!(c.to_string().starts_with("PASS"));
    }
}
