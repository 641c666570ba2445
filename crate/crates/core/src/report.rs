//! Structured pass/fail records produced by every checker.

use serde::{Deserialize, Serialize};

/// One measured defect inside a [`ConditionReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub check: String,
    pub value: f64,
    #[serde(skip, default = "default_ok")]
    pub ok: bool,
    /// Target value for checks recorded with [`ConditionReport::record_expected`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    /// Informational entries carry no verdict.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub info: bool,
}

fn default_ok() -> bool {
    true
}

/// Outcome of a named condition: overall verdict, every measured defect and
/// free-form notes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub name: String,
    pub pass: bool,
    pub defects: Vec<Defect>,
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), pass: true, defects: Vec::new(), notes: Vec::new() }
    }

    /// Records `value` and fails the report when it exceeds `limit`.
    pub fn record(&mut self, check: impl Into<String>, value: f64, limit: f64) -> bool {
        let ok = value.is_finite() && value <= limit;
        self.push(check.into(), value, ok)
    }

    /// Records a measured quantity that must match `expected` within `tol`.
    pub fn record_expected(&mut self, check: impl Into<String>, value: f64, expected: f64, tol: f64) -> bool {
        let ok = (value - expected).abs() <= tol;
        let check = check.into();
        self.notes.push(format!("{check}: expected {expected:e}"));
        let held = self.push(check, value, ok);
        if let Some(d) = self.defects.last_mut() {
            d.expected = Some(expected);
        }
        held
    }

    /// Records a boolean sub-verdict, stored as defect 0 (holds) or 1 (fails).
    pub fn record_flag(&mut self, check: impl Into<String>, holds: bool) -> bool {
        self.push(check.into(), if holds { 0.0 } else { 1.0 }, holds)
    }

    /// Records an informational value that never affects the verdict.
    pub fn record_info(&mut self, check: impl Into<String>, value: f64) {
        self.defects.push(Defect { check: check.into(), value, ok: true, expected: None, info: true });
    }

    fn push(&mut self, check: String, value: f64, ok: bool) -> bool {
        if !ok {
            self.pass = false;
            self.notes.push(format!("failed: {check}"));
        }
        self.defects.push(Defect { check, value, ok, expected: None, info: false });
        ok
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Folds another report in, prefixing its check names.
    pub fn absorb(&mut self, other: &ConditionReport) {
        for d in &other.defects {
            self.defects.push(Defect {
                check: format!("{}/{}", other.name, d.check),
                value: d.value,
                ok: d.ok,
                expected: d.expected,
                info: d.info,
            });
        }
        for n in &other.notes {
            self.notes.push(format!("{}: {n}", other.name));
        }
        self.pass &= other.pass;
    }

    /// Largest defect among the checks bounded from above; informational
    /// and expected-value entries are skipped.
    pub fn max_defect(&self) -> f64 {
        self.defects.iter().filter(|d| !d.info && d.expected.is_none()).map(|d| d.value).fold(0.0, f64::max)
    }

    pub fn defect(&self, check: &str) -> Option<f64> {
        self.defects.iter().find(|d| d.check == check).map(|d| d.value)
    }

    /// Names of the checks that failed.
    pub fn failures(&self) -> Vec<&str> {
        self.defects.iter().filter(|d| !d.ok).map(|d| d.check.as_str()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_sets_verdict() {
        let mut r = ConditionReport::new("demo");
        assert!(r.record("small", 1e-12, 1e-9));
        assert!(r.pass);
        assert!(!r.record("large", 1.0, 1e-9));
        assert!(!r.pass);
        assert_eq!(r.failures(), vec!["large"]);
        assert!(!r.record("nan", f64::NAN, 1.0));
    }

    #[test]
    fn json_shape() {
        let mut r = ConditionReport::new("demo");
        r.record("x", 0.5, 1.0);
        r.note("hello");
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["name"], "demo");
        assert_eq!(v["pass"], true);
        assert_eq!(v["defects"][0]["check"], "x");
        assert_eq!(v["defects"][0]["value"], 0.5);
        assert!(v["defects"][0].get("ok").is_none());
        assert_eq!(v["notes"][0], "hello");
        let back: ConditionReport = serde_json::from_value(v).unwrap();
        assert_eq!(back.defects[0].value, 0.5);
    }

    #[test]
    fn max_defect_skips_info_and_expected() {
        let mut r = ConditionReport::new("demo");
        r.record("x", 1e-12, 1e-9);
        r.record_info("samples", 200.0);
        r.record_expected("edge", 3.5, 3.5, 1e-10);
        assert!(r.pass);
        assert_eq!(r.max_defect(), 1e-12);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["defects"][1]["info"], true);
        assert_eq!(v["defects"][2]["expected"], 3.5);
        assert!(v["defects"][0].get("info").is_none());
    }

    #[test]
    fn absorb_prefixes_and_propagates() {
        let mut inner = ConditionReport::new("inner");
        inner.record("a", 2.0, 1.0);
        let mut outer = ConditionReport::new("outer");
        outer.absorb(&inner);
        assert!(!outer.pass);
        assert_eq!(outer.defects[0].check, "inner/a");
    }
}
