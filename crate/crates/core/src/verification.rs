//! Outcome records shared by every checker.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};

use crate::qlaurent::{EvalValue, ExponentVector, LaurentPoly};

/// One side of a comparison: either a polynomial or an exact evaluated value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Side {
    Poly(LaurentPoly),
    Value(EvalValue),
}

impl Side {
    fn to_json(&self) -> Value {
        match self {
            Side::Poly(p) => json!({ "kind": "poly", "terms": p }),
            Side::Value(v) => json!({ "kind": "value", "a": v.one.to_string(), "b": v.omega.to_string() }),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Poly(p) => write!(f, "{p}"),
            Side::Value(v) => write!(f, "{v}"),
        }
    }
}

impl From<LaurentPoly> for Side {
    fn from(p: LaurentPoly) -> Self {
        Side::Poly(p)
    }
}

impl From<EvalValue> for Side {
    fn from(v: EvalValue) -> Self {
        Side::Value(v)
    }
}

/// The first place two sides disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// Exponent of the first differing term, for polynomial sides.
    pub exponent: Option<ExponentVector>,
    pub lhs: String,
    pub rhs: String,
}

impl Witness {
    fn to_json(&self) -> Value {
        let mut v = json!({ "lhs": self.lhs, "rhs": self.rhs });
        if let Some(e) = self.exponent {
            v["eq"] = json!(e.eq);
            v["ep"] = json!(e.ep);
            v["ez"] = json!(e.ez);
        }
        v
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exponent {
            Some(e) => write!(
                f,
                "at q^{} p^{} z^{}: lhs coefficient {}, rhs coefficient {}",
                e.eq, e.ep, e.ez, self.lhs, self.rhs
            ),
            None => write!(f, "lhs {} vs rhs {}", self.lhs, self.rhs),
        }
    }
}

/// A single asserted equality `lhs = rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub label: String,
    pub lhs: Side,
    pub rhs: Side,
}

impl Comparison {
    pub fn new(label: impl Into<String>, lhs: impl Into<Side>, rhs: impl Into<Side>) -> Self {
        Self {
            label: label.into(),
            lhs: lhs.into(),
            rhs: rhs.into(),
        }
    }

    pub fn holds(&self) -> bool {
        match (&self.lhs, &self.rhs) {
            (Side::Poly(a), Side::Poly(b)) => (a - b).is_zero(),
            (Side::Value(a), Side::Value(b)) => a == b,
            _ => false,
        }
    }

    pub fn witness(&self) -> Option<Witness> {
        if self.holds() {
            return None;
        }
        match (&self.lhs, &self.rhs) {
            (Side::Poly(a), Side::Poly(b)) => {
                let diff = a - b;
                let (e, _) = diff.terms().next()?;
                Some(Witness {
                    exponent: Some(*e),
                    lhs: a.coeff(e).to_string(),
                    rhs: b.coeff(e).to_string(),
                })
            }
            (lhs, rhs) => Some(Witness {
                exponent: None,
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Verified,
    Failed,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Verified => "verified",
            Status::Failed => "failed",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one identity check at one parameter point. The result is
/// verified exactly when every comparison holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationResult {
    pub identity: String,
    pub params: Vec<(String, i64)>,
    pub comparisons: Vec<Comparison>,
    /// Diagnostics that are reported but not asserted.
    pub notes: BTreeMap<String, String>,
}

impl VerificationResult {
    pub fn new(identity: impl Into<String>, params: &[(&str, i64)]) -> Self {
        Self {
            identity: identity.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            comparisons: Vec::new(),
            notes: BTreeMap::new(),
        }
    }

    pub fn with(mut self, c: Comparison) -> Self {
        self.comparisons.push(c);
        self
    }

    pub fn push(&mut self, c: Comparison) {
        self.comparisons.push(c);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.notes.insert(key.into(), value.to_string());
    }

    pub fn status(&self) -> Status {
        if self.comparisons.iter().all(Comparison::holds) {
            Status::Verified
        } else {
            Status::Failed
        }
    }

    pub fn is_verified(&self) -> bool {
        self.status() == Status::Verified
    }

    /// The first failing comparison and where it fails.
    pub fn witness(&self) -> Option<(&str, Witness)> {
        self.comparisons
            .iter()
            .find_map(|c| c.witness().map(|w| (c.label.as_str(), w)))
    }

    pub fn param(&self, name: &str) -> Option<i64> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn params_label(&self) -> String {
        self.params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// JSON form; the compared sides are embedded on failure or when
    /// `include_sides` is set.
    pub fn to_json(&self, include_sides: bool) -> Value {
        let status = self.status();
        let comparisons: Vec<Value> = self
            .comparisons
            .iter()
            .map(|c| {
                let holds = c.holds();
                let mut v = json!({
                    "label": c.label,
                    "status": if holds { "verified" } else { "failed" },
                });
                if include_sides || !holds {
                    v["lhs"] = c.lhs.to_json();
                    v["rhs"] = c.rhs.to_json();
                }
                v
            })
            .collect();
        let params: Vec<Value> = self
            .params
            .iter()
            .map(|(k, v)| json!({ "name": k, "value": v }))
            .collect();
        json!({
            "identity": self.identity,
            "params": params,
            "status": status.as_str(),
            "comparisons": comparisons,
            "witness": self.witness().map(|(label, w)| {
                let mut v = w.to_json();
                v["label"] = json!(label);
                v
            }),
            "notes": self.notes,
        })
    }
}

impl fmt::Display for VerificationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.status(), self.identity)?;
        if !self.params.is_empty() {
            write!(f, " {}", self.params_label())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eisenstein::EisensteinInt;
    use crate::qlaurent::Var;

    #[test]
    fn status_tracks_difference() {
        let a = LaurentPoly::q() + LaurentPoly::one();
        let ok = VerificationResult::new("demo", &[("n", 1)]).with(Comparison::new("same", a.clone(), a.clone()));
        assert!(ok.is_verified());
        assert!(ok.witness().is_none());

        let b = LaurentPoly::q() + LaurentPoly::var_pow(Var::Q, -1);
        let bad = ok.clone().with(Comparison::new("off", a, b));
        assert_eq!(bad.status(), Status::Failed);
        let (label, w) = bad.witness().unwrap();
        assert_eq!(label, "off");
        assert_eq!(w.exponent, Some(ExponentVector::new(-1, 0, 0)));
        assert_eq!(w.lhs, "0");
        assert_eq!(w.rhs, "1");
    }

    #[test]
    fn json_embeds_sides_only_when_needed() {
        let a = LaurentPoly::constant(EisensteinInt::omega());
        let ok = VerificationResult::new("demo", &[]).with(Comparison::new("c", a.clone(), a.clone()));
        let v = ok.to_json(false);
        assert!(v["comparisons"][0].get("lhs").is_none());
        assert_eq!(ok.to_json(true)["comparisons"][0]["lhs"]["terms"][0]["b"], "1");
        let bad = VerificationResult::new("demo", &[]).with(Comparison::new("c", a, LaurentPoly::zero()));
        let v = bad.to_json(false);
        assert_eq!(v["status"], "failed");
        assert_eq!(v["witness"]["label"], "c");
        assert_eq!(v["comparisons"][0]["rhs"]["terms"], json!([]));
    }
}
