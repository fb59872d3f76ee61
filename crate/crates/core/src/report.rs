//! Verdict-carrying reports shared by checkers and the command line.

use serde::{Deserialize, Serialize};

use crate::rational::{self, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    HypothesisNotMet,
    Unknown,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Fail dominates unknown, which dominates pass.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (HypothesisNotMet, _) | (_, HypothesisNotMet) => HypothesisNotMet,
            (Fail, _) | (_, Fail) => Fail,
            (Unknown, _) | (_, Unknown) => Unknown,
            _ => Pass,
        }
    }
}

/// One named check inside a report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, ok: bool, detail: Option<String>) -> Self {
        Check { name: name.into(), verdict: Verdict::from_bool(ok), detail }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub verdict: Verdict,
    #[serde(default, with = "rational::serde_q_opt", skip_serializing_if = "Option::is_none")]
    pub lhs: Option<Q>,
    #[serde(default, with = "rational::serde_q_opt", skip_serializing_if = "Option::is_none")]
    pub bound: Option<Q>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Report {
    pub fn from_checks(checks: Vec<Check>) -> Self {
        let verdict = checks.iter().fold(Verdict::Pass, |v, c| v.combine(c.verdict));
        Report { verdict, lhs: None, bound: None, checks, note: None }
    }

    /// `lhs <= bound`.
    pub fn inequality(lhs: Q, bound: Q) -> Self {
        Report {
            verdict: Verdict::from_bool(lhs <= bound),
            lhs: Some(lhs),
            bound: Some(bound),
            checks: vec![],
            note: None,
        }
    }

    pub fn hypothesis_not_met(reason: impl Into<String>) -> Self {
        Report { verdict: Verdict::HypothesisNotMet, lhs: None, bound: None, checks: vec![], note: Some(reason.into()) }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}
