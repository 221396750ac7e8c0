use serde::Serialize;

use crate::error::PointRef;

/// Points plus an explanation; used both for counterexamples and for
/// positive witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub points: Vec<PointRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
    pub explanation: String,
}

impl Counterexample {
    pub fn new(points: Vec<PointRef>, explanation: impl Into<String>) -> Self {
        Counterexample {
            points,
            agent: None,
            explanation: explanation.into(),
        }
    }

    pub fn with_agent(mut self, agent: impl Into<String>) -> Self {
        self.agent = Some(agent.into());
        self
    }
}

/// Outcome of checking one claim. `counterexample` is present iff `holds`
/// is false.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub claim: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Counterexample>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn pass(claim: impl Into<String>) -> Self {
        VerificationReport {
            claim: claim.into(),
            holds: true,
            counterexample: None,
            witness: None,
            notes: Vec::new(),
        }
    }

    pub fn fail(claim: impl Into<String>, cx: Counterexample) -> Self {
        VerificationReport {
            claim: claim.into(),
            holds: false,
            counterexample: Some(cx),
            witness: None,
            notes: Vec::new(),
        }
    }

    pub fn with_witness(mut self, w: Counterexample) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}
