use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Verified,
    Falsified,
    Inconclusive,
}

/// Outcome of a numerical check, with a short human-readable reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub evidence: String,
}

impl Verdict {
    pub fn verified(evidence: impl Into<String>) -> Self {
        Verdict { status: Status::Verified, evidence: evidence.into() }
    }

    pub fn falsified(evidence: impl Into<String>) -> Self {
        Verdict { status: Status::Falsified, evidence: evidence.into() }
    }

    pub fn inconclusive(evidence: impl Into<String>) -> Self {
        Verdict { status: Status::Inconclusive, evidence: evidence.into() }
    }

    pub fn is_verified(&self) -> bool {
        self.status == Status::Verified
    }

    pub fn is_falsified(&self) -> bool {
        self.status == Status::Falsified
    }

    pub fn is_inconclusive(&self) -> bool {
        self.status == Status::Inconclusive
    }
}
