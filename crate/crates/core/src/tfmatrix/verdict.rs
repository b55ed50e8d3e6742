use std::fmt;

use serde::{Deserialize, Serialize};

use crate::polyrat::{Root, RootSet};
use crate::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Stable,
    Unstable,
    /// Every offending pole lies within the marginal band around the imaginary axis.
    Marginal,
    /// The test's premises do not hold, so it decides nothing.
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Stable => "Stable",
            Status::Unstable => "Unstable",
            Status::Marginal => "Marginal",
            Status::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

/// Stability decision with the closed-right-half-plane poles that justify it.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub witness_poles: RootSet,
    pub method: String,
}

impl Verdict {
    /// Classifies closed-loop poles. Poles with `Re > -marginal` become witnesses.
    pub fn from_poles(poles: &RootSet, tol: &Tolerances, method: &str) -> Self {
        let witnesses = poles.filter(|r| r.z.re > -tol.marginal);
        let status = if witnesses.is_empty() {
            Status::Stable
        } else if witnesses.iter().all(|r| r.z.re <= tol.marginal) {
            Status::Marginal
        } else {
            Status::Unstable
        };
        Self { status, witness_poles: witnesses, method: method.to_string() }
    }

    pub fn stable(method: &str) -> Self {
        Self { status: Status::Stable, witness_poles: RootSet::empty(), method: method.to_string() }
    }

    pub fn inconclusive(method: &str) -> Self {
        Self {
            status: Status::Inconclusive,
            witness_poles: RootSet::empty(),
            method: method.to_string(),
        }
    }

    pub fn is_stable(&self) -> bool {
        self.status == Status::Stable
    }

    pub fn witnesses(&self) -> &[Root] {
        self.witness_poles.roots()
    }
}
