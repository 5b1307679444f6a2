use thiserror::Error;

use crate::model::DomainIndex;

pub type Result<T> = std::result::Result<T, Error>;

/// Hypotheses of the return-map theorem that a cycle can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    Alignment,
    AllVariablesSwitch,
}

impl std::fmt::Display for Assumption {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Assumption::Alignment => f.write_str("alignment"),
            Assumption::AllVariablesSwitch => f.write_str("not all variables switch"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("duplicate variable name {0:?}")]
    DuplicateVariable(String),
    #[error("non-increasing thresholds for variable {0:?}")]
    NonIncreasingThresholds(String),
    #[error("invalid parameter for variable {variable:?}: {reason}")]
    InvalidParameter { variable: String, reason: String },
    #[error(
        "autoregulation detected on variable {variable:?}: black wall between {below} and {above} \
         requires sliding-mode dynamics"
    )]
    Autoregulation {
        variable: String,
        below: DomainIndex,
        above: DomainIndex,
    },
    #[error("invalid domain {0}")]
    InvalidDomain(String),
    #[error("state has wrong dimension: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("on threshold: coordinate {variable} equals threshold {threshold}")]
    OnThreshold { variable: usize, threshold: f64 },
    #[error("state outside the bounded box in coordinate {0}")]
    OutsideBox(usize),
    #[error("interior equilibrium: domain {0} has no escaping direction")]
    InteriorEquilibrium(DomainIndex),
    #[error("codimension-2 exit from domain {domain}: directions {first} and {second} tie")]
    Codimension2Exit {
        domain: DomainIndex,
        first: usize,
        second: usize,
    },
    #[error("wall-normal degeneracy in domain {domain}, direction {direction}")]
    WallNormalDegeneracy { domain: DomainIndex, direction: usize },
    #[error("orbit leaves cycle at step {step}: expected exit {expected}, realized {realized}")]
    OrbitLeavesCycle {
        step: usize,
        expected: usize,
        realized: usize,
    },
    #[error("assumption violated: {0}")]
    AssumptionViolated(Assumption),
    #[error("max iterations exceeded ({0})")]
    MaxIterations(usize),
    #[error("insufficient crossings: found {0}, need at least 3")]
    InsufficientCrossings(usize),
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
