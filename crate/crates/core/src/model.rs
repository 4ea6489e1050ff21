//! Model family: coupling kind, coupling strength and boundary cases.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How the wave and heat fields exchange energy.
///
/// `Strong` couples through spatial derivatives of the temperature and the
/// strain rate; `Weak` couples through the zeroth-order fields themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingKind {
    Strong,
    Weak,
}

impl std::fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CouplingKind::Strong => write!(f, "strong"),
            CouplingKind::Weak => write!(f, "weak"),
        }
    }
}

/// Boundary conditions at x = 0 and x = pi. The first letter is the
/// displacement condition, the second the temperature condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryCase {
    /// u = 0, theta = 0
    DD,
    /// u = 0, d_x theta = 0
    DN,
    /// d_x u = 0, theta = 0
    ND,
    /// d_x u = 0, d_x theta = 0
    NN,
}

impl BoundaryCase {
    pub const ALL: [BoundaryCase; 4] = [
        BoundaryCase::DD,
        BoundaryCase::DN,
        BoundaryCase::ND,
        BoundaryCase::NN,
    ];

    /// Displacement end condition is Dirichlet (clamped).
    pub fn displacement_dirichlet(self) -> bool {
        matches!(self, BoundaryCase::DD | BoundaryCase::DN)
    }

    /// Temperature end condition is Dirichlet (held at reference).
    pub fn temperature_dirichlet(self) -> bool {
        matches!(self, BoundaryCase::DD | BoundaryCase::ND)
    }
}

impl std::fmt::Display for BoundaryCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BoundaryCase::DD => "DD",
            BoundaryCase::DN => "DN",
            BoundaryCase::ND => "ND",
            BoundaryCase::NN => "NN",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for BoundaryCase {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "DD" => Ok(BoundaryCase::DD),
            "DN" => Ok(BoundaryCase::DN),
            "ND" => Ok(BoundaryCase::ND),
            "NN" => Ok(BoundaryCase::NN),
            other => Err(ModelError::UnknownBoundaryCase(other.to_string())),
        }
    }
}

impl std::str::FromStr for CouplingKind {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "strong" => Ok(CouplingKind::Strong),
            "weak" => Ok(CouplingKind::Weak),
            other => Err(ModelError::UnknownCouplingKind(other.to_string())),
        }
    }
}

/// Coupling kind plus the dimensionless coupling strength gamma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingModel {
    pub kind: CouplingKind,
    pub gamma: f64,
}

impl CouplingModel {
    /// Production constructor: gamma must be finite and strictly positive.
    pub fn new(kind: CouplingKind, gamma: f64) -> Result<Self, ModelError> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(ModelError::InvalidGamma(gamma));
        }
        Ok(CouplingModel { kind, gamma })
    }

    /// Oracle/test constructor: also admits gamma = 0 (the uncoupled system,
    /// whose spectrum is known in closed form).
    pub fn with_gamma_unchecked(kind: CouplingKind, gamma: f64) -> Self {
        assert!(gamma.is_finite() && gamma >= 0.0, "gamma must be finite and nonnegative");
        CouplingModel { kind, gamma }
    }

    pub fn strong(gamma: f64) -> Result<Self, ModelError> {
        Self::new(CouplingKind::Strong, gamma)
    }

    pub fn weak(gamma: f64) -> Result<Self, ModelError> {
        Self::new(CouplingKind::Weak, gamma)
    }
}

/// Whether a generator matrix came from the closed-form block display or from
/// the Gram/Cholesky assembly pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Printed,
    Assembled,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Printed => write!(f, "printed"),
            Provenance::Assembled => write!(f, "assembled"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("gamma must be finite and strictly positive, got {0}")]
    InvalidGamma(f64),
    #[error("unknown boundary case {0:?} (expected DD, DN, ND or NN)")]
    UnknownBoundaryCase(String),
    #[error("unknown coupling kind {0:?} (expected strong or weak)")]
    UnknownCouplingKind(String),
    #[error("mode count must be at least 1, got {0}")]
    InvalidModeCount(usize),
    #[error("Gram block M{block} is not positive definite (pivot {pivot:.3e} below threshold)")]
    GramNotSpd { block: usize, pivot: f64 },
    #[error(
        "closed-form entry ({i},{j}) of block {block} for {kind}/{bc} divides by zero; \
         the stated condition does not exclude i = j"
    )]
    UndefinedEntry {
        kind: CouplingKind,
        bc: BoundaryCase,
        block: &'static str,
        i: usize,
        j: usize,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_must_be_positive() {
        assert!(CouplingModel::strong(0.05).is_ok());
        assert!(matches!(
            CouplingModel::strong(0.0),
            Err(ModelError::InvalidGamma(_))
        ));
        assert!(matches!(
            CouplingModel::weak(-1.0),
            Err(ModelError::InvalidGamma(_))
        ));
        assert!(matches!(
            CouplingModel::weak(f64::NAN),
            Err(ModelError::InvalidGamma(_))
        ));
    }

    #[test]
    fn uncoupled_allowed_for_oracles() {
        let m = CouplingModel::with_gamma_unchecked(CouplingKind::Strong, 0.0);
        assert_eq!(m.gamma, 0.0);
    }

    #[test]
    fn boundary_case_roundtrip() {
        for bc in BoundaryCase::ALL {
            assert_eq!(bc.to_string().parse::<BoundaryCase>().unwrap(), bc);
        }
        assert!("XY".parse::<BoundaryCase>().is_err());
    }
}
