//! The functions whose quasiconvexity modulus is measured.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SqcError};
use crate::geometry::{NormSpec, Vector};
use crate::sets::SetSpec;

/// Anything that can be swept: a real-valued function on ℝⁿ.
pub trait Objective: Sync {
    fn value(&self, z: &Vector) -> Result<f64>;

    /// The only dimension the function accepts, if it is fixed.
    fn dim(&self) -> Option<usize> {
        None
    }
}

/// A norm `z ↦ ‖z‖ₙ` or a distance function `z ↦ inf{‖z − w‖ₙ : w ∈ s}`.
///
/// JSON form: `{"Norm": {"n": "L2"}}` or `{"DistanceTo": {"s": {...}, "n": "L2"}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionRepr")]
pub enum FunctionSpec {
    Norm { n: NormSpec },
    DistanceTo { s: SetSpec, n: NormSpec },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
enum FunctionRepr {
    Norm { n: NormSpec },
    DistanceTo { s: SetSpec, n: NormSpec },
}

impl TryFrom<FunctionRepr> for FunctionSpec {
    type Error = SqcError;

    fn try_from(r: FunctionRepr) -> Result<Self> {
        match r {
            FunctionRepr::Norm { n } => Ok(FunctionSpec::Norm { n }),
            FunctionRepr::DistanceTo { s, n } => FunctionSpec::distance_to(s, n),
        }
    }
}

impl FunctionSpec {
    pub fn norm(n: NormSpec) -> Self {
        FunctionSpec::Norm { n }
    }

    /// Rejects (set, norm) pairs without a distance implementation.
    pub fn distance_to(s: SetSpec, n: NormSpec) -> Result<Self> {
        if !s.supports_distance(n) {
            return Err(SqcError::unsupported(format!(
                "distance to a {} measured in {n}",
                s.name()
            )));
        }
        Ok(FunctionSpec::DistanceTo { s, n })
    }
}

impl Objective for FunctionSpec {
    fn value(&self, z: &Vector) -> Result<f64> {
        match self {
            FunctionSpec::Norm { n } => Ok(n.of(z)),
            FunctionSpec::DistanceTo { s, n } => s.distance(z, *n),
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            FunctionSpec::Norm { .. } => None,
            FunctionSpec::DistanceTo { s, .. } => Some(s.dim()),
        }
    }
}
