//! Learning coupled Lie–Poisson dynamics with networks built from exact Poisson maps.
//!
//! The crate covers three coupled systems:
//!
//! * two rigid bodies interacting through point charges, state `(μ1, μ2, p)` with `p ∈ SO(3)`;
//! * the planar reduction of that system, state `(μ1, μ2, Φ)`;
//! * two coupled SE(3) elements, state `(α1, β1, α2, β2, Q, v)`.
//!
//! Every network layer is the closed-form time-`dt` flow of a simple
//! Hamiltonian, so a forward pass keeps all Casimirs up to rounding. See the
//! `examples/` directory for end-to-end usage.

pub mod cli;
pub mod dataset;
pub mod diagnostics;
pub mod error;
pub mod integrate;
pub mod layers;
pub mod lie;
pub mod network;
pub mod systems;
pub mod training;

pub use error::{Error, Result};
pub use lie::{Mat3, Vec3};
pub use network::{Model, Network, NetworkSpec};
pub use systems::{State, System};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Which coupled system a state, dataset or model belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    So2,
    So3,
    Se3,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::So2, Case::So3, Case::Se3];

    /// Length of a flattened state.
    pub fn dim(self) -> usize {
        match self {
            Case::So2 => 3,
            Case::So3 => 15,
            Case::Se3 => 24,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Case::So2 => "so2",
            Case::So3 => "so3",
            Case::Se3 => "se3",
        }
    }

    /// Number of independent Casimirs.
    pub fn n_casimirs(self) -> usize {
        match self {
            Case::Se3 => 2,
            _ => 1,
        }
    }

    pub(crate) fn expect(self, found: Case) -> Result<()> {
        if self == found {
            Ok(())
        } else {
            Err(Error::CaseMismatch {
                expected: self.name().into(),
                found: found.name().into(),
            })
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "so2" => Ok(Case::So2),
            "so3" => Ok(Case::So3),
            "se3" => Ok(Case::Se3),
            _ => Err(Error::UnknownCase(s.into())),
        }
    }
}
