//! Born-Oppenheimer potentials of a Rydberg atom dressed by two polar
//! diatomic molecules placed on the quantization axis.

pub mod angmath;
pub mod field;
pub mod hamiltonian;
pub mod quadrature;
pub mod rotor;
pub mod rydberg;
pub mod spectra;
pub mod spline;
pub mod units;

use serde::{Deserialize, Serialize};

/// Cartesian lab-frame axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}
