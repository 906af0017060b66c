//! Fixed-M_J product basis, assembly of the adiabatic Hamiltonian for a
//! linear geometry, and its diagonalization.
//!
//! Energies are in GHz with the zero at the hydrogenic manifold E(n, l ≥ 3)
//! and both rotors in N = 0.

mod engine;
mod label;
mod solve;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, Side};
use crate::rotor::{RotorError, RotorState};
use crate::rydberg::{HighLPotential, RydbergError};

pub use engine::{Engine, EngineOptions, HamiltonianBlock};
pub use label::{character_weights, coupled_label, rotor_pair_weight, CoupledLabel, RydbergCharacter};
pub use solve::{diagonalize, diagonalize_dense_reference, Eigenpair, Selection, SectorLabel, Spectrum};

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("molecules {gap:.1} bohr apart on the same side, below the minimum {min_gap} bohr (dipole-dipole estimate {vdd_ghz:.3} GHz)")]
    Validity { gap: f64, min_gap: f64, vdd_ghz: f64 },
    #[error("sector dimension {dim} exceeds the dense ceiling {ceiling}; lower N_max or raise the ceiling")]
    TooLarge { dim: usize, ceiling: usize },
    #[error("eigensolver failed in sector {sector} (dimension {dim}): {detail}")]
    Solver { sector: String, dim: usize, detail: String },
    #[error("Hamiltonian check failed: {0}")]
    Invariant(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Radial(#[from] RydbergError),
    #[error(transparent)]
    Rotor(#[from] RotorError),
}

/// Electron orbital with magnetic quantum number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ElectronState {
    pub n: u32,
    pub l: u32,
    pub m: i32,
}

/// |n l m⟩ ⊗ |N1 M1⟩ ⊗ |N2 M2⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProductBasisState {
    pub electron: ElectronState,
    pub rotor1: RotorState,
    pub rotor2: RotorState,
}

/// Electron orbitals, rotor truncation and the conserved M_J.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StateSpace {
    /// Principal quantum number of the degenerate manifold.
    pub manifold_n: u32,
    /// Lowest l of the manifold.
    pub manifold_l_min: u32,
    pub include_manifold: bool,
    /// Principal quantum number of the extra s state, if any.
    pub s_state: Option<u32>,
    /// Rotational truncation N_i ≤ n_max for both rotors.
    pub n_max: i32,
    pub m_j: i32,
    pub high_l: HighLPotential,
}

impl Default for StateSpace {
    fn default() -> Self {
        Self { manifold_n: 20, manifold_l_min: 3, include_manifold: true, s_state: Some(23), n_max: 4, m_j: 0, high_l: HighLPotential::ModelPotential }
    }
}

impl StateSpace {
    pub fn validate(&self) -> Result<(), HamiltonianError> {
        if self.n_max < 0 {
            return Err(HamiltonianError::Config(format!("n_max = {} must be non-negative", self.n_max)));
        }
        if self.include_manifold && self.manifold_l_min >= self.manifold_n {
            return Err(HamiltonianError::Config(format!("manifold l_min {} must be below n {}", self.manifold_l_min, self.manifold_n)));
        }
        if !self.include_manifold && self.s_state.is_none() {
            return Err(HamiltonianError::Config("state space has no electron orbitals".into()));
        }
        if self.s_state == Some(0) {
            return Err(HamiltonianError::Config("s state needs n ≥ 1".into()));
        }
        Ok(())
    }

    /// Radial orbitals (n, l) in the space, s state first.
    pub fn orbitals(&self) -> Vec<(u32, u32)> {
        let mut v = Vec::new();
        if let Some(n) = self.s_state {
            v.push((n, 0));
        }
        if self.include_manifold {
            v.extend((self.manifold_l_min..self.manifold_n).map(|l| (self.manifold_n, l)));
        }
        v
    }

    /// Electron states whose m can meet M_J with |M1|, |M2| ≤ n_max.
    pub fn electron_states(&self) -> Vec<ElectronState> {
        let reach = self.m_j.abs() + 2 * self.n_max;
        let mut v = Vec::new();
        for (n, l) in self.orbitals() {
            for m in -(l as i32)..=(l as i32) {
                if (m - self.m_j).abs() <= reach {
                    v.push(ElectronState { n, l, m });
                }
            }
        }
        v.sort();
        v
    }

    pub fn largest_n(&self) -> u32 {
        self.orbitals().iter().map(|o| o.0).max().unwrap_or(1)
    }
}

/// All product states with m + M1 + M2 = M_J, sorted by
/// (n, l, m, N1, M1, N2, M2) ascending.
pub fn enumerate_basis(space: &StateSpace) -> Result<Vec<ProductBasisState>, HamiltonianError> {
    space.validate()?;
    let rotors = crate::rotor::rotor_states(space.n_max);
    let mut out = Vec::new();
    for e in space.electron_states() {
        for &r1 in &rotors {
            for &r2 in &rotors {
                if e.m + r1.m + r2.m == space.m_j {
                    out.push(ProductBasisState { electron: e, rotor1: r1, rotor2: r2 });
                }
            }
        }
    }
    if out.is_empty() {
        return Err(HamiltonianError::Config(format!("no basis states with M_J = {}", space.m_j)));
    }
    out.sort();
    Ok(out)
}

/// Positions of the two molecules on the Z axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub r1: f64,
    pub side1: Side,
    pub r2: f64,
    pub side2: Side,
}

impl Geometry {
    /// R1 = R2 = R on opposite sides of the core.
    pub fn symmetric(r: f64) -> Self {
        Self { r1: r, side1: Side::Plus, r2: r, side2: Side::Minus }
    }

    /// Both molecules on the +Z side.
    pub fn same_side(r1: f64, r2: f64) -> Self {
        Self { r1, side1: Side::Plus, r2, side2: Side::Plus }
    }

    pub fn is_symmetric(&self) -> bool {
        self.r1 == self.r2 && self.side1 != self.side2
    }

    /// Rejects non-positive distances and same-side molecules closer than
    /// `min_gap`; the error carries the dipole-dipole estimate.
    pub fn validate(&self, min_gap: f64, dipole_au: f64) -> Result<(), HamiltonianError> {
        if !(self.r1 > 0.0 && self.r2 > 0.0) {
            return Err(HamiltonianError::Config(format!("distances {} and {} must be positive", self.r1, self.r2)));
        }
        if self.side1 == self.side2 {
            let gap = (self.r2 - self.r1).abs();
            if gap < min_gap {
                let vdd_ghz = crate::rotor::dipole_dipole_estimate(dipole_au, gap.max(1e-9))?;
                return Err(HamiltonianError::Validity { gap, min_gap, vdd_ghz });
            }
        }
        Ok(())
    }

    /// Separation between the molecules.
    pub fn separation(&self) -> f64 {
        if self.side1 == self.side2 {
            (self.r2 - self.r1).abs()
        } else {
            self.r1 + self.r2
        }
    }
}
