//! Rigid-rotor polar diatomics: rotational energies and matrix elements of
//! the dipole direction n̂ = (sinθcosφ, sinθsinφ, cosθ).
//!
//! Spherical components n̂_q = √(4π/3)·Y_1q(θ, φ), so that
//! n̂_X = (n̂₋₁ − n̂₊₁)/√2 and n̂_Y = i(n̂₋₁ + n̂₊₁)/√2.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angmath::gaunt;
use crate::units::{hartree_to_ghz, CRITICAL_DIPOLE_DEBYE, DEBYE_AU};
use crate::Axis;

#[derive(Debug, Error, PartialEq)]
pub enum RotorError {
    #[error("invalid molecule parameters: {0}")]
    Params(String),
    #[error("invalid rotor state N={n}, M={m}")]
    State { n: i32, m: i32 },
    #[error("separation {0} bohr must be positive")]
    Separation(f64),
}

/// Rotational constant in GHz and dipole moment in atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoleculeParams {
    pub b_ghz: f64,
    pub dipole_au: f64,
}

impl MoleculeParams {
    pub fn new(b_ghz: f64, dipole_au: f64) -> Result<Self, RotorError> {
        if !(b_ghz > 0.0 && b_ghz.is_finite()) {
            return Err(RotorError::Params(format!("B = {b_ghz} GHz must be positive")));
        }
        if !(dipole_au >= 0.0 && dipole_au.is_finite()) {
            return Err(RotorError::Params(format!("d = {dipole_au} au must be non-negative")));
        }
        if dipole_au >= CRITICAL_DIPOLE_DEBYE * DEBYE_AU {
            return Err(RotorError::Params(format!(
                "d = {:.4} D reaches the critical dipole {CRITICAL_DIPOLE_DEBYE} D",
                dipole_au / DEBYE_AU
            )));
        }
        Ok(Self { b_ghz, dipole_au })
    }

    /// KRb in its vibronic ground state.
    pub fn krb() -> Self {
        Self { b_ghz: 1.114, dipole_au: 0.566 * DEBYE_AU }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RotorState {
    pub n: i32,
    pub m: i32,
}

impl RotorState {
    pub fn new(n: i32, m: i32) -> Result<Self, RotorError> {
        if n < 0 || m.abs() > n {
            return Err(RotorError::State { n, m });
        }
        Ok(Self { n, m })
    }
}

/// All (N, M) with N ≤ n_max, ordered by N then M.
pub fn rotor_states(n_max: i32) -> Vec<RotorState> {
    (0..=n_max).flat_map(|n| (-n..=n).map(move |m| RotorState { n, m })).collect()
}

/// B·N(N+1) in GHz.
pub fn rotational_energy(params: &MoleculeParams, n: i32) -> f64 {
    params.b_ghz * (n * (n + 1)) as f64
}

/// ⟨bra| n̂_q |ket⟩ for q ∈ {−1, 0, 1}; always real.
pub fn dipole_spherical_me(q: i32, bra: RotorState, ket: RotorState) -> f64 {
    (4.0 * PI / 3.0).sqrt() * gaunt(bra.n, bra.m, 1, q, ket.n, ket.m).unwrap_or(0.0)
}

/// ⟨bra| n̂_K |ket⟩ for a Cartesian lab axis.
pub fn dipole_direction_me(axis: Axis, bra: RotorState, ket: RotorState) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match axis {
        Axis::Z => Complex64::new(dipole_spherical_me(0, bra, ket), 0.0),
        Axis::X => Complex64::new(s * (dipole_spherical_me(-1, bra, ket) - dipole_spherical_me(1, bra, ket)), 0.0),
        Axis::Y => Complex64::new(0.0, s * (dipole_spherical_me(-1, bra, ket) + dipole_spherical_me(1, bra, ket))),
    }
}

/// ⟨bra| cos²θ |ket⟩ = δ/3 + (2/3)√(4π/5)·⟨bra|Y_20|ket⟩.
pub fn cos2_me(bra: RotorState, ket: RotorState) -> f64 {
    let diag = if bra == ket { 1.0 / 3.0 } else { 0.0 };
    diag + 2.0 / 3.0 * (4.0 * PI / 5.0).sqrt() * gaunt(bra.n, bra.m, 2, 0, ket.n, ket.m).unwrap_or(0.0)
}

/// |V₁₂| in GHz for two fully oriented point dipoles placed head to tail,
/// 2d²/R³ with d in atomic units and R in bohr.
pub fn dipole_dipole_estimate(dipole_au: f64, separation: f64) -> Result<f64, RotorError> {
    if !(separation > 0.0) {
        return Err(RotorError::Separation(separation));
    }
    Ok(hartree_to_ghz(2.0 * dipole_au * dipole_au / separation.powi(3)))
}
