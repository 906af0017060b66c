//! Physical constants and unit conversions.
//!
//! Everything inside the engine runs in Hartree atomic units. Energies are
//! converted to GHz only at output boundaries; the rotational constant is the
//! one quantity that enters in GHz.

/// GHz per hartree (2 Ry c, CODATA 2018).
pub const HARTREE_GHZ: f64 = 6.579_683_920_502e6;

/// Atomic units of electric dipole moment per debye.
pub const DEBYE_AU: f64 = 0.393_430_3;

/// Electron masses per unified atomic mass unit.
pub const AMU_ME: f64 = 1_822.888_486_209;

/// Isotopic masses in unified atomic mass units.
pub const MASS_K39_AMU: f64 = 38.963_706_486_4;
pub const MASS_RB87_AMU: f64 = 86.909_180_531;

/// Mass of ³⁹K⁸⁷Rb in electron masses.
pub const MASS_KRB_ME: f64 = (MASS_K39_AMU + MASS_RB87_AMU) * AMU_ME;

/// Critical dipole moment (debye) above which a point dipole binds an electron.
pub const CRITICAL_DIPOLE_DEBYE: f64 = 1.639;

#[inline]
pub fn hartree_to_ghz(e: f64) -> f64 {
    e * HARTREE_GHZ
}

#[inline]
pub fn ghz_to_hartree(e: f64) -> f64 {
    e / HARTREE_GHZ
}

#[inline]
pub fn debye_to_au(d: f64) -> f64 {
    d * DEBYE_AU
}

#[inline]
pub fn au_to_debye(d: f64) -> f64 {
    d / DEBYE_AU
}
