//! Run configuration read from TOML, with every default written out.

use std::fmt;
use std::path::{Path, PathBuf};

use pentamol::field::FieldModel;
use pentamol::hamiltonian::{EngineOptions, StateSpace};
use pentamol::rotor::MoleculeParams;
use pentamol::rydberg::HighLPotential;
use pentamol::spectra::{ScanPlan, DEFAULT_REDUCED_MASS};
use pentamol::units::{au_to_debye, debye_to_au};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

/// Environment variable overriding `cache_dir`.
pub const CACHE_ENV: &str = "PENTAMOL_CACHE_DIR";

/// Electric dipole moment in atomic units. Reads a bare number (a.u.) or a
/// string with a unit, "0.566 D" or "0.2227 au".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dipole(pub f64);

impl Dipole {
    pub fn parse(s: &str) -> Result<Self, String> {
        let t = s.trim();
        let split = t.find(|c: char| c.is_ascii_alphabetic()).unwrap_or(t.len());
        let (num, unit) = t.split_at(split);
        let v: f64 = num.trim().parse().map_err(|_| format!("dipole {s:?}: not a number"))?;
        match unit.trim().to_ascii_lowercase().as_str() {
            "d" | "debye" => Ok(Dipole(debye_to_au(v))),
            "" | "au" | "a.u." => Ok(Dipole(v)),
            u => Err(format!("dipole {s:?}: unknown unit {u:?} (use D or au)")),
        }
    }

    pub fn debye(&self) -> f64 {
        au_to_debye(self.0)
    }
}

impl Serialize for Dipole {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Dipole {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Dipole;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number in a.u. or a string such as \"0.566 D\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Dipole, E> {
                Ok(Dipole(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Dipole, E> {
                Ok(Dipole(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Dipole, E> {
                Dipole::parse(v).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub r_start: f64,
    pub r_stop: f64,
    pub r_step: f64,
    /// R2 − R1 for the fixed-gap scan.
    pub gap: f64,
    /// Fixed R1 for the fixed-R1 scan and the TriMol check.
    pub r1: f64,
    /// Number of lowest curves followed.
    pub curves: usize,
    pub overlap_threshold: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { r_start: 400.0, r_stop: 1200.0, r_step: 5.0, gap: 150.0, r1: 400.0, curves: 20, overlap_threshold: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpaceConfig {
    pub manifold_n: u32,
    pub manifold_l_min: u32,
    pub include_manifold: bool,
    pub include_s: bool,
    pub s_n: u32,
    pub n_max: i32,
    pub m_j: Vec<i32>,
    pub high_l: HighLPotential,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        let s = StateSpace::default();
        Self {
            manifold_n: s.manifold_n,
            manifold_l_min: s.manifold_l_min,
            include_manifold: s.include_manifold,
            include_s: s.s_state.is_some(),
            s_n: s.s_state.unwrap_or(23),
            n_max: s.n_max,
            m_j: vec![0, 1],
            high_l: s.high_l,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MoleculeConfig {
    pub b_ghz: f64,
    /// Stored in a.u.
    pub dipole: Dipole,
}

impl Default for MoleculeConfig {
    fn default() -> Self {
        let k = MoleculeParams::krb();
        Self { b_ghz: k.b_ghz, dipole: Dipole(k.dipole_au) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub field_model: FieldModel,
    pub grid_step: f64,
    pub r_limit: f64,
    pub min_gap: f64,
    pub dense_ceiling: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = EngineOptions::default();
        Self { field_model: o.field_model, grid_step: o.grid_step, r_limit: o.r_limit, min_gap: o.min_gap, dense_ceiling: o.dense_ceiling }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WellsConfig {
    /// In electron masses.
    pub reduced_mass: f64,
}

impl Default for WellsConfig {
    fn default() -> Self {
        Self { reduced_mass: DEFAULT_REDUCED_MASS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    pub n_max_ladder: Vec<i32>,
    pub curves: usize,
    /// Distances to compare at; empty means the scan schedule.
    pub radii: Vec<f64>,
    pub max_relative: f64,
    pub max_relative_s_state: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self { n_max_ladder: vec![4, 5], curves: 6, radii: Vec::new(), max_relative: 0.01, max_relative_s_state: 0.008 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrimolConfig {
    pub r2_start: f64,
    pub r2_stop: f64,
    pub r2_step: f64,
    pub threshold: f64,
}

impl Default for TrimolConfig {
    fn default() -> Self {
        Self { r2_start: 2600.0, r2_stop: 3000.0, r2_step: 20.0, threshold: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldCheckConfig {
    pub r: f64,
}

impl Default for FieldCheckConfig {
    fn default() -> Self {
        Self { r: 600.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    pub scan: ScanConfig,
    pub space: SpaceConfig,
    pub molecule: MoleculeConfig,
    pub solver: SolverConfig,
    pub wells: WellsConfig,
    pub convergence: ConvergenceConfig,
    pub trimol: TrimolConfig,
    pub field_check: FieldCheckConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("pentamol-out"),
            cache_dir: None,
            threads: 0,
            scan: ScanConfig::default(),
            space: SpaceConfig::default(),
            molecule: MoleculeConfig::default(),
            solver: SolverConfig::default(),
            wells: WellsConfig::default(),
            convergence: ConvergenceConfig::default(),
            trimol: TrimolConfig::default(),
            field_check: FieldCheckConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let c: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string() + &span_note(text, e.span())))?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Applies the cache directory from the environment, if set.
    pub fn apply_env(&mut self) {
        if let Some(dir) = std::env::var_os(CACHE_ENV) {
            if !dir.is_empty() {
                self.cache_dir = Some(PathBuf::from(dir));
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |key: &str, why: String| Err(CliError::Config(format!("{key}: {why}")));
        let s = &self.scan;
        if !(s.r_start > 0.0 && s.r_stop >= s.r_start && s.r_step > 0.0) {
            return bad("scan.r_start/r_stop/r_step", format!("need 0 < r_start ≤ r_stop and r_step > 0, got {} {} {}", s.r_start, s.r_stop, s.r_step));
        }
        if !(s.gap > 0.0) {
            return bad("scan.gap", format!("{} must be positive", s.gap));
        }
        if !(s.r1 > 0.0) {
            return bad("scan.r1", format!("{} must be positive", s.r1));
        }
        if s.curves == 0 {
            return bad("scan.curves", "at least one".into());
        }
        if !(0.0..=1.0).contains(&s.overlap_threshold) {
            return bad("scan.overlap_threshold", format!("{} outside [0, 1]", s.overlap_threshold));
        }
        if self.space.n_max < 0 {
            return bad("space.n_max", format!("{} must be non-negative", self.space.n_max));
        }
        if self.space.m_j.is_empty() {
            return bad("space.m_j", "list must not be empty".into());
        }
        for &m in &self.space.m_j {
            self.state_space(m).validate().map_err(|e| CliError::Config(format!("space: {e}")))?;
        }
        if !(self.molecule.b_ghz > 0.0 && self.molecule.b_ghz.is_finite()) {
            return bad("molecule.b_ghz", format!("{} must be positive", self.molecule.b_ghz));
        }
        if !(self.molecule.dipole.0 >= 0.0 && self.molecule.dipole.0.is_finite()) {
            return bad("molecule.dipole", format!("{} must be non-negative", self.molecule.dipole.0));
        }
        let v = &self.solver;
        if !(v.grid_step > 0.0 && v.r_limit > 0.0 && v.min_gap >= 0.0 && v.dense_ceiling > 0) {
            return bad("solver", "grid_step, r_limit and dense_ceiling must be positive, min_gap non-negative".into());
        }
        if !(self.wells.reduced_mass > 0.0) {
            return bad("wells.reduced_mass", format!("{} must be positive", self.wells.reduced_mass));
        }
        let c = &self.convergence;
        if c.n_max_ladder.len() < 2 || c.n_max_ladder.iter().any(|&n| n < 0) {
            return bad("convergence.n_max_ladder", "need at least two non-negative values".into());
        }
        if c.curves == 0 {
            return bad("convergence.curves", "at least one".into());
        }
        let t = &self.trimol;
        if !(t.r2_start > self.scan.r1 && t.r2_stop >= t.r2_start && t.r2_step > 0.0 && t.threshold > 0.0) {
            return bad("trimol", "need scan.r1 < r2_start ≤ r2_stop, positive r2_step and threshold".into());
        }
        if !(self.field_check.r > 0.0) {
            return bad("field_check.r", format!("{} must be positive", self.field_check.r));
        }
        Ok(())
    }

    pub fn state_space(&self, m_j: i32) -> StateSpace {
        let s = &self.space;
        StateSpace {
            manifold_n: s.manifold_n,
            manifold_l_min: s.manifold_l_min,
            include_manifold: s.include_manifold,
            s_state: s.include_s.then_some(s.s_n),
            n_max: s.n_max,
            m_j,
            high_l: s.high_l,
        }
    }

    pub fn molecules(&self) -> Result<[MoleculeParams; 2], CliError> {
        let m = MoleculeParams::new(self.molecule.b_ghz, self.molecule.dipole.0).map_err(|e| CliError::Config(format!("molecule: {e}")))?;
        Ok([m, m])
    }

    pub fn engine_options(&self) -> EngineOptions {
        let v = &self.solver;
        EngineOptions {
            field_model: v.field_model,
            grid_step: v.grid_step,
            r_limit: v.r_limit,
            min_gap: v.min_gap,
            dense_ceiling: v.dense_ceiling,
            cache_dir: self.cache_dir.clone(),
            phase_flips: Vec::new(),
        }
    }

    pub fn scan_radii(&self) -> Vec<f64> {
        ScanPlan::uniform_radii(self.scan.r_start, self.scan.r_stop, self.scan.r_step)
    }

    pub fn trimol_radii(&self) -> Vec<f64> {
        ScanPlan::uniform_radii(self.trimol.r2_start, self.trimol.r2_stop, self.trimol.r2_step)
    }
}

fn span_note(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(s) => {
            let line = text[..s.start.min(text.len())].matches('\n').count() + 1;
            format!(" (line {line})")
        }
        None => String::new(),
    }
}
