use serde::{Deserialize, Serialize};

use super::{ScanMode, ScanResult, SpectraError};
use crate::hamiltonian::{diagonalize, Engine, HamiltonianError, EngineOptions, Geometry, Selection, StateSpace};
use crate::rotor::MoleculeParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub r: f64,
    /// Curve index in energy order among the compared curves.
    pub curve: usize,
    pub reference: String,
    pub candidate: String,
    pub e_reference: f64,
    pub e_candidate: f64,
    /// |E_candidate − E_reference| / |E_candidate|.
    pub relative: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn max_relative(&self) -> f64 {
        self.rows.iter().map(|r| r.relative).fold(0.0, f64::max)
    }
}

/// The `k` lowest eigenvalues of manifold character (weight > 1/2) at
/// `geometry`. Without the manifold in the space, the k lowest overall.
pub fn lowest_manifold_energies(engine: &Engine, geometry: &Geometry, k: usize) -> Result<Vec<f64>, SpectraError> {
    let at = |source| SpectraError::AtRadius { r: geometry.r1, source };
    let h = engine.hamiltonian(geometry).map_err(at)?;
    let only_manifold = engine.space().s_state.is_none();
    let sel = if only_manifold { Selection::lowest(0).values_only() } else { Selection::lowest(0) };
    let s = diagonalize(engine, &h, &sel).map_err(at)?;
    let picked: Vec<f64> = match &s.manifold_weights {
        Some(w) => s.all_energies.iter().zip(w).filter(|(_, w)| **w > 0.5).map(|(e, _)| *e).take(k).collect(),
        None => s.all_energies.iter().take(k).copied().collect(),
    };
    if picked.len() < k {
        return Err(SpectraError::Plan(format!("only {} manifold states available, {k} requested", picked.len())));
    }
    Ok(picked)
}

fn compare(r: f64, a: (&str, &[f64]), b: (&str, &[f64]), out: &mut ConvergenceTable) {
    for (c, (ea, eb)) in a.1.iter().zip(b.1).enumerate() {
        out.rows.push(ConvergenceRow {
            r,
            curve: c,
            reference: a.0.to_string(),
            candidate: b.0.to_string(),
            e_reference: *ea,
            e_candidate: *eb,
            relative: if *eb == *ea { 0.0 } else { (eb - ea).abs() / eb.abs() },
        });
    }
}

/// Relative change of the `k` lowest manifold curves between successive
/// rotor truncations of `space` at each scan distance.
pub fn convergence_study(
    space: &StateSpace,
    n_max_ladder: &[i32],
    molecules: [MoleculeParams; 2],
    options: &EngineOptions,
    mode: ScanMode,
    radii: &[f64],
    k: usize,
) -> Result<ConvergenceTable, SpectraError> {
    if n_max_ladder.len() < 2 || n_max_ladder.windows(2).any(|w| w[1] < w[0]) {
        return Err(SpectraError::Plan("need a non-decreasing ladder of at least two N_max values".into()));
    }
    let mut levels = Vec::new();
    for &n_max in n_max_ladder {
        let engine = Engine::new(StateSpace { n_max, ..space.clone() }, molecules, options.clone())?;
        let per_r = radii.iter().map(|&r| lowest_manifold_energies(&engine, &mode.geometry(r), k)).collect::<Result<Vec<_>, _>>()?;
        levels.push(per_r);
    }
    let mut table = ConvergenceTable::default();
    for (i, w) in n_max_ladder.windows(2).enumerate() {
        for (ri, &r) in radii.iter().enumerate() {
            compare(r, (&format!("N_max={}", w[0]), &levels[i][ri]), (&format!("N_max={}", w[1]), &levels[i + 1][ri]), &mut table);
        }
    }
    Ok(table)
}

/// Relative difference of the `k` lowest manifold curves between the
/// manifold-only space and `space` with its extra s state.
pub fn manifold_vs_full(
    space: &StateSpace,
    molecules: [MoleculeParams; 2],
    options: &EngineOptions,
    mode: ScanMode,
    radii: &[f64],
    k: usize,
) -> Result<ConvergenceTable, SpectraError> {
    if space.s_state.is_none() || !space.include_manifold {
        return Err(SpectraError::Plan("space needs both the manifold and the s state".into()));
    }
    let full = Engine::new(space.clone(), molecules, options.clone())?;
    let only = Engine::new(StateSpace { s_state: None, ..space.clone() }, molecules, options.clone())?;
    let mut table = ConvergenceTable::default();
    for &r in radii {
        let g = mode.geometry(r);
        let a = lowest_manifold_energies(&only, &g, k)?;
        let b = lowest_manifold_energies(&full, &g, k)?;
        compare(r, ("manifold only", &a), ("with s state", &b), &mut table);
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimolReport {
    pub r1: f64,
    pub r2: f64,
    /// Final energies of the tracked curves, ascending.
    pub pentamol: Vec<f64>,
    /// Reference with the second molecule's dipole set to zero, ascending.
    pub trimol: Vec<f64>,
    pub residuals: Vec<f64>,
    pub threshold: f64,
}

impl TrimolReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn passed(&self) -> bool {
        self.max_residual() < self.threshold
    }
}

/// Compares the tail of a fixed-R1 scan against the same engine with the
/// second dipole switched off. With d₂ = 0 the far rotor is free, so its
/// rotational ladder appears in both spectra and the curves are compared in
/// energy order at the largest R2.
pub fn trimol_limit_check(scan: &ScanResult, options: &EngineOptions, threshold: f64) -> Result<TrimolReport, SpectraError> {
    let ScanMode::FixedR1 { r1 } = scan.plan.mode else {
        return Err(SpectraError::Plan("TriMol comparison needs a fixed-R1 scan".into()));
    };
    let last = scan.points.last().ok_or_else(|| SpectraError::Plan("empty scan".into()))?;
    let mut pentamol: Vec<f64> = scan.curves.iter().map(|c| *c.energies.last().unwrap()).collect();
    pentamol.sort_by(f64::total_cmp);
    let mut mols = scan.plan.molecules;
    mols[1] = MoleculeParams::new(mols[1].b_ghz, 0.0).map_err(HamiltonianError::from)?;
    let reference = Engine::new(scan.plan.space.clone(), mols, options.clone())?;
    let h = reference.hamiltonian(&last.geometry).map_err(|source| SpectraError::AtRadius { r: last.r, source })?;
    let s = diagonalize(&reference, &h, &Selection::lowest(0).values_only())?;
    let trimol: Vec<f64> = s.all_energies.iter().take(pentamol.len()).copied().collect();
    let residuals = pentamol.iter().zip(&trimol).map(|(a, b)| a - b).collect();
    Ok(TrimolReport { r1, r2: last.r, pentamol, trimol, residuals, threshold })
}
