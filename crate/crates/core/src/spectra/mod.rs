//! Geometry scans, adiabatic curve tracking, orientation observables, well
//! analysis and convergence studies.

mod study;
mod wells;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::Side;
use crate::hamiltonian::{
    character_weights, coupled_label, diagonalize, CoupledLabel, Engine, EngineOptions, Geometry, HamiltonianError, RydbergCharacter,
    SectorLabel, Selection, StateSpace,
};
use crate::rotor::MoleculeParams;

pub use study::{convergence_study, lowest_manifold_energies, manifold_vs_full, trimol_limit_check, ConvergenceRow, ConvergenceTable, TrimolReport};
pub use wells::{bound_levels, count_vibrational, find_wells, VibrationalLevels, WellReport, DEFAULT_REDUCED_MASS};

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("scan plan: {0}")]
    Plan(String),
    #[error("at R = {r} bohr: {source}")]
    AtRadius { r: f64, source: HamiltonianError },
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error("curve tracking: {0}")]
    Tracking(String),
    #[error("well analysis: {0}")]
    Wells(String),
}

/// How the scanned distance maps onto the two molecule positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScanMode {
    /// R1 = R2 = R on opposite sides of the core.
    Symmetric,
    /// Same side, R1 = R and R2 = R + gap.
    FixedGap { gap: f64 },
    /// Same side, R1 fixed and R2 = R.
    FixedR1 { r1: f64 },
}

impl ScanMode {
    pub fn geometry(&self, r: f64) -> Geometry {
        match *self {
            ScanMode::Symmetric => Geometry::symmetric(r),
            ScanMode::FixedGap { gap } => Geometry { r1: r, side1: Side::Plus, r2: r + gap, side2: Side::Plus },
            ScanMode::FixedR1 { r1 } => Geometry { r1, side1: Side::Plus, r2: r, side2: Side::Plus },
        }
    }

    pub fn is_same_side(&self) -> bool {
        !matches!(self, ScanMode::Symmetric)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPlan {
    pub mode: ScanMode,
    /// Scanned distance in bohr, strictly increasing.
    pub radii: Vec<f64>,
    pub space: StateSpace,
    pub molecules: [MoleculeParams; 2],
    /// Number of lowest curves followed.
    pub curves: usize,
    /// Overlap below which a step is flagged as an avoided crossing.
    pub overlap_threshold: f64,
}

impl ScanPlan {
    pub fn new(mode: ScanMode, radii: Vec<f64>, space: StateSpace, molecules: [MoleculeParams; 2], curves: usize) -> Self {
        Self { mode, radii, space, molecules, curves, overlap_threshold: 0.5 }
    }

    /// Uniform schedule from `start` to `stop` inclusive in steps of `step`.
    pub fn uniform_radii(start: f64, stop: f64, step: f64) -> Vec<f64> {
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| start + i as f64 * step).collect()
    }

    pub fn validate(&self) -> Result<(), SpectraError> {
        if self.radii.is_empty() {
            return Err(SpectraError::Plan("empty R schedule".into()));
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(SpectraError::Plan("R schedule must be positive".into()));
        }
        if self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SpectraError::Plan("R schedule must be strictly increasing".into()));
        }
        if self.curves == 0 {
            return Err(SpectraError::Plan("at least one curve".into()));
        }
        match self.mode {
            ScanMode::FixedGap { gap } if !(gap > 0.0) => Err(SpectraError::Plan(format!("gap {gap} must be positive"))),
            ScanMode::FixedR1 { r1 } if !(r1 > 0.0) => Err(SpectraError::Plan(format!("R1 {r1} must be positive"))),
            _ => Ok(()),
        }
    }
}

/// One adiabatic curve followed across the scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialCurve {
    pub energies: Vec<f64>,
    pub cos1: Vec<f64>,
    pub cos2: Vec<f64>,
    pub cos2_1: Vec<f64>,
    pub cos2_2: Vec<f64>,
    /// Weight of the high-l manifold in the state.
    pub manifold_weight: Vec<f64>,
    pub sector: Vec<SectorLabel>,
    /// |⟨v(R_k−1)|v(R_k)⟩|; 1 at the first point.
    pub overlaps: Vec<f64>,
    /// Indices k where the step from R_k−1 fell below the overlap threshold.
    pub flags: Vec<usize>,
    /// Dominant coupled label at the largest R.
    pub label: Option<CoupledLabel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanPoint {
    pub r: f64,
    pub geometry: Geometry,
    /// Dipole-dipole estimate between the molecules (GHz) for same-side modes.
    pub vdd_ghz: Option<f64>,
    pub max_residual: f64,
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub plan: ScanPlan,
    pub dim: usize,
    pub points: Vec<ScanPoint>,
    pub curves: Vec<PotentialCurve>,
}

/// Greedy bipartite assignment of `next` states to curves by largest
/// |overlap| with `prev`. Returns (state index per curve, overlap per curve).
pub fn track_step(prev: &[Vec<f64>], next: &[Vec<f64>]) -> Result<(Vec<usize>, Vec<f64>), SpectraError> {
    if prev.len() != next.len() {
        return Err(SpectraError::Tracking(format!("{} curves but {} states", prev.len(), next.len())));
    }
    if prev.iter().chain(next).any(|v| v.len() != prev[0].len()) {
        return Err(SpectraError::Tracking("basis mismatch between scan points".into()));
    }
    let n = prev.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, a) in prev.iter().enumerate() {
        for (j, b) in next.iter().enumerate() {
            let o: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            pairs.push((o.abs(), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut assign = vec![usize::MAX; n];
    let mut overlap = vec![0.0; n];
    let mut used = vec![false; n];
    for (o, i, j) in pairs {
        if assign[i] == usize::MAX && !used[j] {
            assign[i] = j;
            overlap[i] = o;
            used[j] = true;
        }
    }
    Ok((assign, overlap))
}

/// Curve assignment over a whole sequence of eigenvector sets: entry [k][c]
/// is the state index of curve c at point k, plus flagged (c, k) steps.
pub fn track_curves(sets: &[Vec<Vec<f64>>], threshold: f64) -> Result<(Vec<Vec<usize>>, Vec<(usize, usize)>), SpectraError> {
    let Some(first) = sets.first() else { return Ok((Vec::new(), Vec::new())) };
    let mut out = vec![(0..first.len()).collect::<Vec<_>>()];
    let mut flags = Vec::new();
    for k in 1..sets.len() {
        let prev_idx = out.last().unwrap();
        let prev: Vec<Vec<f64>> = prev_idx.iter().map(|&i| sets[k - 1][i].clone()).collect();
        let (assign, ov) = track_step(&prev, &sets[k])?;
        for (c, o) in ov.iter().enumerate() {
            if *o < threshold {
                flags.push((c, k));
            }
        }
        out.push(assign);
    }
    Ok((out, flags))
}

/// Runs `plan` with a fresh engine.
pub fn run_scan(plan: &ScanPlan, options: EngineOptions) -> Result<ScanResult, SpectraError> {
    plan.validate()?;
    let engine = Engine::new(plan.space.clone(), plan.molecules, options)?;
    run_scan_with(&engine, plan)
}

/// Runs `plan` on an existing engine; the engine's space and molecules must
/// match the plan.
pub fn run_scan_with(engine: &Engine, plan: &ScanPlan) -> Result<ScanResult, SpectraError> {
    plan.validate()?;
    if engine.space() != &plan.space || engine.molecules() != &plan.molecules {
        return Err(SpectraError::Plan("engine was built for another space or molecule pair".into()));
    }
    let k = plan.curves.min(engine.dim());
    let selection = Selection::lowest(k);
    let dmax = plan.molecules[0].dipole_au.max(plan.molecules[1].dipole_au);

    struct Solved {
        point: ScanPoint,
        energies: Vec<f64>,
        sectors: Vec<SectorLabel>,
        vectors: Vec<Vec<f64>>,
    }
    let solve = |r: f64| -> Result<Solved, SpectraError> {
        let at = |source| SpectraError::AtRadius { r, source };
        let geometry = plan.mode.geometry(r);
        let h = engine.hamiltonian(&geometry).map_err(at)?;
        let s = diagonalize(engine, &h, &selection).map_err(at)?;
        let vdd_ghz = if plan.mode.is_same_side() {
            crate::rotor::dipole_dipole_estimate(dmax, geometry.separation()).ok()
        } else {
            None
        };
        let pairs: Vec<_> = s.pairs.into_iter().take(k).collect();
        Ok(Solved {
            point: ScanPoint { r, geometry, vdd_ghz, max_residual: s.max_residual },
            energies: pairs.iter().map(|p| p.energy).collect(),
            sectors: pairs.iter().map(|p| p.sector).collect(),
            vectors: pairs.into_iter().map(|p| p.vector.expect("vectors requested")).collect(),
        })
    };

    let mut curves: Vec<PotentialCurve> = (0..k)
        .map(|_| PotentialCurve {
            energies: Vec::new(),
            cos1: Vec::new(),
            cos2: Vec::new(),
            cos2_1: Vec::new(),
            cos2_2: Vec::new(),
            manifold_weight: Vec::new(),
            sector: Vec::new(),
            overlaps: Vec::new(),
            flags: Vec::new(),
            label: None,
        })
        .collect();
    let mut points = Vec::with_capacity(plan.radii.len());
    let mut prev: Option<Vec<Vec<f64>>> = None;
    let chunk = rayon::current_num_threads().max(1);
    for radii in plan.radii.chunks(chunk) {
        let solved: Vec<Solved> = radii.par_iter().map(|&r| solve(r)).collect::<Result<_, _>>()?;
        for s in solved {
            let step = points.len();
            let (assign, ov) = match &prev {
                None => ((0..k).collect(), vec![1.0; k]),
                Some(p) => track_step(p, &s.vectors)?,
            };
            for (c, curve) in curves.iter_mut().enumerate() {
                let j = assign[c];
                let v = &s.vectors[j];
                curve.energies.push(s.energies[j]);
                curve.cos1.push(engine.orientation(0, v));
                curve.cos2.push(engine.orientation(1, v));
                curve.cos2_1.push(engine.alignment(0, v));
                curve.cos2_2.push(engine.alignment(1, v));
                let mw = character_weights(engine, v).iter().filter(|c| c.0 == RydbergCharacter::Manifold).map(|c| c.1).sum();
                curve.manifold_weight.push(mw);
                curve.sector.push(s.sectors[j]);
                curve.overlaps.push(ov[c]);
                if ov[c] < plan.overlap_threshold {
                    curve.flags.push(step);
                }
            }
            let ordered: Vec<Vec<f64>> = assign.iter().map(|&j| s.vectors[j].clone()).collect();
            if step + 1 == plan.radii.len() {
                for (c, v) in ordered.iter().enumerate() {
                    curves[c].label = Some(coupled_label(engine, v));
                }
            }
            prev = Some(ordered);
            points.push(s.point);
        }
    }
    Ok(ScanResult { plan: plan.clone(), dim: engine.dim(), points, curves })
}
