//! Rydberg-electron radial physics.
//!
//! Reduced radial functions u(r) = r·R(r) are tabulated on a grid uniform in
//! x = √r and obtained by inward Numerov integration at the quantum-defect
//! energy. With u = √x·y the radial equation becomes
//! y'' = [8x²(V_l(r) + l(l+1)/2r² − E) + 3/(4x²)]·y, which has no first
//! derivative term.

mod cache;
mod species;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spline::CubicSpline;

pub use cache::{IntegralCache, IntegralKey};
pub use species::{ModelPotentialChannel, RitzDefect, Species};

#[derive(Debug, Error)]
pub enum RydbergError {
    #[error("radius {r} outside the domain r > 0")]
    Domain { r: f64 },
    #[error("invalid quantum numbers n={n}, l={l}")]
    QuantumNumbers { n: u32, l: u32 },
    #[error("radius {r} bohr outside the radial grid (0, {r_max}]")]
    OutsideGrid { r: f64, r_max: f64 },
    #[error("grid ends at {r_max} bohr, below the required {required}")]
    GridTooShort { r_max: f64, required: f64 },
    #[error("orbitals live on different grids")]
    GridMismatch,
    #[error("radial solver failed for n={n}, l={l}: {nodes} nodes (expected {expected}), norm² {norm}, tail ratio {tail:.3e}")]
    Solver { n: u32, l: u32, nodes: usize, expected: usize, norm: f64, tail: f64 },
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("cache i/o: {0}")]
    Cache(#[from] std::io::Error),
}

/// 64-bit FNV-1a, stable across runs and platforms.
pub(crate) struct Fnv64(u64);

impl Fnv64 {
    pub(crate) fn new() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }
    pub(crate) fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    pub(crate) fn write_f64(&mut self, v: f64) {
        self.write(&v.to_bits().to_le_bytes());
    }
    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}

/// Outer start of the inward integration, 2n(n+15) bohr.
pub fn integration_start(n: u32) -> f64 {
    2.0 * n as f64 * (n as f64 + 15.0)
}

/// Radial grid r_i = (i·h)², i = 1..=N, uniform in x = √r.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    step: f64,
    x: Vec<f64>,
    r: Vec<f64>,
}

impl RadialGrid {
    /// Square-root spaced grid with x-step `step` reaching at least `r_max`.
    pub fn sqrt_spaced(step: f64, r_max: f64) -> Result<Self, RydbergError> {
        if !(step > 0.0 && step.is_finite()) || !(r_max > 0.0 && r_max.is_finite()) {
            return Err(RydbergError::Grid(format!("step {step}, r_max {r_max}")));
        }
        let count = (r_max.sqrt() / step).ceil() as usize;
        if count < 8 {
            return Err(RydbergError::Grid(format!("only {count} points")));
        }
        let x: Vec<f64> = (1..=count).map(|i| i as f64 * step).collect();
        let r = x.iter().map(|v| v * v).collect();
        Ok(Self { step, x, r })
    }

    /// Grid for principal quantum numbers up to `n_max` that also reaches
    /// `extra_r` (e.g. the largest molecule distance of a scan).
    pub fn for_states(n_max: u32, extra_r: f64, step: f64) -> Result<Self, RydbergError> {
        let r = integration_start(n_max).max(extra_r) * 1.05;
        Self::sqrt_spaced(step, r)
    }

    pub fn spacing_rule(&self) -> &'static str {
        "sqrt"
    }
    pub fn step(&self) -> f64 {
        self.step
    }
    pub fn points(&self) -> &[f64] {
        &self.r
    }
    pub fn x(&self) -> &[f64] {
        &self.x
    }
    pub fn len(&self) -> usize {
        self.r.len()
    }
    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    pub fn hash(&self) -> u64 {
        let mut h = Fnv64::new();
        h.write(self.spacing_rule().as_bytes());
        h.write_f64(self.step);
        h.write(&(self.len() as u64).to_le_bytes());
        h.finish()
    }

    /// ∫ f(r) dr = ∫ f(x²)·2x dx for samples on the grid, with f(0) = 0.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.len());
        let mut g = Vec::with_capacity(f.len() + 1);
        g.push(0.0);
        g.extend(f.iter().zip(&self.x).map(|(v, x)| v * 2.0 * x));
        uniform_composite(&g, self.step)
    }
}

/// Composite Newton-Cotes on uniformly spaced samples: Simpson, closing with
/// a 3/8 panel when the interval count is odd.
fn uniform_composite(f: &[f64], h: f64) -> f64 {
    let m = f.len().saturating_sub(1);
    match m {
        0 => 0.0,
        1 => 0.5 * h * (f[0] + f[1]),
        _ => {
            let (simpson_end, tail) = if m % 2 == 0 { (m, false) } else { (m - 3, true) };
            let mut s = 0.0;
            let mut i = 0;
            while i < simpson_end {
                s += f[i] + 4.0 * f[i + 1] + f[i + 2];
                i += 2;
            }
            s *= h / 3.0;
            if tail {
                let j = simpson_end;
                s += 3.0 * h / 8.0 * (f[j] + 3.0 * f[j + 1] + 3.0 * f[j + 2] + f[j + 3]);
            }
            s
        }
    }
}

/// Weights for ∫₀^{t·h} of the cubic through nodes at offsets −1, 0, 1, 2
/// (in units of h) relative to the left end of the partial interval.
fn partial_cubic_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    [
        -(t4 / 4.0 - t3 + t2) / 6.0,
        (t4 / 4.0 - 2.0 * t3 / 3.0 - t2 / 2.0 + 2.0 * t) / 2.0,
        -(t4 / 4.0 - t3 / 3.0 - t2) / 2.0,
        (t4 / 4.0 - t2 / 2.0) / 6.0,
    ]
}

/// Which potential generates l ≥ 3 orbitals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HighLPotential {
    #[default]
    ModelPotential,
    Hydrogenic,
}

/// A bound Rydberg orbital tabulated on a shared grid.
#[derive(Debug, Clone)]
pub struct RydbergOrbital {
    pub n: u32,
    pub l: u32,
    pub energy: f64,
    pub u: Vec<f64>,
    grid: Arc<RadialGrid>,
}

impl RydbergOrbital {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn norm_squared(&self) -> f64 {
        let f: Vec<f64> = self.u.iter().map(|u| u * u).collect();
        self.grid.integrate(&f)
    }

    /// ⟨r^p⟩ over this orbital.
    pub fn expectation_r_pow(&self, p: i32) -> f64 {
        let f: Vec<f64> = self.u.iter().zip(self.grid.points()).map(|(u, r)| u * u * r.powi(p)).collect();
        self.grid.integrate(&f)
    }

    pub fn overlap(&self, other: &Self) -> Result<f64, RydbergError> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && *self.grid != *other.grid {
            return Err(RydbergError::GridMismatch);
        }
        let f: Vec<f64> = self.u.iter().zip(&other.u).map(|(a, b)| a * b).collect();
        Ok(self.grid.integrate(&f))
    }

    /// Number of sign changes of u, ignoring numerically negligible values.
    pub fn node_count(&self) -> usize {
        count_nodes(&self.u)
    }

    /// Natural cubic spline of u as a function of x = √r.
    pub fn spline_in_x(&self) -> CubicSpline {
        let mut x = Vec::with_capacity(self.u.len() + 1);
        let mut y = Vec::with_capacity(self.u.len() + 1);
        x.push(0.0);
        y.push(0.0);
        x.extend_from_slice(self.grid.x());
        y.extend_from_slice(&self.u);
        CubicSpline::natural(&x, &y)
    }
}

fn count_nodes(u: &[f64]) -> usize {
    let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-10 * peak;
    let mut last = 0.0f64;
    let mut nodes = 0;
    for &v in u {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            nodes += 1;
        }
        last = v;
    }
    nodes
}

/// Builds orbitals for one species on one grid.
#[derive(Debug, Clone)]
pub struct OrbitalSolver {
    pub species: Species,
    pub grid: Arc<RadialGrid>,
    pub high_l: HighLPotential,
}

impl OrbitalSolver {
    pub fn new(species: Species, grid: Arc<RadialGrid>, high_l: HighLPotential) -> Self {
        Self { species, grid, high_l }
    }

    fn potential(&self, l: u32, r: f64) -> f64 {
        if l >= 3 && self.high_l == HighLPotential::Hydrogenic {
            -1.0 / r
        } else {
            self.species.model_potential(l, r).expect("grid radii are positive")
        }
    }

    /// Stable fingerprint of everything that determines the orbitals.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv64::new();
        h.write(&self.species.fingerprint().to_le_bytes());
        h.write(&self.grid.hash().to_le_bytes());
        h.write(&[self.high_l as u8]);
        h.finish()
    }

    pub fn radial_wavefunction(&self, n: u32, l: u32) -> Result<RydbergOrbital, RydbergError> {
        radial_wavefunction_with(self, n, l)
    }
}

/// Orbital (n, l) of `species` on `grid` using the model potential for all l.
pub fn radial_wavefunction(species: &Species, n: u32, l: u32, grid: Arc<RadialGrid>) -> Result<RydbergOrbital, RydbergError> {
    OrbitalSolver::new(species.clone(), grid, HighLPotential::ModelPotential).radial_wavefunction(n, l)
}

fn radial_wavefunction_with(solver: &OrbitalSolver, n: u32, l: u32) -> Result<RydbergOrbital, RydbergError> {
    if l >= n {
        return Err(RydbergError::QuantumNumbers { n, l });
    }
    let grid = &solver.grid;
    let energy = if l >= 3 && solver.high_l == HighLPotential::Hydrogenic {
        -0.5 / (n as f64 * n as f64)
    } else {
        solver.species.rydberg_energy(n, l)?
    };
    let r_start = integration_start(n);
    let x_start = r_start.sqrt();
    let h = grid.step();
    let len = grid.len();
    // index of the last point not beyond r_start
    let start = ((x_start / h).floor() as usize).min(len).saturating_sub(1);
    if start < 4 {
        return Err(RydbergError::Grid("grid too coarse for this state".into()));
    }
    let ll = (l * (l + 1)) as f64;
    let x = grid.x();
    let r = grid.points();
    let g = |i: usize| 2.0 * (solver.potential(l, r[i]) + ll / (2.0 * r[i] * r[i]) - energy);
    let q = |i: usize| 4.0 * r[i] * g(i) + 3.0 / (4.0 * r[i]);
    let h12 = h * h / 12.0;

    let mut y = vec![0.0; len];
    y[start] = 0.0;
    y[start - 1] = 1e-60;
    let mut q_next = q(start);
    let mut q_cur = q(start - 1);
    let mut seen_allowed = false;
    let mut cut = 0usize;
    let mut i = start - 1;
    while i > 0 {
        let q_prev = q(i - 1);
        let yp = (2.0 * y[i] * (1.0 + 5.0 * h12 * q_cur) - y[i + 1] * (1.0 - h12 * q_next)) / (1.0 - h12 * q_prev);
        y[i - 1] = yp;
        if g(i - 1) < 0.0 {
            seen_allowed = true;
        } else if seen_allowed && l > 0 {
            // inner forbidden region: stop once u grows inward or turns sign
            let u_prev = yp.abs() * x[i - 1].sqrt();
            let u_here = y[i].abs() * x[i].sqrt();
            if u_prev > u_here || yp * y[i] <= 0.0 {
                cut = i;
                break;
            }
        }
        if yp.abs() > 1e200 {
            for v in &mut y[i - 1..=start] {
                *v *= 1e-200;
            }
        }
        q_next = q_cur;
        q_cur = q_prev;
        i -= 1;
    }
    let mut u: Vec<f64> = y.iter().zip(x).map(|(y, x)| y * x.sqrt()).collect();
    if cut > 0 {
        for v in &mut u[..cut] {
            *v = 0.0;
        }
    }
    let f: Vec<f64> = u.iter().map(|v| v * v).collect();
    let norm = grid.integrate(&f);
    let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tail = if peak > 0.0 { u[start - 1].abs() / peak } else { f64::INFINITY };
    let nodes = count_nodes(&u);
    let expected = (n - l - 1) as usize;
    if !(norm.is_finite() && norm > 0.0) || nodes != expected || tail > 1e-3 {
        return Err(RydbergError::Solver { n, l, nodes, expected, norm, tail });
    }
    let outer_sign = u.iter().rev().find(|v| v.abs() > 1e-6 * peak).map_or(1.0, |v| v.signum());
    let scale = outer_sign / norm.sqrt();
    for v in &mut u {
        *v *= scale;
    }
    Ok(RydbergOrbital { n, l, energy, u, grid: grid.clone() })
}

/// Returns (∫₀^R u_bra r^λ u_ket dr, ∫_R^∞ u_bra r^−(λ+1) u_ket dr).
pub fn radial_multipole_integrals(bra: &RydbergOrbital, ket: &RydbergOrbital, lambda: u32, big_r: f64) -> Result<(f64, f64), RydbergError> {
    if !Arc::ptr_eq(&bra.grid, &ket.grid) && *bra.grid != *ket.grid {
        return Err(RydbergError::GridMismatch);
    }
    let grid = &bra.grid;
    if !(big_r > 0.0) || big_r > grid.r_max() {
        return Err(RydbergError::OutsideGrid { r: big_r, r_max: grid.r_max() });
    }
    let h = grid.step();
    let n = grid.len();
    let lam = lambda as i32;
    // samples with a virtual node at x = 0 (index 0)
    let mut fin = Vec::with_capacity(n + 1);
    let mut fout = Vec::with_capacity(n + 1);
    fin.push(0.0);
    fout.push(0.0);
    for ((a, b), (&r, &x)) in bra.u.iter().zip(&ket.u).zip(grid.points().iter().zip(grid.x())) {
        let p = a * b * 2.0 * x;
        fin.push(p * r.powi(lam));
        fout.push(if p == 0.0 { 0.0 } else { p * r.powi(-(lam + 1)) });
    }
    let xr = big_r.sqrt();
    let mut j = (xr / h).floor() as usize;
    // keep the four-point stencil j−1..j+2 inside 0..=n
    j = j.clamp(1, n - 2);
    let t = xr / h - j as f64;
    let w = partial_cubic_weights(t);
    let partial = |f: &[f64]| h * (w[0] * f[j - 1] + w[1] * f[j] + w[2] * f[j + 1] + w[3] * f[j + 2]);
    let full_w = partial_cubic_weights(1.0);
    let full = |f: &[f64]| h * (full_w[0] * f[j - 1] + full_w[1] * f[j] + full_w[2] * f[j + 1] + full_w[3] * f[j + 2]);
    let inner = uniform_composite(&fin[..=j], h) + partial(&fin);
    let outer = (full(&fout) - partial(&fout)) + uniform_composite(&fout[j + 1..], h);
    Ok((inner, outer))
}
