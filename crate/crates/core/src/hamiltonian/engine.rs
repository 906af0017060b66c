use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{enumerate_basis, ElectronState, Geometry, HamiltonianError, ProductBasisState, StateSpace};
use crate::angmath::{GauntKey, GauntTable};
use crate::field::{FieldModel, RadialSource, Side};
use crate::rotor::{cos2_me, dipole_direction_me, dipole_spherical_me, rotor_states, MoleculeParams, RotorState};
use crate::rydberg::{Fnv64, IntegralCache, OrbitalSolver, RadialGrid, RydbergOrbital, Species};
use crate::units::hartree_to_ghz;
use crate::Axis;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineOptions {
    pub field_model: FieldModel,
    /// x-step of the square-root radial grid.
    pub grid_step: f64,
    /// Largest molecule distance the radial grid must cover, bohr.
    pub r_limit: f64,
    /// Smallest allowed distance between two molecules on the same side, bohr.
    pub min_gap: f64,
    /// Largest symmetry sector handed to the dense eigensolver.
    pub dense_ceiling: usize,
    /// Directory of the on-disk integral cache; memory only if unset.
    pub cache_dir: Option<PathBuf>,
    /// Orbitals (n, l) whose radial function is multiplied by −1.
    pub phase_flips: Vec<(u32, u32)>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            field_model: FieldModel::Gradient,
            grid_step: 0.01,
            r_limit: 3200.0,
            min_gap: 150.0,
            dense_ceiling: 20_000,
            cache_dir: None,
            phase_flips: Vec::new(),
        }
    }
}

/// One angular term of ⟨a| F_q |b⟩: kernel index, λ parity and weight.
#[derive(Debug, Clone, Copy)]
struct Term {
    kernel: u32,
    even: bool,
    weight: f64,
}

/// Precomputed basis, orbitals and angular factors for one state space and
/// one pair of molecules. Hamiltonians for any geometry are assembled from
/// it; radial integrals are cached across calls.
pub struct Engine {
    space: StateSpace,
    molecules: [MoleculeParams; 2],
    options: EngineOptions,
    species: Species,
    basis: Vec<ProductBasisState>,
    electrons: Vec<ElectronState>,
    electron_energy: Vec<f64>,
    by_m: HashMap<i32, Vec<usize>>,
    orbitals: Vec<Arc<RydbergOrbital>>,
    rotors: Vec<RotorState>,
    // ⟨r'| n_K |r⟩, ⟨r'|cos θ|r⟩ and ⟨r'|cos²θ|r⟩ over rotor index pairs
    rotor_dipole: [Vec<Complex64>; 3],
    rotor_cos: Vec<f64>,
    rotor_cos2: Vec<f64>,
    index: Vec<u32>,
    // (orbital a, orbital b, λ) with a ≤ b
    kernels: Vec<(usize, usize, u32)>,
    // terms[q + 1][bra * ne + ket]
    terms: [Vec<Vec<Term>>; 3],
    cache: IntegralCache,
    fingerprint: u64,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("space", &self.space)
            .field("molecules", &self.molecules)
            .field("dim", &self.basis.len())
            .finish_non_exhaustive()
    }
}

/// Real symmetric Hamiltonian in GHz, stored as full compressed rows.
#[derive(Debug, Clone)]
pub struct HamiltonianBlock {
    pub geometry: Geometry,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    /// Largest |Im| seen in the Cartesian contraction, relative to max |H|.
    pub imaginary_residue: f64,
}

impl HamiltonianBlock {
    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().zip(&self.vals[a..b]).map(|(&c, &v)| (c as usize, v))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[a..b].binary_search(&(j as u32)) {
            Ok(k) => self.vals[a + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim());
        (0..self.dim()).into_par_iter().map(|i| self.row(i).map(|(j, h)| h * v[j]).sum()).collect()
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for (j, v) in self.row(i) {
                d[i * n + j] = v;
            }
        }
        d
    }

    /// Largest |H_ij − H_ji|.
    pub fn asymmetry(&self) -> f64 {
        (0..self.dim())
            .into_par_iter()
            .map(|i| self.row(i).map(|(j, v)| (v - self.get(j, i)).abs()).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }
}

fn rotor_index(r: RotorState) -> usize {
    (r.n * r.n + r.n + r.m) as usize
}

impl Engine {
    pub fn new(space: StateSpace, molecules: [MoleculeParams; 2], options: EngineOptions) -> Result<Self, HamiltonianError> {
        Self::with_species(space, molecules, options, Species::rubidium())
    }

    pub fn with_species(
        space: StateSpace,
        molecules: [MoleculeParams; 2],
        options: EngineOptions,
        species: Species,
    ) -> Result<Self, HamiltonianError> {
        for m in &molecules {
            MoleculeParams::new(m.b_ghz, m.dipole_au)?;
        }
        if !(options.r_limit > 0.0 && options.min_gap >= 0.0) {
            return Err(HamiltonianError::Config(format!("r_limit {} and min_gap {}", options.r_limit, options.min_gap)));
        }
        let basis = enumerate_basis(&space)?;
        let grid = Arc::new(RadialGrid::for_states(space.largest_n(), options.r_limit, options.grid_step)?);
        let solver = OrbitalSolver::new(species.clone(), grid, space.high_l);

        let orbital_list = space.orbitals();
        let orbitals: Vec<Arc<RydbergOrbital>> = orbital_list
            .par_iter()
            .map(|&(n, l)| {
                let mut o = solver.radial_wavefunction(n, l)?;
                if options.phase_flips.contains(&(n, l)) {
                    o.u.iter_mut().for_each(|v| *v = -*v);
                }
                Ok(Arc::new(o))
            })
            .collect::<Result<_, HamiltonianError>>()?;

        let mut fp = Fnv64::new();
        fp.write(&solver.fingerprint().to_le_bytes());
        let mut flips = options.phase_flips.clone();
        flips.sort();
        for (n, l) in flips {
            fp.write(&n.to_le_bytes());
            fp.write(&l.to_le_bytes());
        }
        let fingerprint = fp.finish();
        let cache = match &options.cache_dir {
            Some(dir) => IntegralCache::on_disk(dir, fingerprint).map_err(crate::rydberg::RydbergError::Cache)?,
            None => IntegralCache::in_memory(fingerprint),
        };

        let electrons = space.electron_states();
        let zero = -0.5 / (space.manifold_n as f64).powi(2);
        let electron_orbital: Vec<usize> =
            electrons.iter().map(|e| orbital_list.iter().position(|&o| o == (e.n, e.l)).unwrap()).collect();
        let electron_energy = electrons
            .iter()
            .map(|e| Ok(hartree_to_ghz(species.rydberg_energy(e.n, e.l)? - zero)))
            .collect::<Result<Vec<_>, HamiltonianError>>()?;
        let mut by_m: HashMap<i32, Vec<usize>> = HashMap::new();
        for (i, e) in electrons.iter().enumerate() {
            by_m.entry(e.m).or_default().push(i);
        }

        let rotors = rotor_states(space.n_max);
        let nr = rotors.len();
        let table = |f: &dyn Fn(RotorState, RotorState) -> Complex64| -> Vec<Complex64> {
            rotors.iter().flat_map(|&b| rotors.iter().map(move |&k| (b, k))).map(|(b, k)| f(b, k)).collect()
        };
        let rotor_dipole = [
            table(&|b, k| dipole_direction_me(Axis::X, b, k)),
            table(&|b, k| dipole_direction_me(Axis::Y, b, k)),
            table(&|b, k| dipole_direction_me(Axis::Z, b, k)),
        ];
        let rotor_cos = table(&|b, k| Complex64::new(dipole_spherical_me(0, b, k), 0.0)).iter().map(|c| c.re).collect();
        let rotor_cos2 = table(&|b, k| Complex64::new(cos2_me(b, k), 0.0)).iter().map(|c| c.re).collect();

        let ne = electrons.len();
        let mut index = vec![u32::MAX; ne * nr * nr];
        let mut e_pos = HashMap::new();
        for (i, e) in electrons.iter().enumerate() {
            e_pos.insert(*e, i);
        }
        for (i, s) in basis.iter().enumerate() {
            let e = e_pos[&s.electron];
            index[(e * nr + rotor_index(s.rotor1)) * nr + rotor_index(s.rotor2)] = i as u32;
        }

        let mut kernels = Vec::new();
        let mut kernel_pos = HashMap::new();
        for a in 0..orbitals.len() {
            for b in a..orbitals.len() {
                let (la, lb) = (orbitals[a].l, orbitals[b].l);
                let mut lam = la.abs_diff(lb);
                while lam <= la + lb {
                    kernel_pos.insert((a, b, lam), kernels.len() as u32);
                    kernels.push((a, b, lam));
                    lam += 2;
                }
            }
        }

        let ls: Vec<i32> = {
            let mut v: Vec<i32> = orbital_list.iter().map(|o| o.1 as i32).collect();
            v.dedup();
            v
        };
        let gaunts = GauntTable::for_multipoles(&ls, 1);
        let terms_for = |q: i32| -> Vec<Vec<Term>> {
            (0..ne * ne)
                .into_par_iter()
                .map(|p| {
                    let (bra, ket) = (&electrons[p / ne], &electrons[p % ne]);
                    if bra.m != ket.m + q {
                        return Vec::new();
                    }
                    let (oa, ob) = (electron_orbital[p / ne], electron_orbital[p % ne]);
                    let key_orbs = (oa.min(ob), oa.max(ob));
                    let (l1, l2) = (bra.l as i32, ket.l as i32);
                    let mut out = Vec::new();
                    let mut lam = (l1 - l2).abs();
                    while lam <= l1 + l2 {
                        if !(q != 0 && lam == 0) {
                            let g = gaunts.get(GauntKey::new(l1, bra.m, lam, q, l2, ket.m));
                            if g != 0.0 {
                                let lf = lam as f64;
                                let c = if q == 0 {
                                    ((2.0 * lf + 1.0) / (4.0 * PI)).sqrt()
                                } else {
                                    2f64.sqrt() * ((2.0 * lf + 1.0) / (4.0 * PI)).sqrt() * (lf * (lf + 1.0)).sqrt() / 2.0
                                };
                                out.push(Term {
                                    kernel: kernel_pos[&(key_orbs.0, key_orbs.1, lam as u32)],
                                    even: lam % 2 == 0,
                                    weight: 4.0 * PI / (2.0 * lf + 1.0) * c * g,
                                });
                            }
                        }
                        lam += 2;
                    }
                    out
                })
                .collect()
        };
        let terms = [terms_for(-1), terms_for(0), terms_for(1)];

        Ok(Self {
            space,
            molecules,
            options,
            species,
            basis,
            electrons,
            electron_energy,
            by_m,
            orbitals,
            rotors,
            rotor_dipole,
            rotor_cos,
            rotor_cos2,
            index,
            kernels,
            terms,
            cache,
            fingerprint,
        })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn molecules(&self) -> &[MoleculeParams; 2] {
        &self.molecules
    }

    pub fn options(&self) -> &EngineOptions {
        &self.options
    }

    pub fn species(&self) -> &Species {
        &self.species
    }

    pub fn basis(&self) -> &[ProductBasisState] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn orbitals(&self) -> &[Arc<RydbergOrbital>] {
        &self.orbitals
    }

    pub fn cache(&self) -> &IntegralCache {
        &self.cache
    }

    /// Fingerprint of species, grid, high-l potential and phase flips.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Electron energy in GHz relative to the hydrogenic manifold.
    pub fn electron_energy(&self, e: &ElectronState) -> Option<f64> {
        self.electrons.iter().position(|x| x == e).map(|i| self.electron_energy[i])
    }

    /// Whether an electron state belongs to the high-l manifold.
    pub fn is_manifold(&self, e: &ElectronState) -> bool {
        self.space.include_manifold && e.n == self.space.manifold_n && e.l >= self.space.manifold_l_min
    }

    /// Position of a product state in the basis.
    pub fn index_of(&self, s: &ProductBasisState) -> Option<usize> {
        let e = self.electrons.binary_search(&s.electron).ok()?;
        if s.rotor1.n > self.space.n_max || s.rotor2.n > self.space.n_max {
            return None;
        }
        let nr = self.rotors.len();
        match self.index[(e * nr + rotor_index(s.rotor1)) * nr + rotor_index(s.rotor2)] {
            u32::MAX => None,
            i => Some(i as usize),
        }
    }

    /// Zeroth-order energy of a basis state in GHz.
    pub fn unperturbed_energy(&self, s: &ProductBasisState) -> f64 {
        let e = self.electrons.binary_search(&s.electron).expect("electron state in the space");
        self.electron_energy[e]
            + crate::rotor::rotational_energy(&self.molecules[0], s.rotor1.n)
            + crate::rotor::rotational_energy(&self.molecules[1], s.rotor2.n)
    }

    /// (L_λ, T_λ) radial kernels for every orbital pair at distance `r`.
    fn radial_kernels(&self, r: f64) -> Result<Vec<(f64, f64)>, HamiltonianError> {
        if r > self.options.r_limit {
            return Err(HamiltonianError::Config(format!("distance {r} beyond r_limit {}", self.options.r_limit)));
        }
        let out = self
            .kernels
            .par_iter()
            .map(|&(a, b, lam)| {
                let (i_in, i_out) = self.cache.integrals(&self.orbitals[a], &self.orbitals[b], lam, r)?;
                let lf = lam as f64;
                let inner = r.powi(-(lam as i32 + 2));
                let outer = r.powi(lam as i32 - 1);
                Ok((-(lf + 1.0) * inner * i_in + lf * outer * i_out, inner * i_in + outer * i_out))
            })
            .collect::<Result<Vec<_>, HamiltonianError>>()?;
        self.cache.persist(r).map_err(crate::rydberg::RydbergError::Cache)?;
        Ok(out)
    }

    /// Real tables ⟨a| F_q |b⟩ (hartree/e·bohr⁻²) over electron index pairs
    /// for a molecule at distance `r` on `side`.
    fn field_tables(&self, kernels: &[(f64, f64)], side: Side) -> [Vec<f64>; 3] {
        let model = self.options.field_model;
        let build = |qi: usize| -> Vec<f64> {
            self.terms[qi]
                .par_iter()
                .map(|ts| {
                    ts.iter()
                        .map(|t| {
                            let (l, tr) = kernels[t.kernel as usize];
                            let k = match (qi, model) {
                                (1, _) => l,
                                (_, FieldModel::Gradient) => tr,
                                (_, FieldModel::RadialKernel) => 2.0 * l,
                            };
                            let parity = if side == Side::Minus && t.even { -1.0 } else { 1.0 };
                            parity * t.weight * k
                        })
                        .sum()
                })
                .collect()
        };
        [build(0), build(1), build(2)]
    }

    /// ⟨bra| F_q |ket⟩ for electron states of the space at an on-axis site.
    pub fn electron_field(&self, q: i32, r: f64, side: Side, bra: &ElectronState, ket: &ElectronState) -> Result<f64, HamiltonianError> {
        let ne = self.electrons.len();
        let (Ok(a), Ok(b)) = (self.electrons.binary_search(bra), self.electrons.binary_search(ket)) else {
            return Err(HamiltonianError::Config("electron state outside the space".into()));
        };
        if !(-1..=1).contains(&q) {
            return Ok(0.0);
        }
        let kernels = self.radial_kernels(r)?;
        Ok(self.field_tables(&kernels, side)[(q + 1) as usize][a * ne + b])
    }

    /// Assembles H(geometry) in GHz.
    pub fn hamiltonian(&self, geometry: &Geometry) -> Result<HamiltonianBlock, HamiltonianError> {
        let dmax = self.molecules[0].dipole_au.max(self.molecules[1].dipole_au);
        geometry.validate(self.options.min_gap, dmax)?;
        let k1 = self.radial_kernels(geometry.r1)?;
        let f1 = self.field_tables(&k1, geometry.side1);
        let f2 = if geometry.r2 == geometry.r1 && geometry.side2 == geometry.side1 {
            f1.clone()
        } else if geometry.r2 == geometry.r1 {
            self.field_tables(&k1, geometry.side2)
        } else {
            self.field_tables(&self.radial_kernels(geometry.r2)?, geometry.side2)
        };
        let sites = [(geometry.r1, geometry.side1, &f1), (geometry.r2, geometry.side2, &f2)];

        let ne = self.electrons.len();
        let nr = self.rotors.len();
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let to_ghz = hartree_to_ghz(1.0);
        let columns: Vec<(Vec<(u32, f64)>, f64)> = self
            .basis
            .par_iter()
            .enumerate()
            .map(|(i, ket)| {
                let ei = self.electrons.binary_search(&ket.electron).unwrap();
                let mut col: Vec<(u32, f64)> = vec![(i as u32, self.unperturbed_energy(ket))];
                let mut worst_im: f64 = 0.0;
                for (mol, &(r, side, f)) in sites.iter().enumerate() {
                    let d = self.molecules[mol].dipole_au;
                    if d == 0.0 {
                        continue;
                    }
                    let (rk, other) = if mol == 0 { (ket.rotor1, ket.rotor2) } else { (ket.rotor2, ket.rotor1) };
                    for nb in [rk.n - 1, rk.n + 1] {
                        if nb < 0 || nb > self.space.n_max {
                            continue;
                        }
                        for mb in (rk.m - 1).max(-nb)..=(rk.m + 1).min(nb) {
                            let rb = RotorState { n: nb, m: mb };
                            let rp = rotor_index(rb) * nr + rotor_index(rk);
                            let n_k = [self.rotor_dipole[0][rp], self.rotor_dipole[1][rp], self.rotor_dipole[2][rp]];
                            let m_e = ket.electron.m + rk.m - mb;
                            let Some(partners) = self.by_m.get(&m_e) else { continue };
                            for &eb in partners {
                                let (r1, r2) = if mol == 0 { (rb, other) } else { (other, rb) };
                                let j = self.index[(eb * nr + rotor_index(r1)) * nr + rotor_index(r2)];
                                if j == u32::MAX {
                                    continue;
                                }
                                let p = eb * ne + ei;
                                let (fm, f0, fp) = (f[0][p], f[1][p], f[2][p]);
                                let fk = [
                                    Complex64::new(s2 * (fm - fp), 0.0),
                                    Complex64::new(0.0, s2 * (fm + fp)),
                                    Complex64::new(f0, 0.0),
                                ];
                                let mut v: Complex64 = (0..3).map(|k| n_k[k] * fk[k]).sum();
                                if eb == ei {
                                    v += Complex64::new(side.sign() / (r * r) * n_k[2].re, 0.0);
                                }
                                let v = -d * v * to_ghz;
                                worst_im = worst_im.max(v.im.abs());
                                if v.re != 0.0 {
                                    col.push((j, v.re));
                                }
                            }
                        }
                    }
                }
                col.sort_by_key(|e| e.0);
                // merge repeated entries (both molecules can reach the same state only via distinct rotors)
                col.dedup_by(|b, a| {
                    if a.0 == b.0 {
                        a.1 += b.1;
                        true
                    } else {
                        false
                    }
                });
                (col, worst_im)
            })
            .collect();

        let mut row_ptr = Vec::with_capacity(columns.len() + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut worst_im: f64 = 0.0;
        for (c, im) in columns {
            worst_im = worst_im.max(im);
            for (j, v) in c {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        // rows were built as columns; the symmetry check makes that harmless
        let block = HamiltonianBlock { geometry: *geometry, row_ptr, cols, vals, imaginary_residue: 0.0 };
        let scale = block.max_abs().max(f64::MIN_POSITIVE);
        let block = HamiltonianBlock { imaginary_residue: worst_im / scale, ..block };
        if block.imaginary_residue > 1e-12 {
            return Err(HamiltonianError::Invariant(format!("imaginary residue {:.3e} of max |H|", block.imaginary_residue)));
        }
        let asym = block.asymmetry() / scale;
        if asym > 1e-12 {
            return Err(HamiltonianError::Invariant(format!("asymmetry {asym:.3e} of max |H|")));
        }
        Ok(block)
    }

    /// ⟨v| cos θ_i |v⟩ for molecule `mol` ∈ {0, 1}.
    pub fn orientation(&self, mol: usize, v: &[f64]) -> f64 {
        self.rotor_expectation(mol, v, &self.rotor_cos, 1)
    }

    /// ⟨v| cos²θ_i |v⟩ for molecule `mol` ∈ {0, 1}.
    pub fn alignment(&self, mol: usize, v: &[f64]) -> f64 {
        self.rotor_expectation(mol, v, &self.rotor_cos2, 2)
    }

    fn rotor_expectation(&self, mol: usize, v: &[f64], table: &[f64], reach: i32) -> f64 {
        assert_eq!(v.len(), self.basis.len());
        assert!(mol < 2);
        let nr = self.rotors.len();
        self.basis
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                if v[i] == 0.0 {
                    return 0.0;
                }
                let e = self.electrons.binary_search(&s.electron).unwrap();
                let rk = if mol == 0 { s.rotor1 } else { s.rotor2 };
                let mut acc = 0.0;
                for nb in (rk.n - reach).max(rk.m.abs())..=(rk.n + reach).min(self.space.n_max) {
                    let rb = RotorState { n: nb, m: rk.m };
                    let t = table[rotor_index(rb) * nr + rotor_index(rk)];
                    if t == 0.0 {
                        continue;
                    }
                    let (r1, r2) = if mol == 0 { (rb, s.rotor2) } else { (s.rotor1, rb) };
                    let j = self.index[(e * nr + rotor_index(r1)) * nr + rotor_index(r2)];
                    if j != u32::MAX {
                        acc += v[j as usize] * t * v[i];
                    }
                }
                acc
            })
            .sum()
    }

    /// Symmetry operations commuting with H at `geometry`, as index maps
    /// with phases: the reflection through a plane containing the axis
    /// (M_J = 0 only) and, for mirror-symmetric geometries of identical
    /// molecules, inversion combined with exchange of the molecules.
    pub(crate) fn symmetry_maps(&self, geometry: &Geometry) -> Vec<(&'static str, Vec<(u32, f64)>)> {
        let mut out = Vec::new();
        if self.space.m_j == 0 {
            let map = self
                .basis
                .iter()
                .map(|s| {
                    let img = ProductBasisState {
                        electron: ElectronState { m: -s.electron.m, ..s.electron },
                        rotor1: RotorState { n: s.rotor1.n, m: -s.rotor1.m },
                        rotor2: RotorState { n: s.rotor2.n, m: -s.rotor2.m },
                    };
                    (self.index_of(&img).unwrap() as u32, 1.0)
                })
                .collect();
            out.push(("sigma", map));
        }
        if geometry.is_symmetric() && self.molecules[0] == self.molecules[1] {
            let map = self
                .basis
                .iter()
                .map(|s| {
                    let img = ProductBasisState { electron: s.electron, rotor1: s.rotor2, rotor2: s.rotor1 };
                    let sign = if (s.electron.l as i32 + s.rotor1.n + s.rotor2.n) % 2 == 0 { 1.0 } else { -1.0 };
                    (self.index_of(&img).unwrap() as u32, sign)
                })
                .collect();
            out.push(("exchange", map));
        }
        out
    }
}
