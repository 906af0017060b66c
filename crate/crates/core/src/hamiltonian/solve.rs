
use faer::{Mat, Side as FaerSide};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Engine, HamiltonianBlock, HamiltonianError};

/// Which eigenpairs to keep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// The k lowest eigenvalues.
    pub lowest: usize,
    /// Every eigenvalue inside [lo, hi] GHz.
    pub window: Option<(f64, f64)>,
    pub vectors: bool,
}

impl Selection {
    pub fn lowest(k: usize) -> Self {
        Self { lowest: k, window: None, vectors: true }
    }

    pub fn window(lo: f64, hi: f64) -> Self {
        Self { lowest: 0, window: Some((lo, hi)), vectors: true }
    }

    pub fn values_only(mut self) -> Self {
        self.vectors = false;
        self
    }
}

/// Characters of a symmetry sector under the reflection and exchange
/// operations; `None` when the operation does not apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorLabel {
    pub sigma: Option<i8>,
    pub exchange: Option<i8>,
}

impl std::fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = |v: Option<i8>| match v {
            Some(1) => "+",
            Some(_) => "-",
            None => "*",
        };
        write!(f, "({},{})", c(self.sigma), c(self.exchange))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Eigenpair {
    pub energy: f64,
    pub sector: SectorLabel,
    /// Eigenvector in the product basis, if requested.
    pub vector: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Every eigenvalue, ascending, GHz.
    pub all_energies: Vec<f64>,
    /// Selected eigenpairs, ascending in energy.
    pub pairs: Vec<Eigenpair>,
    pub sector_dims: Vec<(SectorLabel, usize)>,
    /// Weight of the high-l manifold for each entry of `all_energies`; only
    /// when vectors were requested.
    pub manifold_weights: Option<Vec<f64>>,
    /// Largest ‖Hv − Ev‖ / max|E| over the returned vectors.
    pub max_residual: f64,
}

/// Orthonormal symmetry-adapted basis of one sector: for every product
/// state the column it contributes to and its coefficient.
struct SectorBasis {
    label: SectorLabel,
    dim: usize,
    entries: Vec<Option<(u32, f64)>>,
    columns: Vec<Vec<(u32, f64)>>,
}

fn sector_bases(engine: &Engine, block: &HamiltonianBlock) -> Vec<SectorBasis> {
    let maps = engine.symmetry_maps(&block.geometry);
    let n = block.dim();
    // group elements as products of the generators: (index map, phase) per state
    let mut elements: Vec<(Vec<(u32, f64)>, Vec<i8>)> = vec![((0..n as u32).map(|i| (i, 1.0)).collect(), vec![0; maps.len()])];
    for (gi, (_, map)) in maps.iter().enumerate() {
        let mut next = elements.clone();
        for (el, powers) in &elements {
            let composed: Vec<(u32, f64)> = el.iter().map(|&(j, s)| (map[j as usize].0, s * map[j as usize].1)).collect();
            let mut p = powers.clone();
            p[gi] = 1;
            next.push((composed, p));
        }
        elements = next;
    }
    let names: Vec<&str> = maps.iter().map(|m| m.0).collect();
    let n_sectors = 1usize << maps.len();
    (0..n_sectors)
        .map(|mask| {
            let chars: Vec<f64> = (0..maps.len()).map(|g| if mask >> g & 1 == 1 { -1.0 } else { 1.0 }).collect();
            let get = |name: &str| names.iter().position(|&x| x == name).map(|g| chars[g] as i8);
            let label = SectorLabel { sigma: get("sigma"), exchange: get("exchange") };
            let mut entries = vec![None; n];
            let mut columns = Vec::new();
            let mut seen = vec![false; n];
            for rep in 0..n {
                if seen[rep] {
                    continue;
                }
                let mut acc: Vec<(u32, f64)> = Vec::with_capacity(elements.len());
                for (el, powers) in &elements {
                    let chi: f64 = powers.iter().zip(&chars).map(|(&p, &c)| if p == 1 { c } else { 1.0 }).product();
                    let (j, s) = el[rep];
                    seen[j as usize] = true;
                    match acc.iter_mut().find(|e| e.0 == j) {
                        Some(e) => e.1 += chi * s,
                        None => acc.push((j, chi * s)),
                    }
                }
                acc.retain(|e| e.1.abs() > 1e-12);
                if acc.is_empty() {
                    continue;
                }
                let norm = acc.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
                let col = columns.len() as u32;
                for e in &mut acc {
                    e.1 /= norm;
                    entries[e.0 as usize] = Some((col, e.1));
                }
                columns.push(acc);
            }
            SectorBasis { label, dim: columns.len(), entries, columns }
        })
        .collect()
}

fn sector_matrix(block: &HamiltonianBlock, s: &SectorBasis) -> Mat<f64> {
    let mut m = Mat::<f64>::zeros(s.dim, s.dim);
    for (c, col) in s.columns.iter().enumerate() {
        for &(i, w) in col {
            for (j, h) in block.row(i as usize) {
                if let Some((cj, coef)) = s.entries[j] {
                    m[(cj as usize, c)] += coef * h * w;
                }
            }
        }
    }
    m
}

/// Diagonalizes `block` sector by sector. Every eigenvalue is returned;
/// vectors only for the selection.
pub fn diagonalize(engine: &Engine, block: &HamiltonianBlock, selection: &Selection) -> Result<Spectrum, HamiltonianError> {
    if block.dim() != engine.dim() {
        return Err(HamiltonianError::Config(format!("block dimension {} does not match the basis {}", block.dim(), engine.dim())));
    }
    let sectors = sector_bases(engine, block);
    let ceiling = engine.options().dense_ceiling;
    if let Some(s) = sectors.iter().find(|s| s.dim > ceiling) {
        return Err(HamiltonianError::TooLarge { dim: s.dim, ceiling });
    }
    let solved = sectors
        .par_iter()
        .filter(|s| s.dim > 0)
        .map(|s| {
            let m = sector_matrix(block, s);
            let fail = |e: faer::linalg::evd::EvdError| HamiltonianError::Solver { sector: s.label.to_string(), dim: s.dim, detail: format!("{e:?}") };
            if selection.vectors {
                let evd = m.self_adjoint_eigen(FaerSide::Lower).map_err(fail)?;
                let vals: Vec<f64> = (0..s.dim).map(|i| evd.S()[i]).collect();
                let u = evd.U().to_owned();
                Ok((s, vals, Some(u)))
            } else {
                let vals = m.self_adjoint_eigenvalues(FaerSide::Lower).map_err(fail)?;
                Ok((s, vals, None))
            }
        })
        .collect::<Result<Vec<_>, HamiltonianError>>()?;

    let mut all: Vec<(f64, usize, usize)> = Vec::new();
    for (si, (_, vals, _)) in solved.iter().enumerate() {
        for (k, &v) in vals.iter().enumerate() {
            all.push((v, si, k));
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let all_energies: Vec<f64> = all.iter().map(|a| a.0).collect();
    // every column of a sector basis has one electronic character
    let manifold_weights = selection.vectors.then(|| {
        let per_sector: Vec<Vec<f64>> = solved
            .iter()
            .map(|(s, _, u)| {
                let u = u.as_ref().unwrap();
                let in_manifold: Vec<bool> = s.columns.iter().map(|col| engine.is_manifold(&engine.basis()[col[0].0 as usize].electron)).collect();
                (0..s.dim).map(|k| (0..s.dim).filter(|&c| in_manifold[c]).map(|c| u[(c, k)] * u[(c, k)]).sum()).collect()
            })
            .collect();
        all.iter().map(|&(_, si, k)| per_sector[si][k]).collect()
    });
    let scale = all_energies.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);

    let mut pairs = Vec::new();
    for (rank, &(v, si, k)) in all.iter().enumerate() {
        let inside = selection.window.is_some_and(|(lo, hi)| v >= lo && v <= hi);
        if rank >= selection.lowest && !inside {
            continue;
        }
        let (s, _, u) = &solved[si];
        let vector = u.as_ref().map(|u| {
            let mut full = vec![0.0; block.dim()];
            for (j, e) in s.entries.iter().enumerate() {
                if let Some((c, coef)) = e {
                    full[j] = coef * u[(*c as usize, k)];
                }
            }
            full
        });
        pairs.push(Eigenpair { energy: v, sector: s.label, vector });
    }

    let max_residual = pairs
        .par_iter()
        .filter_map(|p| p.vector.as_ref().map(|v| (p.energy, v)))
        .map(|(e, v)| {
            let hv = block.matvec(v);
            hv.iter().zip(v).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt() / scale
        })
        .reduce(|| 0.0, f64::max);
    if max_residual > 1e-8 {
        return Err(HamiltonianError::Invariant(format!("eigenpair residual {max_residual:.3e} of max |E|")));
    }
    let sector_dims = sectors.iter().map(|s| (s.label, s.dim)).collect();
    Ok(Spectrum { all_energies, pairs, sector_dims, manifold_weights, max_residual })
}

/// All eigenvalues of `block` from one dense solve without symmetry
/// reduction; for checks on small bases.
pub fn diagonalize_dense_reference(block: &HamiltonianBlock) -> Result<Vec<f64>, HamiltonianError> {
    let n = block.dim();
    let d = block.to_dense();
    let m = Mat::<f64>::from_fn(n, n, |i, j| d[i * n + j]);
    let mut v = m
        .self_adjoint_eigenvalues(FaerSide::Lower)
        .map_err(|e| HamiltonianError::Solver { sector: "full".into(), dim: n, detail: format!("{e:?}") })?;
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Weight of each sector in a vector; used to check that eigenvectors are
/// symmetry adapted.
#[cfg(test)]
pub(crate) fn sector_weights(engine: &Engine, block: &HamiltonianBlock, v: &[f64]) -> std::collections::HashMap<SectorLabel, f64> {
    let mut out = std::collections::HashMap::new();
    for s in sector_bases(engine, block) {
        let w: f64 = s.columns.iter().map(|col| col.iter().map(|&(j, c)| c * v[j as usize]).sum::<f64>().powi(2)).sum();
        out.insert(s.label, w);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{EngineOptions, Geometry, StateSpace};
    use super::*;
    use crate::rotor::MoleculeParams;

    fn engine(m_j: i32) -> Engine {
        let space = StateSpace { manifold_n: 8, s_state: Some(9), n_max: 1, m_j, ..Default::default() };
        Engine::new(space, [MoleculeParams::krb(); 2], EngineOptions { r_limit: 600.0, ..Default::default() }).unwrap()
    }

    #[test]
    fn sectors_reproduce_full_spectrum() {
        for (m_j, g) in [(0, Geometry::symmetric(150.0)), (1, Geometry::symmetric(150.0)), (0, Geometry::same_side(150.0, 320.0))] {
            let e = engine(m_j);
            let h = e.hamiltonian(&g).unwrap();
            let full = diagonalize_dense_reference(&h).unwrap();
            let s = diagonalize(&e, &h, &Selection::lowest(5)).unwrap();
            assert_eq!(s.sector_dims.iter().map(|d| d.1).sum::<usize>(), h.dim());
            assert_eq!(full.len(), s.all_energies.len());
            for (a, b) in full.iter().zip(&s.all_energies) {
                assert!((a - b).abs() < 1e-9, "{a} {b}");
            }
            assert_eq!(s.pairs.len(), 5);
            assert!(s.max_residual < 1e-10);
            for p in &s.pairs {
                let w = sector_weights(&e, &h, p.vector.as_ref().unwrap());
                assert!((w[&p.sector] - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn window_selection() {
        let e = engine(0);
        let h = e.hamiltonian(&Geometry::symmetric(200.0)).unwrap();
        let s = diagonalize(&e, &h, &Selection::window(-5.0, 5.0).values_only()).unwrap();
        let expect = s.all_energies.iter().filter(|v| v.abs() <= 5.0).count();
        assert_eq!(s.pairs.len(), expect);
        assert!(s.pairs.iter().all(|p| p.vector.is_none()));
    }

    #[test]
    fn ceiling_is_enforced() {
        let space = StateSpace { manifold_n: 8, s_state: Some(9), n_max: 1, ..Default::default() };
        let o = EngineOptions { r_limit: 600.0, dense_ceiling: 10, ..Default::default() };
        let e = Engine::new(space, [MoleculeParams::krb(); 2], o).unwrap();
        let h = e.hamiltonian(&Geometry::symmetric(200.0)).unwrap();
        assert!(matches!(diagonalize(&e, &h, &Selection::lowest(1)), Err(HamiltonianError::TooLarge { .. })));
    }
}
