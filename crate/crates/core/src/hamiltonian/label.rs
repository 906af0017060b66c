use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Engine;
use crate::angmath::clebsch_gordan;

/// Electronic character of a basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RydbergCharacter {
    /// Member of the degenerate high-l manifold.
    Manifold,
    /// A low-l orbital (n, l).
    Orbital { n: u32, l: u32 },
}

impl std::fmt::Display for RydbergCharacter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RydbergCharacter::Manifold => write!(f, "manifold"),
            RydbergCharacter::Orbital { n, l } => {
                let c = b"spdfghiklmnoqrtuvwxyz".get(*l as usize).map(|&b| b as char).unwrap_or('?');
                write!(f, "{n}{c}")
            }
        }
    }
}

/// Dominant |N M_N; N1 N2⟩ coupled-rotor component of an eigenvector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledLabel {
    pub character: RydbergCharacter,
    pub n: i32,
    pub m_n: i32,
    pub n1: i32,
    pub n2: i32,
    /// Probability of this component.
    pub weight: f64,
}

impl std::fmt::Display for CoupledLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}|N={} M={};{},{}⟩ ({:.2})", self.character, self.n, self.m_n, self.n1, self.n2, self.weight)
    }
}

pub(crate) fn character_of(engine: &Engine, n: u32, l: u32) -> RydbergCharacter {
    let s = engine.space();
    if s.include_manifold && n == s.manifold_n && l >= s.manifold_l_min {
        RydbergCharacter::Manifold
    } else {
        RydbergCharacter::Orbital { n, l }
    }
}

/// Projects `v` onto coupled rotor states |(N1 N2) N M_N⟩ ⊗ |n l m⟩ and
/// returns the component of largest weight, summed over the electron
/// states of one character.
pub fn coupled_label(engine: &Engine, v: &[f64]) -> CoupledLabel {
    assert_eq!(v.len(), engine.dim());
    let mut amp: HashMap<(super::ElectronState, i32, i32, i32, i32), f64> = HashMap::new();
    for (s, &c) in engine.basis().iter().zip(v) {
        if c == 0.0 {
            continue;
        }
        let (r1, r2) = (s.rotor1, s.rotor2);
        let m_n = r1.m + r2.m;
        for n in (r1.n - r2.n).abs().max(m_n.abs())..=r1.n + r2.n {
            let cg = clebsch_gordan(r1.n, r1.m, r2.n, r2.m, n, m_n).unwrap_or(0.0);
            if cg != 0.0 {
                *amp.entry((s.electron, n, m_n, r1.n, r2.n)).or_default() += cg * c;
            }
        }
    }
    let mut weight: HashMap<(RydbergCharacter, i32, i32, i32, i32), f64> = HashMap::new();
    for ((e, n, m_n, n1, n2), a) in amp {
        *weight.entry((character_of(engine, e.n, e.l), n, m_n, n1, n2)).or_default() += a * a;
    }
    let mut best: Vec<_> = weight.into_iter().collect();
    // deterministic tie break
    best.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| format!("{:?}", a.0).cmp(&format!("{:?}", b.0))));
    let ((character, n, m_n, n1, n2), weight) = best[0];
    CoupledLabel { character, n, m_n, n1, n2, weight }
}

/// Probability of each electronic character in `v`.
pub fn character_weights(engine: &Engine, v: &[f64]) -> Vec<(RydbergCharacter, f64)> {
    let mut w: Vec<(RydbergCharacter, f64)> = Vec::new();
    for (s, &c) in engine.basis().iter().zip(v) {
        let ch = character_of(engine, s.electron.n, s.electron.l);
        match w.iter_mut().find(|x| x.0 == ch) {
            Some(x) => x.1 += c * c,
            None => w.push((ch, c * c)),
        }
    }
    w
}

/// Probability of the rotor pair (N1, N2) in `v`.
pub fn rotor_pair_weight(engine: &Engine, v: &[f64], n1: i32, n2: i32) -> f64 {
    engine.basis().iter().zip(v).filter(|(s, _)| s.rotor1.n == n1 && s.rotor2.n == n2).map(|(_, c)| c * c).sum()
}

#[cfg(test)]
mod tests {
    use super::super::{EngineOptions, StateSpace};
    use super::*;
    use crate::rotor::MoleculeParams;

    #[test]
    fn product_state_labels() {
        let space = StateSpace { include_manifold: false, n_max: 1, ..Default::default() };
        let e = Engine::new(space, [MoleculeParams::krb(); 2], EngineOptions::default()).unwrap();
        // |1 1⟩|1 −1⟩ is 1/√6 |N=2⟩ + 1/√2 |N=1⟩ + 1/√3 |N=0⟩
        let mut v = vec![0.0; e.dim()];
        let i = e.basis().iter().position(|s| s.rotor1.n == 1 && s.rotor1.m == 1 && s.rotor2.m == -1).unwrap();
        v[i] = 1.0;
        let l = coupled_label(&e, &v);
        assert_eq!((l.n, l.m_n, l.n1, l.n2), (1, 0, 1, 1));
        assert!((l.weight - 0.5).abs() < 1e-12);
        assert_eq!(l.character, RydbergCharacter::Orbital { n: 23, l: 0 });
        assert_eq!(l.character.to_string(), "23s");
        assert!((rotor_pair_weight(&e, &v, 1, 1) - 1.0).abs() < 1e-15);
        assert_eq!(character_weights(&e, &v), vec![(RydbergCharacter::Orbital { n: 23, l: 0 }, 1.0)]);
    }
}
