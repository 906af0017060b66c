//! Alkali-metal model potentials and quantum defects.

use serde::{Deserialize, Serialize};

use super::RydbergError;

/// Parameters of one l-channel of the four-parameter model potential
///
/// V_l(r) = −Z_l(r)/r − α_c/(2r⁴)·(1 − exp(−(r/r_c)⁶)),
/// Z_l(r) = 1 + (Z − 1)·exp(−a₁r) − r(a₃ + a₄r)·exp(−a₂r).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPotentialChannel {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub rc: f64,
}

/// Rydberg-Ritz expansion δ(n) = δ₀ + δ₂/(n − δ₀)².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RitzDefect {
    pub delta0: f64,
    pub delta2: f64,
}

impl RitzDefect {
    pub fn at(&self, n: u32) -> f64 {
        let nd = n as f64 - self.delta0;
        self.delta0 + self.delta2 / (nd * nd)
    }
}

/// An alkali species: nuclear charge, core polarizability, model-potential
/// channels for l = 0, 1, 2 and l ≥ 3, and quantum defects for l ≤ 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub name: String,
    pub nuclear_charge: f64,
    pub core_polarizability: f64,
    pub channels: [ModelPotentialChannel; 4],
    pub defects: [RitzDefect; 3],
}

impl Species {
    /// Rubidium. Model-potential parameters of Marinescu, Sadeghpour and
    /// Dalgarno; s-series defects of Li et al. (2003); p and d defects are
    /// fine-structure (2j+1)-weighted averages of the j-resolved series.
    pub fn rubidium() -> Self {
        Self {
            name: "Rb".to_string(),
            nuclear_charge: 37.0,
            core_polarizability: 9.0760,
            channels: [
                ModelPotentialChannel { a1: 3.696_284_74, a2: 1.649_152_55, a3: -9.860_691_96, a4: 0.195_799_87, rc: 1.662_421_17 },
                ModelPotentialChannel { a1: 4.440_889_78, a2: 1.928_288_31, a3: -16.795_977_70, a4: -0.816_333_14, rc: 1.501_951_24 },
                ModelPotentialChannel { a1: 3.787_173_63, a2: 1.570_278_64, a3: -11.655_889_70, a4: 0.529_428_35, rc: 4.868_519_38 },
                ModelPotentialChannel { a1: 2.398_489_33, a2: 1.768_105_44, a3: -12.071_067_80, a4: 0.772_565_89, rc: 4.798_313_27 },
            ],
            defects: [
                RitzDefect { delta0: 3.131_180_4, delta2: 0.1784 },
                RitzDefect {
                    delta0: (2.0 * 2.654_884_9 + 4.0 * 2.641_673_7) / 6.0,
                    delta2: (2.0 * 0.2900 + 4.0 * 0.2950) / 6.0,
                },
                RitzDefect {
                    delta0: (4.0 * 1.348_091_71 + 6.0 * 1.346_465_72) / 10.0,
                    delta2: (4.0 * -0.602_86 + 6.0 * -0.5960) / 10.0,
                },
            ],
        }
    }

    fn channel(&self, l: u32) -> &ModelPotentialChannel {
        &self.channels[l.min(3) as usize]
    }

    /// l-dependent model potential in hartree at radius `r` (bohr).
    pub fn model_potential(&self, l: u32, r: f64) -> Result<f64, RydbergError> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(RydbergError::Domain { r });
        }
        let c = self.channel(l);
        let z = 1.0 + (self.nuclear_charge - 1.0) * (-c.a1 * r).exp() - r * (c.a3 + c.a4 * r) * (-c.a2 * r).exp();
        let r4 = r * r * r * r;
        let pol = -self.core_polarizability / (2.0 * r4) * (1.0 - (-(r / c.rc).powi(6)).exp());
        Ok(-z / r + pol)
    }

    /// Quantum defect δ_l(n); exactly zero for l ≥ 3.
    pub fn quantum_defect(&self, n: u32, l: u32) -> f64 {
        if l >= 3 {
            0.0
        } else {
            self.defects[l as usize].at(n)
        }
    }

    /// Bound-state energy −1/(2(n − δ_l(n))²) in hartree.
    pub fn rydberg_energy(&self, n: u32, l: u32) -> Result<f64, RydbergError> {
        if l >= n {
            return Err(RydbergError::QuantumNumbers { n, l });
        }
        let ns = n as f64 - self.quantum_defect(n, l);
        Ok(-0.5 / (ns * ns))
    }

    /// Stable 64-bit fingerprint of every parameter, used in cache headers.
    pub fn fingerprint(&self) -> u64 {
        let mut h = super::Fnv64::new();
        h.write(self.name.as_bytes());
        h.write_f64(self.nuclear_charge);
        h.write_f64(self.core_polarizability);
        for c in &self.channels {
            for v in [c.a1, c.a2, c.a3, c.a4, c.rc] {
                h.write_f64(v);
            }
        }
        for d in &self.defects {
            h.write_f64(d.delta0);
            h.write_f64(d.delta2);
        }
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::HARTREE_GHZ;

    #[test]
    fn coulomb_tail_is_l_independent() {
        let rb = Species::rubidium();
        for l in [0, 3] {
            assert!((rb.model_potential(l, 1000.0).unwrap() + 1e-3).abs() < 1e-6);
        }
    }

    #[test]
    fn core_deepens_potential() {
        let rb = Species::rubidium();
        let v = rb.model_potential(0, 1.0).unwrap();
        assert!(v < -1.0, "{v}");
        // hand evaluation of the published parameterization
        let z = 1.0 + 36.0 * (-3.696_284_74f64).exp() + (9.860_691_96 - 0.195_799_87) * (-1.649_152_55f64).exp();
        let pol = -9.076 / 2.0 * (1.0 - (-(1.0 / 1.662_421_17f64).powi(6)).exp());
        assert!((v - (-z + pol)).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_positive_radius() {
        let rb = Species::rubidium();
        assert!(matches!(rb.model_potential(0, 0.0), Err(RydbergError::Domain { .. })));
        assert!(matches!(rb.model_potential(2, -3.0), Err(RydbergError::Domain { .. })));
    }

    #[test]
    fn defects() {
        let rb = Species::rubidium();
        assert_eq!(rb.quantum_defect(20, 3), 0.0);
        assert_eq!(rb.quantum_defect(20, 10), 0.0);
        let d = rb.quantum_defect(23, 0);
        let want = 3.131_180_4 + 0.1784 / (23.0 - 3.131_180_4f64).powi(2);
        assert!((d - want).abs() < 1e-15);
        assert!((d - 3.1316).abs() < 1e-4);
    }

    #[test]
    fn energies_and_gap() {
        let rb = Species::rubidium();
        assert_eq!(rb.rydberg_energy(20, 5).unwrap(), -1.25e-3);
        let e23 = rb.rydberg_energy(23, 0).unwrap();
        assert!((e23 + 1.2666e-3).abs() < 1e-7, "{e23}");
        let gap = (e23 - rb.rydberg_energy(20, 3).unwrap()) * HARTREE_GHZ;
        assert!((gap + 109.9).abs() < 1.5, "{gap}");
        assert!(rb.rydberg_energy(3, 3).is_err());
    }
}
