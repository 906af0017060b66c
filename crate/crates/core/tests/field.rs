use std::sync::Arc;

use num_complex::Complex64;
use pentamol::field::{
    core_field_interaction, electron_field_me, quadrature_oracle_field_me, DirectIntegrals, FieldModel, OrbitalM, Side, SitePosition,
};
use pentamol::rotor::RotorState;
use pentamol::rydberg::{radial_wavefunction, RadialGrid, RydbergOrbital, Species};
use pentamol::units::hartree_to_ghz;
use pentamol::Axis;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn orbitals() -> Vec<RydbergOrbital> {
    let rb = Species::rubidium();
    let g = Arc::new(RadialGrid::for_states(23, 1000.0, 0.01).unwrap());
    let mut out = vec![radial_wavefunction(&rb, 23, 0, g.clone()).unwrap()];
    out.extend((3..20).map(|l| radial_wavefunction(&rb, 20, l, g.clone()).unwrap()));
    out
}

fn me(axis: Axis, site: &SitePosition, a: &RydbergOrbital, ma: i32, b: &RydbergOrbital, mb: i32) -> Complex64 {
    electron_field_me(axis, site, OrbitalM::new(a, ma), OrbitalM::new(b, mb), &DirectIntegrals, FieldModel::Gradient).unwrap()
}

#[test]
fn agrees_with_direct_quadrature() {
    let orbs = orbitals();
    let small: Vec<&RydbergOrbital> = orbs.iter().filter(|o| o.l <= 7).collect();
    let mut rng = StdRng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 6 {
        let a = small[rng.gen_range(0..small.len())];
        let b = small[rng.gen_range(0..small.len())];
        let mb = rng.gen_range(-(b.l as i32)..=b.l as i32);
        let q = rng.gen_range(-1..=1);
        let ma = mb + q;
        if ma.abs() > a.l as i32 {
            continue;
        }
        let axis = [Axis::X, Axis::Y, Axis::Z][rng.gen_range(0..3)];
        let side = if rng.gen_bool(0.5) { Side::Plus } else { Side::Minus };
        let site = SitePosition::on_axis(rng.gen_range(400.0..900.0), side).unwrap();
        let ours = me(axis, &site, a, ma, b, mb);
        if ours.norm() < 1e-12 {
            continue;
        }
        let oracle = quadrature_oracle_field_me(axis, &site, OrbitalM::new(a, ma), OrbitalM::new(b, mb)).unwrap();
        let rel = (ours - oracle).norm() / oracle.norm();
        assert!(rel < 1e-6, "({},{},{ma}) ({},{},{mb}) {axis:?} {site:?}: {ours} vs {oracle}", a.n, a.l, b.n, b.l);
        checked += 1;
    }
}

#[test]
fn field_operators_are_hermitian() {
    let orbs = orbitals();
    let site = SitePosition::on_axis(650.0, Side::Minus).unwrap();
    for a in orbs.iter().step_by(3) {
        for b in orbs.iter().step_by(2) {
            for ma in -(a.l as i32).min(2)..=(a.l as i32).min(2) {
                for mb in (ma - 1).max(-(b.l as i32))..=(ma + 1).min(b.l as i32) {
                    for axis in [Axis::X, Axis::Y, Axis::Z] {
                        let ab = me(axis, &site, a, ma, b, mb);
                        let ba = me(axis, &site, b, mb, a, ma);
                        assert!((ab - ba.conj()).norm() <= 1e-12 * ab.norm().max(1e-30));
                    }
                }
            }
        }
    }
}

#[test]
fn transverse_components_share_one_radial_factor() {
    let orbs = orbitals();
    let site = SitePosition::on_axis(480.0, Side::Plus).unwrap();
    let (a, b) = (&orbs[3], &orbs[6]);
    for mb in -(b.l as i32)..=(b.l as i32) {
        for ma in [mb - 1, mb + 1] {
            if ma.abs() > a.l as i32 {
                continue;
            }
            let x = me(Axis::X, &site, a, ma, b, mb);
            let y = me(Axis::Y, &site, a, ma, b, mb);
            // F_X = (F₋₁ − F₊₁)/√2 and F_Y = i(F₋₁ + F₊₁)/√2 with real F_q
            let expect = if ma == mb - 1 { -Complex64::i() * y } else { Complex64::i() * y };
            assert!((x - expect).norm() <= 1e-13 * x.norm().max(1e-30), "{ma} {mb}: {x} {y}");
        }
    }
}

#[test]
fn core_term_magnitude() {
    let d = 0.2227;
    let site = SitePosition::on_axis(500.0, Side::Plus).unwrap();
    let v = core_field_interaction(&site, RotorState::new(1, 0).unwrap(), RotorState::new(0, 0).unwrap(), d).unwrap();
    // d/R² = 8.908e−7 hartree = 5.861 GHz, times ⟨1 0|cosθ|0 0⟩ = 1/√3
    let ghz = hartree_to_ghz(v);
    assert!((ghz + 5.861_05 / 3f64.sqrt()).abs() < 1e-3, "{ghz}");
    let minus = SitePosition::on_axis(500.0, Side::Minus).unwrap();
    let w = core_field_interaction(&minus, RotorState::new(1, 0).unwrap(), RotorState::new(0, 0).unwrap(), d).unwrap();
    assert_eq!(v, -w);
}

#[test]
fn s_state_couplings_are_weaker_than_manifold_couplings() {
    let orbs = orbitals();
    let site = SitePosition::on_axis(600.0, Side::Plus).unwrap();
    let median = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    };
    let s = &orbs[0];
    let with_s: Vec<f64> = orbs[1..].iter().map(|o| me(Axis::Z, &site, s, 0, o, 0).norm()).collect();
    let mut intra = Vec::new();
    for (i, a) in orbs[1..].iter().enumerate() {
        for b in &orbs[1 + i + 1..] {
            intra.push(me(Axis::Z, &site, a, 0, b, 0).norm());
        }
    }
    assert!(median(with_s.clone()) < median(intra.clone()), "{} vs {}", median(with_s), median(intra));
}

#[test]
fn off_axis_sites_are_rejected() {
    let orbs = orbitals();
    let site = SitePosition::new(500.0, 1.0, 0.0).unwrap();
    let r = electron_field_me(Axis::Z, &site, OrbitalM::new(&orbs[1], 0), OrbitalM::new(&orbs[2], 0), &DirectIntegrals, FieldModel::Gradient);
    assert!(r.is_err());
}
