//! Electric field of the Rydberg atom at a molecule position.
//!
//! With the core at the origin and the electron at r, the field at R is
//! F_core = R̂/R² and F_e = (r − R)/|r − R|³ = ∇_R 1/|r − R|. Expanding
//! 1/|r − R| = Σ_λ 4π/(2λ+1) g_λ(r, R) Σ_μ Y_λμ(Ω) Y*_λμ(Ω_R),
//! g_λ = r<^λ / r>^{λ+1}, the gradient has a radial part ∂_R g_λ and an
//! angular part (g_λ/R)·∇_Ω Y*_λμ. For a site at θ = 0 the Z component is
//! purely radial and X, Y purely angular:
//!
//! F_Z = Σ 4π/(2λ+1) √((2λ+1)/4π) ∂_R g_λ Y_λ0,
//! F_X = Σ 4π/(2λ+1) κ_λ (g_λ/R) (Y_λ,−1 − Y_λ,1),
//! F_Y = Σ 4π/(2λ+1) iκ_λ (g_λ/R) (Y_λ,−1 + Y_λ,1),
//!
//! with κ_λ = √((2λ+1)/4π)·√(λ(λ+1))/2. A site at θ = π follows by
//! inversion, which multiplies the λ term by (−1)^{λ+1}.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angmath::{gaunt, ladder_factors, legendre_normalized, spherical_harmonic};
use crate::quadrature::gauss_legendre;
use crate::rotor::{dipole_spherical_me, RotorState};
use crate::rydberg::{RydbergError, RydbergOrbital};
use crate::Axis;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("invalid angular momentum l={l}, m={m}")]
    InvalidArgument { l: i32, m: i32 },
    #[error("site at θ={theta}, φ={phi} is not on the Z axis")]
    OffAxis { theta: f64, phi: f64 },
    #[error("invalid site distance {0} bohr")]
    Distance(f64),
    #[error(transparent)]
    Radial(#[from] RydbergError),
    #[error("quadrature oracle did not converge: coarse {coarse}, fine {fine}")]
    OracleNonConvergence { coarse: Complex64, fine: Complex64 },
    #[error("ε → 0 extrapolation of the excluded ball is unstable: {with_eps} vs {with_half_eps}")]
    OracleBall { with_eps: Complex64, with_half_eps: Complex64 },
}

/// Which side of the core a molecule sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// θ = 0
    Plus,
    /// θ = π
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SitePosition {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SitePosition {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self, FieldError> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(FieldError::Distance(r));
        }
        Ok(Self { r, theta, phi })
    }

    pub fn on_axis(r: f64, side: Side) -> Result<Self, FieldError> {
        let theta = match side {
            Side::Plus => 0.0,
            Side::Minus => PI,
        };
        Self::new(r, theta, 0.0)
    }

    pub fn side(&self) -> Option<Side> {
        if self.phi != 0.0 {
            None
        } else if self.theta == 0.0 {
            Some(Side::Plus)
        } else if self.theta == PI {
            Some(Side::Minus)
        } else {
            None
        }
    }

    fn require_axis(&self) -> Result<Side, FieldError> {
        self.side().ok_or(FieldError::OffAxis { theta: self.theta, phi: self.phi })
    }
}

/// How the transverse (X, Y) field components are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldModel {
    /// Gradient of the multipole expansion; agrees with direct quadrature.
    #[default]
    Gradient,
    /// Transverse components built from the radial-derivative kernel
    /// (twice the longitudinal term); does not match direct quadrature.
    RadialKernel,
}

/// The general-angle coefficient A^K_lm(θ_i, φ_i) of the multipole field, with
/// a_lm = √(l(l+1) − m(m+1)) and b_lm = √(l(l+1) − m(m−1)).
pub fn a_coeff(axis: Axis, l: i32, m: i32, site: &SitePosition) -> Result<Complex64, FieldError> {
    if l < 0 || m.abs() > l {
        return Err(FieldError::InvalidArgument { l, m });
    }
    let (t, p) = (site.theta, site.phi);
    let yc = |mm: i32| -> Complex64 {
        if mm.abs() > l {
            Complex64::new(0.0, 0.0)
        } else {
            spherical_harmonic(l, mm, t, p).unwrap().conj()
        }
    };
    let (a, b) = ladder_factors(l, m).unwrap();
    let i = Complex64::i();
    let ep = Complex64::from_polar(1.0, p);
    let em = Complex64::from_polar(1.0, -p);
    let (st, ct, sp, cp) = (t.sin(), t.cos(), p.sin(), p.cos());
    let lad = yc(m + 1) * ep * a - yc(m - 1) * em * b;
    let lad2 = yc(m + 1) * em * a + yc(m - 1) * ep * b;
    Ok(match axis {
        Axis::X => yc(m) * st * cp + lad * ct * cp - i * lad2 * st,
        Axis::Y => yc(m) * st * sp + lad * ct * sp + i * lad2 * ct,
        Axis::Z => yc(m) * ct - lad * st,
    })
}

/// Source of the two-sided radial integrals, e.g. direct evaluation or a cache.
pub trait RadialSource: Sync {
    fn integrals(&self, bra: &RydbergOrbital, ket: &RydbergOrbital, lambda: u32, r: f64) -> Result<(f64, f64), RydbergError>;
}

/// Evaluates every integral on demand.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectIntegrals;

impl RadialSource for DirectIntegrals {
    fn integrals(&self, bra: &RydbergOrbital, ket: &RydbergOrbital, lambda: u32, r: f64) -> Result<(f64, f64), RydbergError> {
        crate::rydberg::radial_multipole_integrals(bra, ket, lambda, r)
    }
}

impl RadialSource for crate::rydberg::IntegralCache {
    fn integrals(&self, bra: &RydbergOrbital, ket: &RydbergOrbital, lambda: u32, r: f64) -> Result<(f64, f64), RydbergError> {
        // the integrals are symmetric in bra and ket
        let (a, b) = if (bra.n, bra.l) <= (ket.n, ket.l) { (bra, ket) } else { (ket, bra) };
        let key = crate::rydberg::IntegralKey::new(a.n, a.l, b.n, b.l, lambda, r);
        self.get_or_compute(key, || crate::rydberg::radial_multipole_integrals(a, b, lambda, r))
    }
}

/// An orbital together with its magnetic quantum number.
#[derive(Debug, Clone, Copy)]
pub struct OrbitalM<'a> {
    pub orbital: &'a RydbergOrbital,
    pub m: i32,
}

impl<'a> OrbitalM<'a> {
    pub fn new(orbital: &'a RydbergOrbital, m: i32) -> Self {
        Self { orbital, m }
    }
}

fn kappa(lambda: i32) -> f64 {
    let lf = lambda as f64;
    ((2.0 * lf + 1.0) / (4.0 * PI)).sqrt() * (lf * (lf + 1.0)).sqrt() / 2.0
}

/// Real matrix element ⟨bra| F_q |ket⟩ of the spherical field component
/// q ∈ {−1, 0, 1} (F₀ = F_Z, F_±1 = ∓(F_X ± iF_Y)/√2) for an on-axis site.
pub fn electron_field_spherical_me(
    q: i32,
    site: &SitePosition,
    bra: OrbitalM,
    ket: OrbitalM,
    radial: &dyn RadialSource,
    model: FieldModel,
) -> Result<f64, FieldError> {
    let side = site.require_axis()?;
    let (l1, l2) = (bra.orbital.l as i32, ket.orbital.l as i32);
    if bra.m.abs() > l1 {
        return Err(FieldError::InvalidArgument { l: l1, m: bra.m });
    }
    if ket.m.abs() > l2 {
        return Err(FieldError::InvalidArgument { l: l2, m: ket.m });
    }
    if !(-1..=1).contains(&q) || bra.m != ket.m + q {
        return Ok(0.0);
    }
    let big_r = site.r;
    let mut total = 0.0;
    let mut lam = (l1 - l2).abs();
    while lam <= l1 + l2 {
        if q != 0 && lam == 0 {
            lam += 2;
            continue;
        }
        let g = gaunt(l1, bra.m, lam, q, l2, ket.m).unwrap();
        if g != 0.0 {
            let (i_in, i_out) = radial.integrals(bra.orbital, ket.orbital, lam as u32, big_r)?;
            let lf = lam as f64;
            let inner = big_r.powi(-(lam + 2));
            let outer = big_r.powi(lam - 1);
            let longitudinal = -(lf + 1.0) * inner * i_in + lf * outer * i_out;
            let transverse = inner * i_in + outer * i_out;
            let radial_angular = if q == 0 {
                ((2.0 * lf + 1.0) / (4.0 * PI)).sqrt() * longitudinal
            } else {
                match model {
                    FieldModel::Gradient => 2f64.sqrt() * kappa(lam) * transverse,
                    FieldModel::RadialKernel => 2.0 * 2f64.sqrt() * kappa(lam) * longitudinal,
                }
            };
            let parity = match side {
                Side::Plus => 1.0,
                Side::Minus => {
                    if lam % 2 == 0 {
                        -1.0
                    } else {
                        1.0
                    }
                }
            };
            total += parity * 4.0 * PI / (2.0 * lf + 1.0) * radial_angular * g;
        }
        lam += 2;
    }
    Ok(total)
}

/// ⟨bra| F^e_K |ket⟩ for a Cartesian component at an on-axis site.
pub fn electron_field_me(
    axis: Axis,
    site: &SitePosition,
    bra: OrbitalM,
    ket: OrbitalM,
    radial: &dyn RadialSource,
    model: FieldModel,
) -> Result<Complex64, FieldError> {
    let f = |q: i32| electron_field_spherical_me(q, site, bra, ket, radial, model);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok(match axis {
        Axis::Z => Complex64::new(f(0)?, 0.0),
        // F_X = (F₋₁ − F₊₁)/√2, F_Y = i(F₋₁ + F₊₁)/√2
        Axis::X => Complex64::new(s * (f(-1)? - f(1)?), 0.0),
        Axis::Y => Complex64::new(0.0, s * (f(-1)? + f(1)?)),
    })
}

/// ⟨bra| −d n̂·F_core |ket⟩ in hartree for a rotor at an on-axis site.
pub fn core_field_interaction(site: &SitePosition, bra: RotorState, ket: RotorState, dipole_au: f64) -> Result<f64, FieldError> {
    let side = site.require_axis()?;
    Ok(-side.sign() * dipole_au / (site.r * site.r) * dipole_spherical_me(0, bra, ket))
}

/// Settings of the direct-quadrature oracle.
#[derive(Debug, Clone, Copy)]
pub struct OracleSettings {
    /// Radius of the excluded ball around the site, relative to R.
    pub ball_fraction: f64,
    /// Width of the outer panels in x = √r.
    pub x_panel: f64,
    /// Gauss-Legendre order of the outer panels.
    pub outer_order: usize,
    /// Gauss-Legendre order of each geometric panel in ρ.
    pub inner_order: usize,
    /// Relative tolerance between refinement levels and for the ball check.
    pub tolerance: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self { ball_fraction: 1e-3, x_panel: 0.1, outer_order: 8, inner_order: 16, tolerance: 1e-8 }
    }
}

/// ⟨bra| F^e_K |ket⟩ by direct integration of ψ*_bra (r − R)/|r − R|³ ψ_ket.
///
/// Coordinates are the electron's (r, θ, φ). At fixed r the polar angle is
/// traded for the distance ρ = |r − R| to the site,
/// d(cosθ) = ρ dρ/(rR), which turns the 1/ρ² field into a Q(ρ)/ρ² integrand
/// with Q polynomial; ρ is integrated on geometric Gauss-Legendre panels,
/// x = √r on uniform composite panels and φ with a uniform rule. The ball
/// ρ < ε = ball_fraction·R is excluded. Its contribution scales as ε², so
/// the result is Richardson-extrapolated from ε/2 and ε/4, and must agree
/// with the extrapolation from ε and ε/2. Refining both quadratures must
/// change the result by less than the tolerance as well.
pub fn quadrature_oracle_field_me(axis: Axis, site: &SitePosition, bra: OrbitalM, ket: OrbitalM) -> Result<Complex64, FieldError> {
    quadrature_oracle_with(axis, site, bra, ket, &OracleSettings::default())
}

pub fn quadrature_oracle_with(axis: Axis, site: &SitePosition, bra: OrbitalM, ket: OrbitalM, s: &OracleSettings) -> Result<Complex64, FieldError> {
    let side = site.require_axis()?;
    for o in [bra, ket] {
        if o.m.abs() > o.orbital.l as i32 {
            return Err(FieldError::InvalidArgument { l: o.orbital.l as i32, m: o.m });
        }
    }
    let eps = s.ball_fraction * site.r;
    let fine_at = |e: f64| oracle_once(axis, side, site.r, bra, ket, e, s.x_panel / 2.0, s.outer_order + 4, s.inner_order + 8);
    let coarse = oracle_once(axis, side, site.r, bra, ket, eps, s.x_panel, s.outer_order, s.inner_order);
    let fine = fine_at(eps);
    let floor = 1e-15;
    if (fine - coarse).norm() > s.tolerance * fine.norm() + floor {
        return Err(FieldError::OracleNonConvergence { coarse, fine });
    }
    // the excluded ball removes a term ∝ ε²; extrapolate ε → 0 from two
    // halvings and require both estimates to agree
    let half = fine_at(eps / 2.0);
    let quarter = fine_at(eps / 4.0);
    let r1 = (4.0 * half - fine) / 3.0;
    let r2 = (4.0 * quarter - half) / 3.0;
    if (r1 - r2).norm() > s.tolerance * r2.norm() + floor {
        return Err(FieldError::OracleBall { with_eps: r1, with_half_eps: r2 });
    }
    Ok(r2)
}

fn signed_legendre(l: i32, m: i32, x: f64) -> f64 {
    let v = *legendre_normalized(l, m.abs(), x).last().unwrap();
    if m < 0 && m % 2 != 0 {
        -v
    } else {
        v
    }
}

#[allow(clippy::too_many_arguments)]
fn oracle_once(axis: Axis, side: Side, big_r: f64, bra: OrbitalM, ket: OrbitalM, eps: f64, x_panel: f64, outer_order: usize, inner_order: usize) -> Complex64 {
    let (l1, l2) = (bra.orbital.l as i32, ket.orbital.l as i32);
    let (m1, m2) = (bra.m, ket.m);
    let sgn = side.sign();

    // azimuthal factor ∫ e^{i(m2−m1)φ} w_K(φ) dφ by a uniform rule
    let n_phi = 16;
    let dm = (m2 - m1) as f64;
    let mut phi_factor = Complex64::new(0.0, 0.0);
    for k in 0..n_phi {
        let phi = 2.0 * PI * k as f64 / n_phi as f64;
        let w = match axis {
            Axis::X => phi.cos(),
            Axis::Y => phi.sin(),
            Axis::Z => 1.0,
        };
        phi_factor += Complex64::from_polar(w, dm * phi);
    }
    phi_factor *= 2.0 * PI / n_phi as f64;
    if phi_factor.norm() < 1e-13 {
        return Complex64::new(0.0, 0.0);
    }

    let sp1 = bra.orbital.spline_in_x();
    let sp2 = ket.orbital.spline_in_x();
    let grid = bra.orbital.grid();
    let last_nonzero = |u: &[f64]| u.iter().rposition(|v| *v != 0.0).unwrap_or(0);
    let i_sup = last_nonzero(&bra.orbital.u).min(last_nonzero(&ket.orbital.u));
    let x_sup = grid.x()[(i_sup + 1).min(grid.len() - 1)];

    let (gi_x, gi_w) = gauss_legendre(inner_order);
    // ∫ over ρ at fixed r of Q(ρ)/ρ²-type integrand
    let inner = |r: f64| -> f64 {
        let lo = (big_r - r).abs().max(eps);
        let hi = big_r + r;
        if lo >= hi {
            return 0.0;
        }
        let mut acc = 0.0;
        let mut a = lo;
        while a < hi {
            let b = (2.0 * a).min(hi);
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            for (t, w) in gi_x.iter().zip(&gi_w) {
                let rho = c + h * t;
                let cos_t = (sgn * (r * r + big_r * big_r - rho * rho) / (2.0 * big_r * r)).clamp(-1.0, 1.0);
                let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
                let ang = signed_legendre(l1, m1, cos_t) * signed_legendre(l2, m2, cos_t);
                // field component without its φ dependence, over ρ³
                let f = match axis {
                    Axis::Z => r * cos_t - sgn * big_r,
                    Axis::X | Axis::Y => r * sin_t,
                };
                // measure d(cosθ) = ρ dρ/(rR)
                acc += w * h * ang * f / (rho * rho * r * big_r);
            }
            a = b;
        }
        acc
    };

    // outer integral over x = √r with breakpoints at the site and ball edges
    let mut breaks = vec![0.0, x_sup];
    for r_b in [big_r - eps, big_r, big_r + eps] {
        if r_b > 0.0 && r_b.sqrt() < x_sup {
            breaks.push(r_b.sqrt());
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (go_x, go_w) = gauss_legendre(outer_order);
    let mut total = 0.0;
    for seg in breaks.windows(2) {
        let (xa, xb) = (seg[0], seg[1]);
        if xb <= xa {
            continue;
        }
        let panels = ((xb - xa) / x_panel).ceil().max(1.0) as usize;
        let hw = (xb - xa) / panels as f64;
        for p in 0..panels {
            let c = xa + (p as f64 + 0.5) * hw;
            for (t, w) in go_x.iter().zip(&go_w) {
                let x = c + 0.5 * hw * t;
                let r = x * x;
                let uu = sp1.eval(x) * sp2.eval(x);
                if uu == 0.0 {
                    continue;
                }
                // ψ*ψ r² dr = u₁u₂ dr, dr = 2x dx
                total += 0.5 * hw * w * uu * 2.0 * x * inner(r);
            }
        }
    }
    phi_factor * total
}
