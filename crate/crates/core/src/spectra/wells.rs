use serde::{Deserialize, Serialize};

use super::SpectraError;
use crate::spline::CubicSpline;
use crate::units::{ghz_to_hartree, hartree_to_ghz, MASS_KRB_ME};

/// Default mass for the vibrational motion: one KRb molecule against the
/// heavy Rydberg core, in electron masses.
pub const DEFAULT_REDUCED_MASS: f64 = MASS_KRB_ME;

/// Refinement of the sampled curve before locating extrema.
const REFINE: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellReport {
    pub r_min: f64,
    pub e_min: f64,
    /// Barrier-to-minimum difference on the shallower side, GHz.
    pub depth: f64,
    /// (R, E) of the barrier or scan end on each side.
    pub left: (f64, f64),
    pub right: (f64, f64),
}

impl WellReport {
    /// Energy of the lower barrier.
    pub fn top(&self) -> f64 {
        self.e_min + self.depth
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VibrationalLevels {
    pub count: usize,
    /// Level energies in GHz on the curve's energy scale.
    pub energies: Vec<f64>,
    /// Set when the smallest level spacing is below the estimated
    /// interpolation error of the curve.
    pub resolution_warning: bool,
}

fn refine_on(spline: &CubicSpline, radii: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::with_capacity((radii.len() - 1) * REFINE + 1);
    for w in radii.windows(2) {
        for k in 0..REFINE {
            xs.push(w[0] + (w[1] - w[0]) * k as f64 / REFINE as f64);
        }
    }
    xs.push(*radii.last().unwrap());
    let ys = xs.iter().map(|&x| spline.eval(x)).collect();
    (xs, ys)
}

/// Zero of the spline derivative in [a, b] by bisection, falling back to the
/// midpoint if the derivative does not change sign.
fn stationary_point(spline: &CubicSpline, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    let (dlo, dhi) = (spline.derivative(lo), spline.derivative(hi));
    if dlo == 0.0 {
        return lo;
    }
    if dlo.signum() == dhi.signum() {
        return 0.5 * (a + b);
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if spline.derivative(mid).signum() == dlo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Local minima of a sampled curve with barriers on both sides (a scan end
/// counts as a barrier). A natural cubic spline through the samples is
/// refined ten times per interval; extrema are located by slope sign
/// changes and polished on the spline derivative.
pub fn find_wells(radii: &[f64], energies: &[f64]) -> Result<Vec<WellReport>, SpectraError> {
    if radii.len() != energies.len() || radii.len() < 5 {
        return Err(SpectraError::Wells(format!("need ≥ 5 matching samples, got {} and {}", radii.len(), energies.len())));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpectraError::Wells("radii must increase".into()));
    }
    let spline = CubicSpline::natural(radii, energies);
    let (xs, ys) = refine_on(&spline, radii);
    let mut minima = Vec::new();
    let mut maxima = Vec::new();
    for i in 1..xs.len() - 1 {
        let (d0, d1) = (ys[i] - ys[i - 1], ys[i + 1] - ys[i]);
        if d0 < 0.0 && d1 >= 0.0 {
            minima.push(stationary_point(&spline, xs[i - 1], xs[i + 1]));
        } else if d0 > 0.0 && d1 <= 0.0 {
            maxima.push(stationary_point(&spline, xs[i - 1], xs[i + 1]));
        }
    }
    let (r0, r1) = (xs[0], *xs.last().unwrap());
    let mut out = Vec::new();
    for &rm in &minima {
        let em = spline.eval(rm);
        let left = maxima.iter().rev().find(|&&x| x < rm).map(|&x| (x, spline.eval(x))).unwrap_or((r0, spline.eval(r0)));
        let right = maxima.iter().find(|&&x| x > rm).map(|&x| (x, spline.eval(x))).unwrap_or((r1, spline.eval(r1)));
        let depth = left.1.min(right.1) - em;
        if depth > 0.0 {
            out.push(WellReport { r_min: rm, e_min: em, depth, left, right });
        }
    }
    Ok(out)
}

/// Bound levels (hartree) of −1/(2μ) ψ'' + V ψ = E ψ for the well V on
/// [a, b], with V clipped at `e_top` inside and equal to `e_top` outside.
/// Levels are found by Numerov node counting and bisection.
pub fn bound_levels(v: &dyn Fn(f64) -> f64, a: f64, b: f64, e_top: f64, mu: f64) -> Vec<f64> {
    assert!(b > a && mu > 0.0);
    let width = b - a;
    let samples = 4000;
    let v_min = (0..=samples).map(|i| v(a + width * i as f64 / samples as f64)).fold(e_top, f64::min);
    let depth = e_top - v_min;
    if !(depth > 0.0) {
        return Vec::new();
    }
    // tails long enough for levels down to 1% of the depth below the top
    let kappa = (2.0 * mu * 0.01 * depth).sqrt();
    let tail = width.max(12.0 / kappa);
    let (x0, x1) = (a - tail, b + tail);
    let k_max = (2.0 * mu * depth).sqrt();
    let h = (width / 4000.0).min(2.0 * std::f64::consts::PI / k_max / 60.0).min(tail / 200.0);
    let n = ((x1 - x0) / h).ceil() as usize;
    let h = (x1 - x0) / n as f64;
    let pot: Vec<f64> = (0..=n)
        .map(|i| {
            let x = x0 + i as f64 * h;
            if x < a || x > b {
                e_top
            } else {
                v(x).min(e_top)
            }
        })
        .collect();
    let nodes = |e: f64| -> usize {
        let h2 = h * h / 12.0;
        let f = |i: usize| 2.0 * mu * (pot[i] - e);
        let (mut y0, mut y1) = (0.0f64, 1e-30f64);
        let mut count = 0;
        for i in 1..n {
            let y2 = (2.0 * (1.0 + 5.0 * h2 * f(i)) * y1 - (1.0 - h2 * f(i - 1)) * y0) / (1.0 - h2 * f(i + 1));
            if y2 == 0.0 || y2.signum() != y1.signum() {
                count += 1;
            }
            y0 = y1;
            y1 = y2;
            if y1.abs() > 1e200 {
                y0 *= 1e-200;
                y1 *= 1e-200;
            }
        }
        count
    };
    let e_max = e_top - 1e-9 * depth;
    let count = nodes(e_max);
    (0..count)
        .map(|k| {
            let (mut lo, mut hi) = (v_min, e_max);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if nodes(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 1e-13 * depth {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Vibrational levels supported by `well` on the sampled curve, with mass
/// `mu` in electron masses. The well region runs between the barriers.
pub fn count_vibrational(radii: &[f64], energies: &[f64], well: &WellReport, mu: f64) -> Result<VibrationalLevels, SpectraError> {
    if !(well.depth > 0.0) {
        return Err(SpectraError::Wells("well depth must be positive".into()));
    }
    if !(mu > 0.0) {
        return Err(SpectraError::Wells(format!("mass {mu} must be positive")));
    }
    if radii.len() != energies.len() || radii.len() < 5 {
        return Err(SpectraError::Wells("need ≥ 5 matching samples".into()));
    }
    let spline = CubicSpline::natural(radii, energies);
    let v = |x: f64| ghz_to_hartree(spline.eval(x) - well.e_min);
    let levels = bound_levels(&v, well.left.0, well.right.0, ghz_to_hartree(well.depth), mu);
    let energies_ghz: Vec<f64> = levels.iter().map(|e| hartree_to_ghz(*e) + well.e_min).collect();

    // interpolation error: spline against straight lines between samples inside the well
    let mut interp_err: f64 = 0.0;
    for w in radii.windows(2).zip(energies.windows(2)) {
        let ((ra, rb), (ea, eb)) = ((w.0[0], w.0[1]), (w.1[0], w.1[1]));
        if rb < well.left.0 || ra > well.right.0 {
            continue;
        }
        let mid = 0.5 * (ra + rb);
        interp_err = interp_err.max((spline.eval(mid) - 0.5 * (ea + eb)).abs());
    }
    let min_spacing = energies_ghz.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    Ok(VibrationalLevels { count: levels.len(), energies: energies_ghz, resolution_warning: min_spacing < interp_err })
}
