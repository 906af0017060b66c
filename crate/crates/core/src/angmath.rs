//! Angular momentum algebra: Wigner 3j / Clebsch-Gordan coefficients, Gaunt
//! integrals, spherical harmonics and the ladder factors of the field
//! expansion.
//!
//! Coupling coefficients are evaluated exactly: the Racah sum is rewritten as
//! an alternating sum of binomial products, summed in arbitrary-precision
//! integers, and only the final square root is taken in floating point. The
//! Condon-Shortley phase convention is used throughout.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AngMathError {
    #[error("negative angular momentum j = {0}")]
    NegativeJ(i32),
    #[error("projection m = {m} out of range for l = {l}")]
    ProjectionOutOfRange { l: i32, m: i32 },
    #[error("angular momentum {0} exceeds the supported range")]
    TooLarge(i32),
}

/// A pair (j, m) with integer j ≥ 0 and |m| ≤ j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct AngularMomentum {
    pub j: i32,
    pub m: i32,
}

impl AngularMomentum {
    pub fn new(j: i32, m: i32) -> Result<Self, AngMathError> {
        if j < 0 {
            return Err(AngMathError::NegativeJ(j));
        }
        if m.abs() > j {
            return Err(AngMathError::ProjectionOutOfRange { l: j, m });
        }
        Ok(Self { j, m })
    }
}

/// Largest argument handled by the exact binomial tables.
const MAX_TABLE: usize = 240;

fn binomials() -> &'static Vec<Vec<BigUint>> {
    static TABLE: OnceLock<Vec<Vec<BigUint>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(MAX_TABLE + 1);
        rows.push(vec![BigUint::one()]);
        for n in 1..=MAX_TABLE {
            let prev = &rows[n - 1];
            let mut row = Vec::with_capacity(n + 1);
            row.push(BigUint::one());
            for k in 1..n {
                row.push(&prev[k - 1] + &prev[k]);
            }
            row.push(BigUint::one());
            rows.push(row);
        }
        rows
    })
}

fn factorials() -> &'static Vec<BigUint> {
    static TABLE: OnceLock<Vec<BigUint>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = Vec::with_capacity(MAX_TABLE + 2);
        out.push(BigUint::one());
        for n in 1..=(MAX_TABLE + 1) {
            let next = &out[n - 1] * BigUint::from(n);
            out.push(next);
        }
        out
    })
}

fn binom(n: i64, k: i64) -> &'static BigUint {
    static ZERO: OnceLock<BigUint> = OnceLock::new();
    if k < 0 || n < 0 || k > n {
        return ZERO.get_or_init(BigUint::zero);
    }
    &binomials()[n as usize][k as usize]
}

fn fact(n: i64) -> &'static BigUint {
    &factorials()[n as usize]
}

/// num/den as f64 with ~1 ulp relative error, without forming a reduced
/// rational.
fn big_ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let top = |x: &BigUint| -> (f64, i64) {
        let bits = x.bits() as i64;
        let shift = (bits - 64).max(0);
        let head = (x >> shift as usize).to_u64().unwrap_or(u64::MAX);
        (head as f64, shift)
    };
    let (n, ns) = top(num);
    let (d, ds) = top(den);
    (n / d) * 2f64.powi((ns - ds) as i32)
}

fn phase(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Wigner 3j symbol for integer arguments.
///
/// Returns zero when the projections do not sum to zero, the triangle rule
/// fails, or any |m| exceeds its j. Negative j is an error.
pub fn wigner_3j(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> Result<f64, AngMathError> {
    for j in [j1, j2, j3] {
        if j < 0 {
            return Err(AngMathError::NegativeJ(j));
        }
    }
    let (j1, j2, j3, m1, m2, m3) = (j1 as i64, j2 as i64, j3 as i64, m1 as i64, m2 as i64, m3 as i64);
    if j1 + j2 + j3 + 1 > MAX_TABLE as i64 {
        return Err(AngMathError::TooLarge((j1 + j2 + j3) as i32));
    }
    if m1 + m2 + m3 != 0 || m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return Ok(0.0);
    }
    if j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return Ok(0.0);
    }

    // Racah sum in binomial form:
    //   Σ_k (-1)^k C(j1+j2-j3, k) C(j1+j3-j2, j1-m1-k) C(j2+j3-j1, j2+m2-k)
    let a = j1 + j2 - j3;
    let b = j1 + j3 - j2;
    let c = j2 + j3 - j1;
    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = a.min(j1 - m1).min(j2 + m2);
    let mut sum = BigInt::zero();
    for k in k_min..=k_max {
        let term = binom(a, k) * binom(b, j1 - m1 - k) * binom(c, j2 + m2 - k);
        let term = BigInt::from_biguint(Sign::Plus, term);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return Ok(0.0);
    }
    let sign = if sum.sign() == Sign::Minus { -1.0 } else { 1.0 };
    let t = sum.magnitude();

    // 3j² = T² Π(j±m)! / (a! b! c! (J+1)!)
    let num = t
        * t
        * fact(j1 + m1)
        * fact(j1 - m1)
        * fact(j2 + m2)
        * fact(j2 - m2)
        * fact(j3 + m3)
        * fact(j3 - m3);
    let den = fact(a) * fact(b) * fact(c) * fact(j1 + j2 + j3 + 1);
    let magnitude = big_ratio_to_f64(&num, &den).sqrt();
    Ok(sign * phase(j1 - j2 - m3) * magnitude)
}

/// ⟨j1 m1 j2 m2 | J M⟩ in the Condon-Shortley convention.
pub fn clebsch_gordan(j1: i32, m1: i32, j2: i32, m2: i32, j: i32, m: i32) -> Result<f64, AngMathError> {
    for jj in [j1, j2, j] {
        if jj < 0 {
            return Err(AngMathError::NegativeJ(jj));
        }
    }
    if m1 + m2 != m || m.abs() > j {
        return Ok(0.0);
    }
    let w = wigner_3j(j1, j2, j, m1, m2, -m)?;
    Ok(phase((j1 - j2 + m) as i64) * ((2 * j + 1) as f64).sqrt() * w)
}

fn check_lm(l: i32, m: i32) -> Result<(), AngMathError> {
    if l < 0 {
        return Err(AngMathError::NegativeJ(l));
    }
    if m.abs() > l {
        return Err(AngMathError::ProjectionOutOfRange { l, m });
    }
    Ok(())
}

/// Gaunt integral ∫ Y*_{l1 m1} Y_{l2 m2} Y_{l3 m3} dΩ.
pub fn gaunt(l1: i32, m1: i32, l2: i32, m2: i32, l3: i32, m3: i32) -> Result<f64, AngMathError> {
    check_lm(l1, m1)?;
    check_lm(l2, m2)?;
    check_lm(l3, m3)?;
    if m1 != m2 + m3 || (l1 + l2 + l3) % 2 != 0 || l1 < (l2 - l3).abs() || l1 > l2 + l3 {
        return Ok(0.0);
    }
    // Y*_{l1 m1} = (-1)^{m1} Y_{l1,-m1}
    let norm = (((2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1)) as f64 / (4.0 * PI)).sqrt();
    let parity = wigner_3j(l1, l2, l3, 0, 0, 0)?;
    let proj = wigner_3j(l1, l2, l3, -m1, m2, m3)?;
    Ok(phase(m1 as i64) * norm * parity * proj)
}

/// Ladder factors a_lm = √(l(l+1) − m(m+1)), b_lm = √(l(l+1) − m(m−1)).
pub fn ladder_factors(l: i32, m: i32) -> Result<(f64, f64), AngMathError> {
    check_lm(l, m)?;
    let ll = (l * (l + 1)) as f64;
    let a = (ll - (m * (m + 1)) as f64).max(0.0).sqrt();
    let b = (ll - (m * (m - 1)) as f64).max(0.0).sqrt();
    Ok((a, b))
}

/// Normalized associated Legendre functions P̄_l^m(x) for l = m..=l_max at
/// fixed m ≥ 0, including the Condon-Shortley phase, so that
/// Y_lm(θ, φ) = P̄_l^m(cos θ) e^{imφ}.
pub fn legendre_normalized(l_max: i32, m: i32, x: f64) -> Vec<f64> {
    debug_assert!(m >= 0);
    if l_max < m {
        return Vec::new();
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        let k = k as f64;
        pmm *= -s * ((2.0 * k + 1.0) / (2.0 * k)).sqrt();
    }
    let mut out = Vec::with_capacity((l_max - m + 1) as usize);
    out.push(pmm);
    if l_max == m {
        return out;
    }
    let mf = m as f64;
    let pm1 = x * (2.0 * mf + 3.0).sqrt() * pmm;
    out.push(pm1);
    let (mut p2, mut p1) = (pmm, pm1);
    for l in (m + 2)..=l_max {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let p = a * (x * p1 - b * p2);
        out.push(p);
        p2 = p1;
        p1 = p;
    }
    out
}

/// Y_lm(θ, φ) with the Condon-Shortley phase.
pub fn spherical_harmonic(l: i32, m: i32, theta: f64, phi: f64) -> Result<Complex64, AngMathError> {
    check_lm(l, m)?;
    let p = *legendre_normalized(l, m.abs(), theta.cos()).last().unwrap();
    let y = Complex64::from_polar(p, m.abs() as f64 * phi);
    if m >= 0 {
        Ok(y)
    } else {
        Ok(phase(m as i64) * y.conj())
    }
}

/// Key of a Gaunt integral ⟨l1 m1| Y_{l2 m2} |l3 m3⟩ = ∫ Y*_{l1 m1} Y_{l2 m2} Y_{l3 m3}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GauntKey {
    pub l1: i16,
    pub m1: i16,
    pub l2: i16,
    pub m2: i16,
    pub l3: i16,
    pub m3: i16,
}

impl GauntKey {
    pub fn new(l1: i32, m1: i32, l2: i32, m2: i32, l3: i32, m3: i32) -> Self {
        Self {
            l1: l1 as i16,
            m1: m1 as i16,
            l2: l2 as i16,
            m2: m2 as i16,
            l3: l3 as i16,
            m3: m3 as i16,
        }
    }

    fn eval(&self) -> f64 {
        gaunt(
            self.l1 as i32,
            self.m1 as i32,
            self.l2 as i32,
            self.m2 as i32,
            self.l3 as i32,
            self.m3 as i32,
        )
        .unwrap_or(0.0)
    }

    fn is_allowed(&self) -> bool {
        let (l1, l2, l3) = (self.l1 as i32, self.l2 as i32, self.l3 as i32);
        self.m1 == self.m2 + self.m3
            && (l1 + l2 + l3) % 2 == 0
            && l1 >= (l2 - l3).abs()
            && l1 <= l2 + l3
            && self.m1.abs() <= self.l1
            && self.m2.abs() <= self.l2
            && self.m3.abs() <= self.l3
    }
}

/// Precomputed table of non-vanishing Gaunt integrals. Built once, read-only
/// afterwards; lookups of keys that were not precomputed fall back to direct
/// evaluation.
#[derive(Debug, Default, Clone)]
pub struct GauntTable {
    values: HashMap<GauntKey, f64>,
}

impl GauntTable {
    pub fn build<I: IntoIterator<Item = GauntKey>>(keys: I) -> Self {
        let mut keys: Vec<GauntKey> = keys.into_iter().filter(GauntKey::is_allowed).collect();
        keys.sort_by_key(|k| (k.l1, k.m1, k.l2, k.m2, k.l3, k.m3));
        keys.dedup();
        let values = keys.par_iter().map(|k| (*k, k.eval())).collect();
        Self { values }
    }

    /// Table covering ⟨l1 m1|Y_{λ q}|l2 m2⟩ for all l1, l2 in `ls`, all λ and
    /// all |q| ≤ q_max.
    pub fn for_multipoles(ls: &[i32], q_max: i32) -> Self {
        let mut keys = Vec::new();
        for &l1 in ls {
            for &l2 in ls {
                let mut lam = (l1 - l2).abs();
                while lam <= l1 + l2 {
                    for q in -q_max.min(lam)..=q_max.min(lam) {
                        for m2 in -l2..=l2 {
                            let m1 = m2 + q;
                            if m1.abs() <= l1 {
                                keys.push(GauntKey::new(l1, m1, lam, q, l2, m2));
                            }
                        }
                    }
                    lam += 2;
                }
            }
        }
        Self::build(keys)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, key: GauntKey) -> f64 {
        if !key.is_allowed() {
            return 0.0;
        }
        match self.values.get(&key) {
            Some(v) => *v,
            None => key.eval(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ln_fact(n: i64) -> f64 {
        (1..=n).map(|k| (k as f64).ln()).sum()
    }

    /// Direct Racah formula in floating point, independent of the binomial
    /// rewrite used by the implementation.
    fn racah_cg(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
        if m1 + m2 != m || j < (j1 - j2).abs() || j > j1 + j2 || m.abs() > j {
            return 0.0;
        }
        let pre = 0.5
            * (((2 * j + 1) as f64).ln() + ln_fact(j + j1 - j2) + ln_fact(j - j1 + j2) + ln_fact(j1 + j2 - j)
                - ln_fact(j1 + j2 + j + 1)
                + ln_fact(j + m)
                + ln_fact(j - m)
                + ln_fact(j1 - m1)
                + ln_fact(j1 + m1)
                + ln_fact(j2 - m2)
                + ln_fact(j2 + m2));
        let mut s = 0.0;
        for k in 0..=(j1 + j2 + j) {
            let args = [k, j1 + j2 - j - k, j1 - m1 - k, j2 + m2 - k, j - j2 + m1 + k, j - j1 - m2 + k];
            if args.iter().any(|a| *a < 0) {
                continue;
            }
            let d: f64 = args.iter().map(|a| ln_fact(*a)).sum();
            s += phase(k) * (pre - d).exp();
        }
        s
    }

    #[test]
    fn cg_identity_coupling() {
        assert_eq!(clebsch_gordan(0, 0, 0, 0, 0, 0).unwrap(), 1.0);
    }

    #[test]
    fn cg_two_p_waves_to_d() {
        let v = clebsch_gordan(1, 0, 1, 0, 2, 0).unwrap();
        assert!((v - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((v - racah_cg(1, 0, 1, 0, 2, 0)).abs() < 1e-14);
    }

    #[test]
    fn cg_projection_beyond_total_is_zero() {
        assert_eq!(clebsch_gordan(1, 1, 1, 1, 1, 2).unwrap(), 0.0);
    }

    #[test]
    fn cg_negative_j_is_rejected() {
        assert_eq!(clebsch_gordan(-1, 0, 1, 0, 1, 0), Err(AngMathError::NegativeJ(-1)));
    }

    #[test]
    fn cg_matches_racah_oracle() {
        for j1 in 0i32..=5 {
            for j2 in 0..=5 {
                for j in (j1 - j2).abs()..=(j1 + j2) {
                    for m1 in -j1..=j1 {
                        for m2 in -j2..=j2 {
                            let m = m1 + m2;
                            let got = clebsch_gordan(j1, m1, j2, m2, j, m).unwrap();
                            let want = racah_cg(j1 as i64, m1 as i64, j2 as i64, m2 as i64, j as i64, m as i64);
                            assert!((got - want).abs() < 1e-12, "{j1} {m1} {j2} {m2} {j} {m}: {got} vs {want}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cg_orthogonality_exhaustive() {
        for j1 in 0i32..=6 {
            for j2 in 0..=6 {
                let jmin = (j1 - j2).abs();
                let jmax = j1 + j2;
                for ja in jmin..=jmax {
                    for jb in jmin..=jmax {
                        for ma in -ja..=ja {
                            for mb in -jb..=jb {
                                let mut s = 0.0;
                                for m1 in -j1..=j1 {
                                    for m2 in -j2..=j2 {
                                        s += clebsch_gordan(j1, m1, j2, m2, ja, ma).unwrap()
                                            * clebsch_gordan(j1, m1, j2, m2, jb, mb).unwrap();
                                    }
                                }
                                let want = if ja == jb && ma == mb { 1.0 } else { 0.0 };
                                assert!((s - want).abs() < 1e-12, "{j1} {j2} {ja} {ma} {jb} {mb}: {s}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn large_j_coefficients_stay_normalized() {
        // Sum over m1 of CG² at fixed (J, M) equals 1 even for j ~ 40 where a
        // floating-point Racah sum would cancel catastrophically.
        let (j1, j2, j) = (38, 19, 25);
        let m = 3;
        let s: f64 = (-j1..=j1)
            .map(|m1| clebsch_gordan(j1, m1, j2, m - m1, j, m).unwrap().powi(2))
            .sum();
        assert!((s - 1.0).abs() < 1e-13, "{s}");
    }

    #[test]
    fn gaunt_constant_harmonics() {
        let v = gaunt(0, 0, 0, 0, 0, 0).unwrap();
        assert!((v - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
        assert_eq!(gaunt(1, 0, 1, 0, 1, 0).unwrap(), 0.0);
        assert!(matches!(gaunt(1, 2, 1, 0, 1, 0), Err(AngMathError::ProjectionOutOfRange { .. })));
    }

    fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
        crate::quadrature::gauss_legendre(n)
    }

    fn quadrature_gaunt(l1: i32, m1: i32, l2: i32, m2: i32, l3: i32, m3: i32) -> f64 {
        let (x, w) = gauss_legendre(40);
        let nphi = 64;
        let mut s = Complex64::new(0.0, 0.0);
        for (xi, wi) in x.iter().zip(&w) {
            let theta = xi.acos();
            for k in 0..nphi {
                let phi = 2.0 * PI * k as f64 / nphi as f64;
                let f = spherical_harmonic(l1, m1, theta, phi).unwrap().conj()
                    * spherical_harmonic(l2, m2, theta, phi).unwrap()
                    * spherical_harmonic(l3, m3, theta, phi).unwrap();
                s += f * wi * (2.0 * PI / nphi as f64);
            }
        }
        assert!(s.im.abs() < 1e-12);
        s.re
    }

    #[test]
    fn gaunt_matches_quadrature() {
        let v = gaunt(2, 0, 1, 0, 1, 0).unwrap();
        let q = quadrature_gaunt(2, 0, 1, 0, 1, 0);
        assert!((v - q).abs() < 1e-13, "{v} vs {q}");
        assert!((v - 0.252_313_252_202_016).abs() < 1e-12);
        for &(a, b, c, d, e, f) in &[(3, 1, 2, 1, 1, 0), (4, -2, 3, -1, 1, -1), (5, 2, 4, 1, 3, 1), (2, 2, 2, 1, 2, 1)] {
            let v = gaunt(a, b, c, d, e, f).unwrap();
            let q = quadrature_gaunt(a, b, c, d, e, f);
            assert!((v - q).abs() < 1e-12, "{v} vs {q}");
        }
    }

    #[test]
    fn gaunt_equals_cg_product_formula() {
        for l1 in 0i32..=6 {
            for l2 in 0..=6 {
                for l3 in 0..=6 {
                    for m2 in -l2..=l2 {
                        for m3 in -l3..=l3 {
                            let m1: i32 = m2 + m3;
                            if m1.abs() > l1 {
                                continue;
                            }
                            let g = gaunt(l1, m1, l2, m2, l3, m3).unwrap();
                            let cg = clebsch_gordan(l2, 0, l3, 0, l1, 0).unwrap()
                                * clebsch_gordan(l2, m2, l3, m3, l1, m1).unwrap()
                                * (((2 * l2 + 1) * (2 * l3 + 1)) as f64 / (4.0 * PI * (2 * l1 + 1) as f64)).sqrt();
                            assert!((g - cg).abs() < 1e-13);
                            // complex conjugation symmetry:
                            // ∫Y*_{l1m1}Y_{l2m2}Y_{l3m3} = (-1)^{m1+m2+m3}∫Y*_{l1,-m1}Y_{l2,-m2}Y_{l3,-m3}
                            let swapped = gaunt(l1, -m1, l2, -m2, l3, -m3).unwrap();
                            assert!((g - swapped).abs() < 1e-13);
                            // hermiticity in the outer pair
                            let h = gaunt(l3, m3, l2, -m2, l1, m1).unwrap() * phase(m2 as i64);
                            assert!((g - h).abs() < 1e-13);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn spherical_harmonic_pole_values() {
        let y = spherical_harmonic(0, 0, 0.3, 1.2).unwrap();
        assert!((y.re - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15 && y.im == 0.0);
        let y = spherical_harmonic(1, 0, 0.0, 0.0).unwrap();
        assert!((y.re - 0.488_602_511_902_919_9).abs() < 1e-15);
        assert!(spherical_harmonic(2, 3, 0.0, 0.0).is_err());
    }

    /// Associated Legendre function from the explicit finite sum
    /// P_l^m(x) = (-1)^m (1-x²)^{m/2} Σ_k ... (Rodrigues expanded).
    fn series_legendre(l: i64, m: i64, x: f64) -> f64 {
        let mut s = 0.0;
        for k in 0..=((l - m) / 2) {
            let c = phase(k)
                * (ln_fact(2 * l - 2 * k) - ln_fact(k) - ln_fact(l - k) - ln_fact(l - 2 * k - m)).exp()
                / 2f64.powi(l as i32);
            s += c * x.powi((l - 2 * k - m) as i32);
        }
        phase(m) * (1.0 - x * x).powf(m as f64 / 2.0) * s
    }

    #[test]
    fn spherical_harmonic_matches_series_oracle() {
        let (l, m, theta, phi) = (3i64, 2i64, 1.1f64, 0.7f64);
        let norm = (((2 * l + 1) as f64) / (4.0 * PI) * (ln_fact(l - m) - ln_fact(l + m)).exp()).sqrt();
        let want = Complex64::from_polar(norm * series_legendre(l, m, theta.cos()), m as f64 * phi);
        let got = spherical_harmonic(3, 2, theta, phi).unwrap();
        assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        for (l, m) in [(5, 0), (6, 3), (8, 5), (10, 1)] {
            let norm = (((2 * l + 1) as f64) / (4.0 * PI) * (ln_fact(l - m) - ln_fact(l + m)).exp()).sqrt();
            let want = norm * series_legendre(l, m, 0.37);
            let got = *legendre_normalized(l as i32, m as i32, 0.37).last().unwrap();
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn spherical_harmonic_negative_m_relation() {
        for l in 0..=8 {
            for m in 0..=l {
                let a = spherical_harmonic(l, -m, 0.8, 2.1).unwrap();
                let b = spherical_harmonic(l, m, 0.8, 2.1).unwrap().conj() * phase(m as i64);
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn spherical_harmonic_normalization_to_l25() {
        let (x, w) = gauss_legendre(60);
        for l in [0, 1, 5, 12, 19, 25] {
            for m in [0, l / 2, l] {
                // |Y_lm|² has no φ dependence, so the φ integral is 2π exactly.
                let s: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| {
                        let y = spherical_harmonic(l, m, xi.acos(), 0.4).unwrap();
                        wi * y.norm_sqr() * 2.0 * PI
                    })
                    .sum();
                assert!((s - 1.0).abs() < 1e-10, "l={l} m={m}: {s}");
            }
        }
    }

    #[test]
    fn ladder_factor_values() {
        let (a, b) = ladder_factors(1, 0).unwrap();
        assert!((a - 2f64.sqrt()).abs() < 1e-15 && (b - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(ladder_factors(1, 1).unwrap().0, 0.0);
        assert!((ladder_factors(1, 1).unwrap().1 - 2f64.sqrt()).abs() < 1e-15);
        let (a, b) = ladder_factors(5, -3).unwrap();
        assert!((a - 24f64.sqrt()).abs() < 1e-14);
        assert!((b - 18f64.sqrt()).abs() < 1e-14);
        assert!(ladder_factors(2, 3).is_err());
    }

    #[test]
    fn gaunt_table_agrees_with_direct_evaluation() {
        let table = GauntTable::for_multipoles(&[0, 3, 4], 1);
        assert!(!table.is_empty());
        let k = GauntKey::new(4, 1, 1, 1, 3, 0);
        assert_eq!(table.get(k), gaunt(4, 1, 1, 1, 3, 0).unwrap());
        assert_eq!(table.get(GauntKey::new(4, 1, 2, 1, 3, 0)), 0.0);
    }
}
