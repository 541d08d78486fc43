//! Closed-form profiles.

use super::profile::{CoframeProfile, Jet, ProfileFn};
use crate::error::{Error, Result};
use crate::quad;

/// dt² + ¼ Σσ_i²: S³ × ℝ with unit-curvature cross-section.
#[derive(Debug, Clone, Copy, Default)]
pub struct RoundCylinder;

impl ProfileFn for RoundCylinder {
    fn jet(&self, _t: f64) -> Jet {
        Jet::cylinder()
    }
}

/// Flat ℝ⁴ as dr² + (r²/4)Σσ_i², parametrized by t = r.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatCone;

impl ProfileFn for FlatCone {
    fn jet(&self, r: f64) -> Jet {
        Jet { q: 1.0, dq: 0.0, a: [r / 2.0; 3], da: [0.5; 3], dda: [0.0; 3] }
    }
}

/// Berger sphere × line: a1 = a2 = 1/2, a3 = c.
#[derive(Debug, Clone, Copy)]
pub struct Berger {
    pub a3: f64,
}

impl ProfileFn for Berger {
    fn jet(&self, _t: f64) -> Jet {
        Jet { q: 1.0, dq: 0.0, a: [0.5, 0.5, self.a3], da: [0.0; 3], dda: [0.0; 3] }
    }
}

/// Orientation flag for which the Eguchi–Hanson W⁺ vanishes in the r-chart.
pub const EGUCHI_HANSON_ORIENTATION: i8 = -1;

/// Eguchi–Hanson dr²/F + (r²/4)(σ1²+σ2²) + (r²/4)Fσ3², F = 1 − a⁴/r⁴, in arc length s.
#[derive(Debug, Clone, Copy)]
pub struct EguchiHanson {
    pub a: f64,
    /// r at s = 0.
    pub r_start: f64,
}

impl EguchiHanson {
    pub fn new(a: f64, r_start: f64) -> Result<Self> {
        if !(a > 0.0) || !(r_start > a) {
            return Err(Error::Invalid(format!("Eguchi–Hanson needs r > a > 0 (a={a}, r={r_start})")));
        }
        Ok(Self { a, r_start })
    }

    fn f(&self, r: f64) -> f64 {
        1.0 - (self.a / r).powi(4)
    }

    /// Jet with respect to arc length, at radius r.
    pub fn jet_at_r(&self, r: f64) -> Jet {
        let a4 = self.a.powi(4);
        let f = self.f(r);
        let sf = f.sqrt();
        let r5 = r.powi(5);
        Jet {
            q: 1.0,
            dq: 0.0,
            a: [r / 2.0, r / 2.0, r * sf / 2.0],
            da: [sf / 2.0, sf / 2.0, 0.5 * (1.0 + a4 / r.powi(4))],
            dda: [a4 / r5, a4 / r5, -2.0 * a4 * sf / r5],
        }
    }

    /// s(r) = ∫_{r_start}^r dr/√F.
    pub fn arc_length(&self, r: f64) -> f64 {
        quad::integrate(|x| 1.0 / self.f(x).sqrt(), self.r_start, r, 64)
    }

    pub fn radius_at(&self, s: f64) -> f64 {
        let hi = self.r_start + s + 1.0;
        quad::invert_monotone(
            |r| self.arc_length(r),
            |r| 1.0 / self.f(r).sqrt(),
            s,
            self.r_start,
            hi,
        )
    }
}

impl ProfileFn for EguchiHanson {
    fn jet(&self, s: f64) -> Jet {
        self.jet_at_r(self.radius_at(s))
    }
}

/// Sampled Eguchi–Hanson profile on r ∈ [r_min, r_max], reparametrized to arc length.
pub fn eguchi_hanson_profile(a: f64, r_min: f64, r_max: f64, n: usize, quotient_k: u32) -> Result<CoframeProfile> {
    if quotient_k != 2 {
        return Err(Error::Invalid(format!(
            "Eguchi–Hanson cross-section is S³/ℤ₂; quotient_k = {quotient_k} requested"
        )));
    }
    if !(r_max > r_min) {
        return Err(Error::Invalid("r_max must exceed r_min".into()));
    }
    if n < 2 {
        return Err(Error::GridTooSmall("need at least 2 nodes".into()));
    }
    let eh = EguchiHanson::new(a, r_min)?;
    let s_max = eh.arc_length(r_max);
    let mut t = Vec::with_capacity(n);
    let mut jets = Vec::with_capacity(n);
    let mut r = r_min;
    for i in 0..n {
        let s = s_max * i as f64 / (n - 1) as f64;
        r = quad::invert_monotone(|x| eh.arc_length(x), |x| 1.0 / eh.f(x).sqrt(), s, r_min.max(r - 1e-9), r_max + 1.0);
        t.push(s);
        jets.push(eh.jet_at_r(r));
    }
    Ok(CoframeProfile::from_jets(t, &jets, 2, EGUCHI_HANSON_ORIENTATION))
}

/// Compact-side profile Q(ρ)dρ² + Σ B_i(ρ)² σ_i² about a marked point at ρ = 0.
pub trait RadialProfile: Sync + Send {
    /// (Q, dQ/dρ)
    fn q(&self, rho: f64) -> (f64, f64);
    /// (B, B', B'') componentwise in ρ.
    fn b(&self, rho: f64) -> ([f64; 3], [f64; 3], [f64; 3]);
    /// Largest admissible ρ (exclusive).
    fn rho_max(&self) -> f64;
    fn quotient_k(&self) -> u32;
    fn name(&self) -> &str;
    /// True when Q ≡ 1 so ρ is already geodesic distance.
    fn geodesic(&self) -> bool {
        false
    }
}

/// Unit round S⁴: dρ² + (sin²ρ/4)Σσ_i².
#[derive(Debug, Clone, Copy, Default)]
pub struct RoundS4;

impl RadialProfile for RoundS4 {
    fn q(&self, _: f64) -> (f64, f64) {
        (1.0, 0.0)
    }
    fn b(&self, r: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
        let (s, c) = r.sin_cos();
        ([s / 2.0; 3], [c / 2.0; 3], [-s / 2.0; 3])
    }
    fn rho_max(&self) -> f64 {
        std::f64::consts::PI
    }
    fn quotient_k(&self) -> u32 {
        1
    }
    fn name(&self) -> &str {
        "round-s4"
    }
    fn geodesic(&self) -> bool {
        true
    }
}

/// A radial profile divided by ℤ_k acting in the σ3 circle (the local geometry is unchanged).
#[derive(Debug, Clone, Copy)]
pub struct Quotient<P> {
    pub inner: P,
    pub k: u32,
    name: &'static str,
}

impl<P: RadialProfile> Quotient<P> {
    pub fn new(inner: P, k: u32, name: &'static str) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("quotient order must be positive".into()));
        }
        Ok(Self { inner, k, name })
    }
}

impl<P: RadialProfile> RadialProfile for Quotient<P> {
    fn q(&self, rho: f64) -> (f64, f64) {
        self.inner.q(rho)
    }
    fn b(&self, rho: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
        self.inner.b(rho)
    }
    fn rho_max(&self) -> f64 {
        self.inner.rho_max()
    }
    fn quotient_k(&self) -> u32 {
        self.k * self.inner.quotient_k()
    }
    fn name(&self) -> &str {
        self.name
    }
    fn geodesic(&self) -> bool {
        self.inner.geodesic()
    }
}

/// Flat ℝ⁴ ball: dρ² + (ρ²/4)Σσ_i².
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatBall;

impl RadialProfile for FlatBall {
    fn q(&self, _: f64) -> (f64, f64) {
        (1.0, 0.0)
    }
    fn b(&self, r: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
        ([r / 2.0; 3], [0.5; 3], [0.0; 3])
    }
    fn rho_max(&self) -> f64 {
        f64::INFINITY
    }
    fn quotient_k(&self) -> u32 {
        1
    }
    fn name(&self) -> &str {
        "flat-ball"
    }
    fn geodesic(&self) -> bool {
        true
    }
}

/// Fubini–Study about a point: dρ² + (sin²ρ/4)(σ1²+σ2²) + (sin²ρ cos²ρ/4)σ3²,
/// optionally divided by ℤ_k acting in the σ3 circle.
#[derive(Debug, Clone, Copy)]
pub struct FubiniStudy {
    pub quotient_k: u32,
}

impl RadialProfile for FubiniStudy {
    fn q(&self, _: f64) -> (f64, f64) {
        (1.0, 0.0)
    }
    fn b(&self, r: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
        let (s, c) = r.sin_cos();
        let (s2, c2) = (2.0 * r).sin_cos();
        ([s / 2.0, s / 2.0, s2 / 4.0], [c / 2.0, c / 2.0, c2 / 2.0], [-s / 2.0, -s / 2.0, -s2])
    }
    fn rho_max(&self) -> f64 {
        std::f64::consts::FRAC_PI_2
    }
    fn quotient_k(&self) -> u32 {
        self.quotient_k
    }
    fn name(&self) -> &str {
        "fubini-study"
    }
    fn geodesic(&self) -> bool {
        true
    }
}

/// Eguchi–Hanson conformally compactified at infinity, in ρ = 1/r:
/// ḡ = (2/(1+ρ²))² ρ⁴ g_EH, so Q = (2/(1+ρ²))²/F, B1 = B2 = ρ/(1+ρ²), B3 = ρ√F/(1+ρ²).
#[derive(Debug, Clone, Copy)]
pub struct CompactifiedEguchiHanson {
    pub a: f64,
}

impl CompactifiedEguchiHanson {
    fn f(&self, rho: f64) -> (f64, f64, f64) {
        let a4 = self.a.powi(4);
        (1.0 - a4 * rho.powi(4), -4.0 * a4 * rho.powi(3), -12.0 * a4 * rho * rho)
    }
}

impl RadialProfile for CompactifiedEguchiHanson {
    fn q(&self, rho: f64) -> (f64, f64) {
        let (f, df, _) = self.f(rho);
        let p = 1.0 + rho * rho;
        let num = 4.0 / (p * p);
        let dnum = -16.0 * rho / (p * p * p);
        (num / f, dnum / f - num * df / (f * f))
    }
    fn b(&self, rho: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
        let (f, df, ddf) = self.f(rho);
        let p = 1.0 + rho * rho;
        // u = ρ/(1+ρ²)
        let u = rho / p;
        let du = (1.0 - rho * rho) / (p * p);
        let ddu = 2.0 * rho * (rho * rho - 3.0) / (p * p * p);
        let sf = f.sqrt();
        let dsf = df / (2.0 * sf);
        let ddsf = ddf / (2.0 * sf) - df * df / (4.0 * f * sf);
        let b3 = u * sf;
        let db3 = du * sf + u * dsf;
        let ddb3 = ddu * sf + 2.0 * du * dsf + u * ddsf;
        ([u, u, b3], [du, du, db3], [ddu, ddu, ddb3])
    }
    fn rho_max(&self) -> f64 {
        1.0 / self.a
    }
    fn quotient_k(&self) -> u32 {
        2
    }
    fn name(&self) -> &str {
        "compactified-eguchi-hanson"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohom_one::cartan::wplus_diag;

    #[test]
    fn eguchi_hanson_is_asd_in_r_chart() {
        let eh = EguchiHanson::new(1.0, 1.05).unwrap();
        for r in [1.1, 1.5, 3.0] {
            let j = eh.jet_at_r(r);
            let w = wplus_diag(&j, EGUCHI_HANSON_ORIENTATION as f64);
            assert!(w.iter().all(|v| v.abs() < 1e-12), "{w:?}");
            let other = wplus_diag(&j, -(EGUCHI_HANSON_ORIENTATION as f64));
            assert!(other.iter().any(|v| v.abs() > 1e-3));
        }
    }

    #[test]
    fn eguchi_hanson_arc_length_inverts() {
        let eh = EguchiHanson::new(1.0, 1.2).unwrap();
        let r = eh.radius_at(0.7);
        assert!((eh.arc_length(r) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn quotient_must_be_two() {
        assert!(eguchi_hanson_profile(1.0, 1.1, 3.0, 20, 1).is_err());
        assert!(eguchi_hanson_profile(1.0, 0.9, 3.0, 20, 2).is_err());
        let p = eguchi_hanson_profile(1.0, 1.1, 3.0, 20, 2).unwrap();
        assert_eq!(p.quotient_k, 2);
    }

    #[test]
    fn compactified_eh_derivatives_match_differences() {
        let c = CompactifiedEguchiHanson { a: 1.0 };
        let h = 1e-5;
        for rho in [0.1, 0.4, 0.7] {
            let (b, db, ddb) = c.b(rho);
            let (bp, ..) = c.b(rho + h);
            let (bm, ..) = c.b(rho - h);
            let (_, dbp, _) = c.b(rho + h);
            let (_, dbm, _) = c.b(rho - h);
            for i in 0..3 {
                assert!(((bp[i] - bm[i]) / (2.0 * h) - db[i]).abs() < 1e-8);
                assert!(((dbp[i] - dbm[i]) / (2.0 * h) - ddb[i]).abs() < 1e-7);
            }
            let _ = b;
            let (qp, _) = c.q(rho + h);
            let (qm, _) = c.q(rho - h);
            assert!(((qp - qm) / (2.0 * h) - c.q(rho).1).abs() < 1e-6);
        }
    }
}
