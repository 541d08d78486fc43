//! Cut-off bodies, the glued profile X(l) and its neck weight.

use serde::{Deserialize, Serialize};

use super::body::Body;
use crate::cohom_one::profile::{CoframeProfile, Jet};
use crate::cyl_spectral::smoothstep;
use crate::error::{Error, Result};
use crate::ift_solver::Strip;

/// α(x) = 1 − smoothstep(x) with its first two derivatives.
pub fn alpha(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (1.0, 0.0, 0.0);
    }
    if x >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let d1 = 30.0 * x * x * (1.0 - x) * (1.0 - x);
    let d2 = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
    (1.0 - smoothstep(x), -d1, -d2)
}

/// Blend toward the round end: v ↦ v∞ + α(t − l + 1)(v − v∞).
pub fn cutoff_jet(j: &Jet, t: f64, l: f64) -> Jet {
    let (al, al1, al2) = alpha(t - l + 1.0);
    let blend = |v: f64, dv: f64, ddv: f64, lim: f64| {
        let d = v - lim;
        (lim + al * d, al1 * d + al * dv, al2 * d + 2.0 * al1 * dv + al * ddv)
    };
    let (q, dq, _) = blend(j.q, j.dq, 0.0, 1.0);
    let mut out = Jet { q, dq, a: [0.0; 3], da: [0.0; 3], dda: [0.0; 3] };
    for i in 0..3 {
        let (a, da, dda) = blend(j.a[i], j.da[i], j.dda[i], 0.5);
        out.a[i] = a;
        out.da[i] = da;
        out.dda[i] = dda;
    }
    out
}

/// g_i(l) sampled on t ∈ [t0, l + 2] with n nodes: the body for t ≤ l − 1, round for t ≥ l.
pub fn cutoff_metric(b: &Body, l: f64, t0: f64, n: usize) -> Result<CoframeProfile> {
    if l < 2.0 {
        return Err(Error::Invalid(format!("neck half-length l = {l} must be ≥ 2")));
    }
    let t1 = l + 2.0;
    if b.t_max < t1 || t0 <= b.t_min {
        return Err(Error::Invalid(format!(
            "{}: body range [{}, {}] does not cover [{t0}, {t1}]",
            b.name, b.t_min, b.t_max
        )));
    }
    if n < 9 {
        return Err(Error::GridTooSmall("cutoff_metric needs ≥ 9 nodes".into()));
    }
    let t: Vec<f64> = (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect();
    let jets: Vec<Jet> = t.iter().map(|&x| cutoff_jet(&b.jet(x), x, l)).collect();
    Ok(CoframeProfile::from_jets(t, &jets, b.quotient_k, if b.flag == 0 { 1 } else { b.flag }))
}

/// Grid for the glued profile: τ ∈ [−l − pad, l + pad] with spacing h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlueGrid {
    pub h: f64,
    pub pad: f64,
}

impl Default for GlueGrid {
    fn default() -> Self {
        Self { h: 0.1, pad: 0.3 }
    }
}

/// Two bodies, a weight and a grid: everything except l.
#[derive(Debug, Clone)]
pub struct GlueSpec {
    pub body1: Body,
    pub body2: Body,
    pub delta: f64,
    pub grid: GlueGrid,
}

impl GlueSpec {
    pub fn at(&self, l: f64) -> Result<GluedConfig> {
        attach_bodies(&self.body1, &self.body2, l, self.delta, self.grid)
    }

    /// Orientation flag of the glued problem (see [`glue_flag`]).
    pub fn flag(&self) -> Result<i8> {
        glue_flag(&self.body1, &self.body2)
    }
}

/// The glued profile X(l).
#[derive(Debug, Clone)]
pub struct GluedConfig {
    pub bodies: (Body, Body),
    pub l: f64,
    pub delta: f64,
    pub grid: GlueGrid,
    /// Orientation flag of the glued profile in the τ-chart.
    pub flag: i8,
    pub tau: Vec<f64>,
    pub jets: Vec<Jet>,
    pub metric: CoframeProfile,
}

/// Body 2 enters through τ = l − t₂, which reverses its t-line and therefore its flag.
/// A glued flag s exists when body 1 allows s and body 2 allows −s.
pub fn glue_flag(b1: &Body, b2: &Body) -> Result<i8> {
    let s = match (b1.flag, b2.flag) {
        (0, 0) => 1,
        (0, f) => -f,
        (f, _) => f,
    };
    if b2.flag != 0 && b2.flag != -s {
        return Err(Error::Orientation(format!(
            "{} is ASD for flag {} and {} for flag {}; after reflection they need opposite flags",
            b1.name, b1.flag, b2.name, b2.flag
        )));
    }
    Ok(s)
}

/// Largest δ admissible for the glued problem: min(η₁, η₂, δ₀) with δ₀ from the
/// reduced cylinder model at the glued flag (absent when no positive weight exists).
pub fn weight_bound(b1: &Body, b2: &Body, flag: i8) -> f64 {
    let d0 = if flag < 0 { 2.0 } else { f64::INFINITY };
    b1.eta.min(b2.eta).min(d0)
}

pub fn attach_bodies(b1: &Body, b2: &Body, l: f64, delta: f64, grid: GlueGrid) -> Result<GluedConfig> {
    if b1.quotient_k != b2.quotient_k {
        return Err(Error::Complementarity(format!(
            "cross-sections S³/ℤ_{} and S³/ℤ_{} do not match",
            b1.quotient_k, b2.quotient_k
        )));
    }
    let flag = glue_flag(b1, b2)?;
    if l < 2.0 {
        return Err(Error::Invalid(format!("neck half-length l = {l} must be ≥ 2")));
    }
    let bound = weight_bound(b1, b2, flag);
    if !(delta >= 0.0 && delta < bound) {
        return Err(Error::Invalid(format!("weight δ = {delta} outside [0, {bound})")));
    }
    let GlueGrid { h, pad } = grid;
    if !(h > 0.0 && pad >= 0.0) {
        return Err(Error::Invalid("grid spacing must be positive".into()));
    }
    for b in [b1, b2] {
        if -pad <= b.t_min || b.t_max < l + pad {
            return Err(Error::Invalid(format!("{} does not cover t ∈ [{}, {}]", b.name, -pad, l + pad)));
        }
    }
    let n = ((2.0 * (l + pad)) / h).round() as usize + 1;
    let h = 2.0 * (l + pad) / (n - 1) as f64;
    let tau: Vec<f64> = (0..n).map(|i| -l - pad + i as f64 * h).collect();
    let jets: Vec<Jet> = tau
        .iter()
        .map(|&x| {
            if x <= 0.0 {
                cutoff_jet(&b1.jet(x + l), x + l, l)
            } else {
                let j = cutoff_jet(&b2.jet(l - x), l - x, l);
                Jet { dq: -j.dq, da: j.da.map(|v| -v), ..j }
            }
        })
        .collect();
    let (left, right) = (cutoff_jet(&b1.jet(l), l, l), cutoff_jet(&b2.jet(l), l, l));
    let gap = (left.q - right.q).abs() + (0..3).map(|i| (left.a[i] - right.a[i]).abs()).sum::<f64>();
    if gap > 1e-12 {
        return Err(Error::Invalid(format!("overlap mismatch {gap:.3e} at τ = 0")));
    }
    let metric = CoframeProfile::from_jets(tau.clone(), &jets, b1.quotient_k, flag);
    Ok(GluedConfig { bodies: (b1.clone(), b2.clone()), l, delta, grid: GlueGrid { h, pad }, flag, tau, jets, metric })
}

/// Neck weight: exp(δ (l − s(τ)) β(τ)) with s(τ) = √(τ² + ¼) − ½ and β = α(|τ| − l + 1),
/// so w = e^{δl} at τ = 0 and w = 1 on both bodies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeckWeight {
    pub w: Vec<f64>,
    pub peak: f64,
}

pub fn neck_weight(tau: f64, l: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        return 1.0;
    }
    let s = (tau * tau + 0.25).sqrt() - 0.5;
    let beta = alpha(tau.abs() - l + 1.0).0;
    (delta * (l - s) * beta).exp()
}

pub fn weight_profile(cfg: &GluedConfig) -> NeckWeight {
    let w: Vec<f64> = cfg.tau.iter().map(|&t| neck_weight(t, cfg.l, cfg.delta)).collect();
    let peak = w.iter().cloned().fold(0.0, f64::max);
    NeckWeight { w, peak }
}

impl GluedConfig {
    pub fn n(&self) -> usize {
        self.tau.len()
    }

    /// The discrete 𝒟(l) weighted by w(l), with no boundary rows.
    pub fn strip(&self) -> Result<Strip> {
        Strip::new(self.tau.clone(), self.jets.clone(), weight_profile(self).w, self.flag as f64, (false, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohom_one::cartan::wplus_reduced;

    #[test]
    fn alpha_is_smooth_step_down() {
        assert_eq!(alpha(-0.1), (1.0, 0.0, 0.0));
        assert_eq!(alpha(1.2), (0.0, 0.0, 0.0));
        let h = 1e-5;
        for x in [0.2, 0.5, 0.9] {
            let fd = (alpha(x + h).0 - alpha(x - h).0) / (2.0 * h);
            assert!((fd - alpha(x).1).abs() < 1e-8);
            let fd2 = (alpha(x + h).1 - alpha(x - h).1) / (2.0 * h);
            assert!((fd2 - alpha(x).2).abs() < 1e-6);
        }
    }

    #[test]
    fn cutoff_of_s4_is_exponentially_close() {
        let b = Body::round_s4().unwrap();
        let l = 6.0;
        let p = cutoff_metric(&b, l, 0.0, 161).unwrap();
        let mut worst: f64 = 0.0;
        for (k, &t) in p.t.iter().enumerate() {
            let j = b.jet(t);
            let d = (0..3).map(|i| (p.a(i)[k] - j.a[i]).abs()).fold(0.0, f64::max);
            if t <= l - 1.0 {
                assert!(d == 0.0, "t = {t}: {d}");
            }
            if t >= l {
                assert!((0..3).all(|i| p.a(i)[k] == 0.5));
            }
            worst = worst.max(d);
        }
        // |a − ½| ≈ r²/12 with r = e^{−t}
        assert!(worst <= (-2.0 * (l - 1.0)).exp() / 12.0 * 1.01, "{worst}");
    }

    #[test]
    fn half_cylinders_glue_to_a_cylinder() {
        let c = Body::half_cylinder(1);
        let cfg = attach_bodies(&c, &c, 4.0, 0.5, GlueGrid::default()).unwrap();
        let w = wplus_reduced(&cfg.metric).unwrap();
        assert!(w.sup_norm() < 1e-15);
    }

    #[test]
    fn glued_profile_equals_bodies_off_neck() {
        let (b1, b2) = (Body::round_s4().unwrap(), Body::fubini_study().unwrap());
        let l = 6.0;
        let cfg = attach_bodies(&b1, &b2, l, 2.0 / 3.0, GlueGrid::default()).unwrap();
        assert_eq!(cfg.flag, 1);
        for (k, &x) in cfg.tau.iter().enumerate() {
            let close = |u: [f64; 3], v: [f64; 3]| (0..3).all(|i| (u[i] - v[i]).abs() < 1e-12);
            if x + l <= l - 1.0 {
                let j = b1.jet(x + l);
                assert!(close(cfg.jets[k].a, j.a) && close(cfg.jets[k].da, j.da));
            }
            if l - x <= l - 1.0 {
                let j = b2.jet(l - x);
                assert!(close(cfg.jets[k].a, j.a) && close(cfg.jets[k].da, j.da.map(|v| -v)));
            }
        }
    }

    #[test]
    fn complementarity_and_orientation_errors() {
        let g = GlueGrid::default();
        let (s4, eh) = (Body::round_s4().unwrap(), Body::compactified_eguchi_hanson(1.0).unwrap());
        assert!(matches!(attach_bodies(&eh, &s4, 6.0, 0.5, g), Err(Error::Complementarity(_))));
        assert!(matches!(attach_bodies(&eh, &eh, 6.0, 0.5, g), Err(Error::Orientation(_))));
        let q = Body::round_s4_quotient(2).unwrap();
        assert_eq!(attach_bodies(&q, &eh, 6.0, 0.5, g).unwrap().flag, 1);
    }

    #[test]
    fn weight_profile_shape() {
        let c = Body::half_cylinder(1);
        let cfg = attach_bodies(&c, &c, 6.0, 2.0 / 3.0, GlueGrid::default()).unwrap();
        let w = weight_profile(&cfg);
        assert!((w.peak / 4f64.exp() - 1.0).abs() < 0.01);
        for (k, &t) in cfg.tau.iter().enumerate() {
            if t.abs() >= cfg.l {
                assert_eq!(w.w[k], 1.0);
            }
        }
        let flat = attach_bodies(&c, &c, 6.0, 0.0, GlueGrid::default()).unwrap();
        assert!(weight_profile(&flat).w.iter().all(|&v| v == 1.0));
    }
}
