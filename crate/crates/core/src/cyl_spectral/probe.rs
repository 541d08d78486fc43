//! Comparison of compact-side L^p norms with weighted cylinder-side norms for
//! sections of the curvature bundle supported near the marked point.
//!
//! Under g = r⁻² ḡ a (1,3)-tensor has |s|_g = r² |s|_ḡ and dvol_g = r⁻⁴ dvol_ḡ,
//! so the cylinder integrand (e^{δt} r² |s|)^p r⁻⁴ matches the compact one
//! exactly when (2 − δ)p = 4.

use serde::{Deserialize, Serialize};

use super::weights::simpson;
use crate::cohom_one::cylindrify::Cylindrified;
use crate::cohom_one::exact::RadialProfile;
use crate::cohom_one::profile::ProfileFn;
use crate::error::{Error, Result};
use crate::quad;

/// Radial test section |s|_ḡ = amplitude · (4x(1−x))³ with x = (r − ε/2)/(ε/2),
/// supported on r ∈ [ε/2, ε].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSection {
    pub scale: f64,
    pub amplitude: f64,
}

impl TestSection {
    pub fn value(&self, r: f64) -> f64 {
        let e = self.scale;
        let x = (r - 0.5 * e) / (0.5 * e);
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        self.amplitude * (4.0 * x * (1.0 - x)).powi(3)
    }
}

/// Supports at scale 2^{−j}, j = 1..=levels.
pub fn shrinking_family(levels: usize) -> Vec<TestSection> {
    (1..=levels).map(|j| TestSection { scale: 0.5f64.powi(j as i32), amplitude: 1.0 }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRatioReport {
    pub p: f64,
    pub delta: f64,
    /// (support scale, compact norm / cylinder norm)
    pub ratios: Vec<(f64, f64)>,
    pub min: f64,
    pub max: f64,
}

impl NormRatioReport {
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }
}

const CYL_NODES: usize = 401;
const COMPACT_PANELS: usize = 48;

fn compact_norm<P: RadialProfile>(c: &Cylindrified<P>, s: &TestSection, p: f64) -> f64 {
    let (lo, hi) = (c.rho_at(0.5 * s.scale), c.rho_at(s.scale));
    let prof = &c.profile;
    let f = |rho: f64| {
        let r = c.radius(rho);
        let (b, _, _) = prof.b(rho);
        s.value(r).abs().powf(p) * prof.q(rho).0.sqrt() * b[0] * b[1] * b[2]
    };
    quad::integrate(f, lo, hi, COMPACT_PANELS).powf(1.0 / p)
}

fn cylinder_norm<P: RadialProfile>(c: &Cylindrified<P>, s: &TestSection, p: f64, delta: f64) -> f64 {
    let t0 = -(s.scale / c.r0).ln();
    let t1 = -(0.5 * s.scale / c.r0).ln();
    let h = (t1 - t0) / (CYL_NODES - 1) as f64;
    let vals: Vec<f64> = (0..CYL_NODES)
        .map(|i| {
            let t = t0 + i as f64 * h;
            let r = c.r0 * (-t).exp();
            let j = c.jet(t);
            let norm_g = r * r * s.value(r);
            ((delta * t).exp() * norm_g).abs().powf(p) * j.q.sqrt() * j.a[0] * j.a[1] * j.a[2]
        })
        .collect();
    simpson(&vals, h).powf(1.0 / p)
}

/// Ratio of the L^p(ḡ) norm to the L^p_δ(g) norm over a family of test sections.
/// `delta` defaults to 2 − 4/p.
pub fn norm_equivalence_probe<P: RadialProfile>(
    profile: P,
    family: &[TestSection],
    p: f64,
    delta: Option<f64>,
) -> Result<NormRatioReport> {
    if !(p > 2.0 && p < 4.0) {
        return Err(Error::Invalid(format!("p = {p} outside (2, 4)")));
    }
    if family.is_empty() {
        return Err(Error::Invalid("empty section family".into()));
    }
    let delta = delta.unwrap_or(2.0 - 4.0 / p);
    let c = Cylindrified::new(profile, 1.0)?;
    let mut ratios = Vec::with_capacity(family.len());
    for s in family {
        if !(s.scale > 0.0) || s.scale >= c.r_max() {
            return Err(Error::Invalid(format!("support scale {} outside the chart", s.scale)));
        }
        let top = compact_norm(&c, s, p);
        let bottom = cylinder_norm(&c, s, p, delta);
        if !(top > 0.0 && bottom > 0.0) {
            return Err(Error::Undefined("norm ratio of a zero section".into()));
        }
        ratios.push((s.scale, top / bottom));
    }
    let min = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let max = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(NormRatioReport { p, delta, ratios, min, max })
}
