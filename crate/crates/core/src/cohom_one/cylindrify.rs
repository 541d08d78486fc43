//! Conformal change to a cylindrical end about a marked point.
//!
//! For g = Q dρ² + Σ B_i² σ_i², put r = ∫₀^ρ √Q and t = −log(r/r0). Then
//! g/r² = dt² + Σ (B_i/r)² σ_i².

use serde::{Deserialize, Serialize};

use super::decay::{decay_rate_fit, DecayFit};
use super::exact::RadialProfile;
use super::profile::{CoframeProfile, Jet, ProfileFn};
use crate::error::{Error, Result};
use crate::quad;

/// Cylindrical-end coordinates of a radial profile.
pub struct Cylindrified<P> {
    pub profile: P,
    pub r0: f64,
    r_max: f64,
}

impl<P: RadialProfile> Cylindrified<P> {
    pub fn new(profile: P, r0: f64) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::Invalid("r0 must be positive".into()));
        }
        let rho_max = profile.rho_max();
        let r_max = if profile.geodesic() {
            rho_max
        } else {
            let top = rho_max * (1.0 - 1e-9);
            quad::integrate(|x| profile.q(x).0.sqrt(), 0.0, top, 256)
        };
        Ok(Self { profile, r0, r_max })
    }

    /// Geodesic distance from the marked point.
    pub fn radius(&self, rho: f64) -> f64 {
        if self.profile.geodesic() {
            rho
        } else {
            let panels = 8 + (32.0 * rho / self.profile.rho_max().min(10.0)) as usize;
            quad::integrate(|x| self.profile.q(x).0.sqrt(), 0.0, rho, panels)
        }
    }

    pub fn rho_at(&self, r: f64) -> f64 {
        if self.profile.geodesic() {
            return r;
        }
        let hi = self.profile.rho_max().min(r * 10.0 + 1.0);
        quad::invert_monotone(|x| self.radius(x), |x| self.profile.q(x).0.sqrt(), r, 0.0, hi)
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Smallest t reachable before leaving the coordinate patch.
    pub fn t_min(&self) -> f64 {
        -(self.r_max / self.r0).ln()
    }

    /// B_i/r at geodesic radius r.
    pub fn ratio(&self, r: f64) -> [f64; 3] {
        let b = self.profile.b(self.rho_at(r)).0;
        [b[0] / r, b[1] / r, b[2] / r]
    }

    /// Require B_i/r → ½ with an O(r^{>1.5}) correction.
    pub fn check_smooth(&self) -> Result<()> {
        let r1 = 1e-2 * self.r_max.min(1.0);
        let r2 = 2.0 * r1;
        let d1 = self.ratio(r1).map(|v| (v - 0.5).abs());
        let d2 = self.ratio(r2).map(|v| (v - 0.5).abs());
        for i in 0..3 {
            if d1[i] > 1e-2 {
                return Err(Error::Hypothesis(format!(
                    "{}: B_{}/r tends to {} rather than 1/2 at the marked point",
                    self.profile.name(),
                    i + 1,
                    self.ratio(r1)[i]
                )));
            }
            if d2[i] > 1e-12 && d2[i] / d1[i].max(1e-300) < 2f64.powf(1.5) {
                return Err(Error::Hypothesis(format!(
                    "{}: B_{}/r − 1/2 decays too slowly at the marked point",
                    self.profile.name(),
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

impl<P: RadialProfile> ProfileFn for Cylindrified<P> {
    fn jet(&self, t: f64) -> Jet {
        let r = self.r0 * (-t).exp();
        let rho = self.rho_at(r);
        let (q, dq) = self.profile.q(rho);
        let (b, db, ddb) = self.profile.b(rho);
        let sq = q.sqrt();
        let mut j = Jet { q: 1.0, dq: 0.0, a: [0.0; 3], da: [0.0; 3], dda: [0.0; 3] };
        for i in 0..3 {
            let br = db[i] / sq;
            let brr = ddb[i] / q - db[i] * dq / (2.0 * q * q);
            j.a[i] = b[i] / r;
            j.da[i] = b[i] / r - br;
            j.dda[i] = -r * (-brr + br / r - b[i] / (r * r));
        }
        j
    }
}

/// A sampled cylindrical-end profile with its measured decay toward the round end.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CEProfile {
    pub name: String,
    pub base: CoframeProfile,
    /// Limiting a_i on the end (½ for the unit S³/ℤ_k).
    pub limit_h0: [f64; 3],
    pub eta: f64,
    pub decay_constant: f64,
    pub r0: f64,
}

impl CEProfile {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Cylindrify a radial profile and sample it on t ∈ [t0, t1].
pub fn cylindrify<P: RadialProfile>(
    profile: P,
    r0: f64,
    t0: f64,
    t1: f64,
    n: usize,
    orientation: i8,
) -> Result<CEProfile> {
    if n < 9 {
        return Err(Error::GridTooSmall("cylindrify needs ≥ 9 samples".into()));
    }
    if !(t1 > t0) {
        return Err(Error::Invalid("t1 must exceed t0".into()));
    }
    let name = profile.name().to_string();
    let k = profile.quotient_k();
    let c = Cylindrified::new(profile, r0)?;
    c.check_smooth()?;
    if t0 <= c.t_min() {
        return Err(Error::Invalid(format!("t0 = {t0} leaves the chart (t_min = {:.4})", c.t_min())));
    }
    let base = CoframeProfile::sample(&c, t0, t1, n, k, orientation);
    base.validate()?;
    let limit_h0 = [0.5; 3];
    let DecayFit { eta, constant, .. } = decay_rate_fit(&base, limit_h0)?;
    Ok(CEProfile { name, base, limit_h0, eta, decay_constant: constant, r0 })
}
