//! Exponential weights and weighted Sobolev norms on cylinders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stencil;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightProfile {
    /// e^{δt}
    Uniform,
    /// e^{−δ|τ|}, smoothed at τ = 0
    SymmetricDecaying,
    /// e^{δ|τ|}, smoothed at τ = 0
    SymmetricGrowing,
    /// exp(δ(l − |τ|)) on the neck, 1 beyond it, smoothed at τ = 0
    Neck { l: f64 },
    /// e^{δt} for t ≥ 1, switched off smoothly on t ≤ 0 (the compact piece)
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub p: f64,
    pub k: usize,
    pub delta: f64,
    pub profile: WeightProfile,
}

fn smooth_abs(t: f64) -> f64 {
    (t * t + 0.25).sqrt()
}

/// Quintic smoothstep on [0, 1].
pub fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

impl WeightSpec {
    pub fn new(p: f64, k: usize, delta: f64, profile: WeightProfile) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::Invalid(format!("p = {p} must exceed 1")));
        }
        if !delta.is_finite() {
            return Err(Error::Invalid("non-finite weight".into()));
        }
        Ok(Self { p, k, delta, profile })
    }

    pub fn l2(delta: f64, profile: WeightProfile) -> Self {
        Self { p: 2.0, k: 0, delta, profile }
    }

    /// The weight δ = 2 − 4/p paired with p ∈ (2, 4).
    pub fn conformal(p: f64, profile: WeightProfile) -> Result<Self> {
        if !(p > 2.0 && p < 4.0) {
            return Err(Error::Invalid(format!("p = {p} outside (2, 4)")));
        }
        Self::new(p, 0, 2.0 - 4.0 / p, profile)
    }

    pub fn at(&self, t: f64) -> f64 {
        let d = self.delta;
        match self.profile {
            WeightProfile::Uniform => (d * t).exp(),
            WeightProfile::SymmetricDecaying => (-d * smooth_abs(t)).exp(),
            WeightProfile::SymmetricGrowing => (d * smooth_abs(t)).exp(),
            WeightProfile::Neck { l } => (d * (l - smooth_abs(t)).max(0.0)).exp(),
            WeightProfile::End => (d * t * smoothstep(t)).exp(),
        }
    }

    /// The inverse weight, pairing L²_w with L²_{w⁻¹} for adjoints.
    pub fn dual(&self) -> Self {
        let profile = match self.profile {
            WeightProfile::SymmetricDecaying => WeightProfile::SymmetricGrowing,
            WeightProfile::SymmetricGrowing => WeightProfile::SymmetricDecaying,
            p => p,
        };
        let delta = match self.profile {
            WeightProfile::SymmetricDecaying | WeightProfile::SymmetricGrowing => self.delta,
            _ => -self.delta,
        };
        Self { delta, profile, ..*self }
    }
}

/// Composite Simpson on a uniform grid; the last panel falls back to the trapezoid
/// rule when the node count is even.
pub fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    let m = if n % 2 == 1 { n } else { n - 1 };
    let mut s = 0.0;
    if m >= 3 {
        s = f[0] + f[m - 1];
        for (i, v) in f.iter().enumerate().take(m - 1).skip(1) {
            s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        s *= h / 3.0;
    }
    if m < n {
        s += 0.5 * h * (f[n - 2] + f[n - 1]);
    }
    s
}

/// Σ_{r ≤ k} ‖w ∂_t^r u‖_p on a uniform t-grid, with optional cross-section volume factor.
pub fn weighted_norm(u: &[f64], t: &[f64], w: &WeightSpec) -> Result<f64> {
    if !(w.p > 1.0) {
        return Err(Error::Invalid(format!("p = {} must exceed 1", w.p)));
    }
    if u.len() != t.len() {
        return Err(Error::GridMismatch("field and grid lengths differ".into()));
    }
    if t.len() < 6 {
        return Err(Error::GridTooSmall("weighted_norm needs ≥ 6 samples".into()));
    }
    let h = t[1] - t[0];
    let wt: Vec<f64> = t.iter().map(|&x| w.at(x)).collect();
    let mut f = u.to_vec();
    let mut total = 0.0;
    for r in 0..=w.k {
        if r > 0 {
            f = stencil::derivative(&f, h);
        }
        let g: Vec<f64> = f.iter().zip(&wt).map(|(v, ww)| (ww * v).abs().powf(w.p)).collect();
        total += simpson(&g, h).powf(1.0 / w.p);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t1: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| t1 * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn closed_form_exponential() {
        let t = grid(5.0, 501);
        let u: Vec<f64> = t.iter().map(|x| (-x).exp()).collect();
        let w = WeightSpec::new(2.0, 0, 0.5, WeightProfile::Uniform).unwrap();
        let got = weighted_norm(&u, &t, &w).unwrap();
        let want = (1.0 - (-5.0f64).exp()).sqrt();
        assert!((got - want).abs() < 1e-9, "{got} {want}");
    }

    #[test]
    fn zero_field_has_zero_norm_and_p_checked() {
        let t = grid(1.0, 11);
        let w = WeightSpec::l2(1.0, WeightProfile::Uniform);
        assert_eq!(weighted_norm(&[0.0; 11], &t, &w).unwrap(), 0.0);
        let bad = WeightSpec { p: 1.0, ..w };
        assert!(weighted_norm(&[0.0; 11], &t, &bad).is_err());
        assert!(WeightSpec::conformal(4.5, WeightProfile::Uniform).is_err());
        assert!((WeightSpec::conformal(3.0, WeightProfile::Uniform).unwrap().delta - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn dual_inverts_weight() {
        for p in [
            WeightProfile::Uniform,
            WeightProfile::SymmetricDecaying,
            WeightProfile::Neck { l: 3.0 },
            WeightProfile::End,
        ] {
            let w = WeightSpec::l2(0.7, p);
            for t in [-2.0, 0.3, 4.0] {
                assert!((w.at(t) * w.dual().at(t) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn simpson_exact_on_cubics() {
        let t = grid(2.0, 9);
        let f: Vec<f64> = t.iter().map(|x| x * x * x - x).collect();
        assert!((simpson(&f, t[1]) - 2.0).abs() < 1e-13);
    }
}
