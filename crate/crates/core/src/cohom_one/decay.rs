//! Exponential decay of a cylindrical-end profile toward its limit.

use serde::{Deserialize, Serialize};

use super::profile::CoframeProfile;
use crate::error::{Error, Result};

/// Deviations below this are treated as round-off.
pub const DECAY_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// |g − g0|_{g0} ≈ C e^{−η t}
    pub eta: f64,
    pub constant: f64,
    /// Decades of deviation spanned by the fitting window.
    pub decades: f64,
    pub points: usize,
}

/// Pointwise |g − g0|_{g0} for g0 = dt² + Σ limit_i² σ_i².
pub fn deviation(p: &CoframeProfile, limit: [f64; 3]) -> Vec<f64> {
    (0..p.len())
        .map(|k| {
            let mut s = (p.q[k] - 1.0).powi(2);
            for i in 0..3 {
                let l2 = limit[i] * limit[i];
                s += ((p.a(i)[k].powi(2) - l2) / l2).powi(2);
            }
            s.sqrt()
        })
        .collect()
}

/// Least-squares fit of log deviation against t over the asymptotic window:
/// the last two thirds of the samples lying above [`DECAY_FLOOR`].
pub fn decay_rate_fit(p: &CoframeProfile, limit: [f64; 3]) -> Result<DecayFit> {
    let d = deviation(p, limit);
    let pts: Vec<(f64, f64)> = p
        .t
        .iter()
        .zip(&d)
        .filter(|(_, v)| **v > DECAY_FLOOR)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 6 {
        return Err(Error::Unmeasurable(format!(
            "only {} samples above the noise floor",
            pts.len()
        )));
    }
    let window = &pts[pts.len() / 3..];
    let (lo, hi) = window
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, y)| (a.min(*y), b.max(*y)));
    let decades = (hi - lo) / std::f64::consts::LN_10;
    if decades < 1.0 {
        return Err(Error::Unmeasurable(format!(
            "deviation spans {decades:.2} decades in the fitting window"
        )));
    }
    let (slope, intercept) = linear_fit(window);
    if slope >= 0.0 {
        return Err(Error::Unmeasurable("deviation does not decay".into()));
    }
    Ok(DecayFit { eta: -slope, constant: intercept.exp(), decades, points: window.len() })
}

/// Ordinary least squares y = m x + c.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let m = sxy / sxx;
    (m, my - m * mx)
}
