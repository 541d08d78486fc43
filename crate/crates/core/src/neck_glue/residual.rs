//! W⁺ of the glued profile g(l) across an l-sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{weight_profile, GlueSpec};
use crate::cohom_one::decay::linear_fit;
use crate::error::{Error, Result};
use crate::ift_solver::ReducedPerturbation;

/// Below this sup-norm the glued residual counts as round-off.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub l: f64,
    pub delta: f64,
    pub sup: f64,
    pub unweighted: f64,
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub rows: Vec<ResidualRow>,
    /// d log‖W⁺‖ / dl, absent when the residual sits at round-off.
    pub slope_unweighted: Option<f64>,
    pub slope_weighted: Option<f64>,
}

/// Sup, L² and w(l)-weighted L² norms of the pointwise W^s diagonal norm of g(l).
pub fn residual_row(spec: &GlueSpec, l: f64) -> Result<ResidualRow> {
    let cfg = spec.at(l)?;
    let strip = cfg.strip()?;
    let w = strip.wplus(&ReducedPerturbation::zeros(cfg.n()));
    let vol = strip.vol();
    let wt = weight_profile(&cfg).w;
    let (mut sup, mut un, mut we): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for j in 0..cfg.n() {
        let p2 = w[0][j].powi(2) + w[1][j].powi(2) + w[2][j].powi(2);
        sup = sup.max(p2.sqrt());
        un += p2 * vol[j];
        we += p2 * wt[j] * wt[j] * vol[j];
    }
    Ok(ResidualRow { l, delta: spec.delta, sup, unweighted: un.sqrt(), weighted: we.sqrt() })
}

pub fn residual_report(spec: &GlueSpec, sweep: &[f64]) -> Result<ResidualReport> {
    if sweep.len() < 4 {
        return Err(Error::Invalid("residual sweep needs ≥ 4 values of l".into()));
    }
    if sweep.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("residual sweep must be increasing".into()));
    }
    let rows: Vec<ResidualRow> = sweep.par_iter().map(|&l| residual_row(spec, l)).collect::<Result<_>>()?;
    let measurable = rows.iter().all(|r| r.sup > RESIDUAL_FLOOR);
    let slope = |f: fn(&ResidualRow) -> f64| {
        measurable.then(|| linear_fit(&rows.iter().map(|r| (r.l, f(r).ln())).collect::<Vec<_>>()).0)
    };
    Ok(ResidualReport { slope_unweighted: slope(|r| r.unweighted), slope_weighted: slope(|r| r.weighted), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neck_glue::{Body, GlueGrid};

    fn spec(b1: Body, b2: Body, delta: f64) -> GlueSpec {
        GlueSpec { body1: b1, body2: b2, delta, grid: GlueGrid::default() }
    }

    #[test]
    fn exact_cylinders_have_no_residual() {
        let c = Body::half_cylinder(1);
        let r = residual_report(&spec(c.clone(), c, 0.5), &[4.0, 5.0, 6.0, 7.0]).unwrap();
        assert!(r.rows.iter().all(|x| x.sup == 0.0));
        assert!(r.slope_unweighted.is_none());
    }

    #[test]
    fn s4_fubini_study_slopes() {
        let s = spec(Body::round_s4().unwrap(), Body::fubini_study().unwrap(), 2.0 / 3.0);
        let r = residual_report(&s, &[4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        let (a, b) = (r.slope_unweighted.unwrap(), r.slope_weighted.unwrap());
        assert!((a + 2.0).abs() < 0.2, "{a}");
        assert!((b + 4.0 / 3.0).abs() < 0.4 / 3.0, "{b}");
    }

    #[test]
    fn sweep_validation() {
        let c = Body::half_cylinder(1);
        assert!(residual_report(&spec(c.clone(), c, 0.5), &[4.0, 5.0, 6.0]).is_err());
    }
}
