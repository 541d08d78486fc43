//! Re-verification of a corrected glued metric in the chart pipeline.

use serde::{Deserialize, Serialize};

use super::linearize::ReducedPerturbation;
use super::solver::corrected_profile;
use crate::cohom_one::cartan::weyl_block;
use crate::cohom_one::hopf::{hopf_chart, HopfBox};
use crate::cohom_one::profile::{CoframeProfile, Jet};
use crate::error::{Error, Result};
use crate::frame_curvature::{christoffel, self_dual_parts_at, RiemannOrder};
use crate::neck_glue::body::SampledJets;
use crate::neck_glue::config::GluedConfig;

/// θ-sampling of the Hopf chart (ψ inactive).
pub const CHART_THETA: (f64, f64, usize) = (0.9, 1.9, 9);

/// Grid cells dropped at each end of the τ-range.
const END_MARGIN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartCheck {
    /// sup |‖W^s_chart‖ − ‖W^s_reduced‖| on the uncorrected g(l).
    pub floor: f64,
    /// sup ‖W^s_reduced‖ on g(l).
    pub uncorrected: f64,
    /// sup ‖W^s_chart‖ on g(l)(1+h).
    pub corrected: f64,
    /// max |h1 − h2| removed by symmetrization before charting.
    pub asymmetry: f64,
    pub verified: bool,
}

fn chart_sup_and_gap(jets: &[Jet], t: &[f64], flag: i8, exact: Option<&[Jet]>) -> Result<(f64, f64)> {
    let n = t.len();
    let lo = END_MARGIN;
    let hi = n - 1 - END_MARGIN;
    let src = SampledJets::new(t.to_vec(), jets.to_vec())?;
    let b = HopfBox { t: (t[lo], t[hi], hi - lo + 1), theta: CHART_THETA, psi: (0.0, 0.0, 1) };
    let m = hopf_chart(&src, &b, flag)?;
    let chr = christoffel(&m)?;
    let g = &m.grid;
    let nodes: Vec<usize> = (0..g.len())
        .filter(|&node| {
            let i = g.multi(node);
            i[0] >= 2 && i[0] + 2 < g.n[0] && i[1] >= 2 && i[1] + 2 < g.n[1]
        })
        .collect();
    let parts = self_dual_parts_at(&m, &chr, RiemannOrder::Fourth, &nodes)?;
    let s = flag as f64;
    let (mut sup, mut gap): (f64, f64) = (0.0, 0.0);
    for (&node, (wp, _)) in nodes.iter().zip(&parts) {
        let c = wp.norm();
        sup = sup.max(c);
        if let Some(ex) = exact {
            let k = lo + g.multi(node)[0];
            gap = gap.max((c - weyl_block(&ex[k], s).norm()).abs());
        }
    }
    Ok((sup, gap))
}

/// Chart-pipeline W^s of g(l)(1+h) against the chart discretization floor
/// measured on g(l). Verified when the corrected value is within twice the floor.
pub fn chart_verification(cfg: &GluedConfig, h: &ReducedPerturbation) -> Result<ChartCheck> {
    if cfg.n() < 2 * END_MARGIN + 8 {
        return Err(Error::GridTooSmall("glued grid too short for the chart check".into()));
    }
    let asymmetry = (0..h.len()).map(|j| (h.h[0][j] - h.h[1][j]).abs()).fold(0.0, f64::max);
    let mut sym = h.clone();
    for j in 0..h.len() {
        let m = 0.5 * (h.h[0][j] + h.h[1][j]);
        sym.h[0][j] = m;
        sym.h[1][j] = m;
    }
    let s = cfg.flag as f64;
    let uncorrected = cfg.jets.iter().map(|j| weyl_block(j, s).norm()).fold(0.0, f64::max);
    let (_, floor) = chart_sup_and_gap(&cfg.jets, &cfg.tau, cfg.flag, Some(&cfg.jets))?;
    let p: CoframeProfile = corrected_profile(cfg, &sym)?;
    let (corrected, _) = chart_sup_and_gap(&p.jets()?, &p.t, cfg.flag, None)?;
    Ok(ChartCheck { floor, uncorrected, corrected, asymmetry, verified: corrected <= 2.0 * floor })
}
