//! Gauge-fixed Newton solve on S⁴ ♯ CP² and chart re-verification.

use asd_glue::ift_solver::{chart_verification, solve_asd, weighted_norm, SolverOptions};
use asd_glue::neck_glue::{kernel_bases, Body, GlueGrid, GlueSpec};

fn main() -> asd_glue::Result<()> {
    let spec = GlueSpec {
        body1: Body::round_s4()?,
        body2: Body::fubini_study()?,
        delta: 2.0 / 3.0,
        grid: GlueGrid::default(),
    };
    let bases = kernel_bases(&spec)?;
    for l in [5.0, 6.0, 7.0, 8.0] {
        let cfg = spec.at(l)?;
        let s = solve_asd(&cfg, &bases, &SolverOptions::default())?;
        for it in &s.iterates {
            println!("  l = {l} iter {}: residual_W {:.2e} gauge {:.2e}", it.iter, it.residual_w, it.residual_gauge);
        }
        let chart = chart_verification(&cfg, &s.h)?;
        println!(
            "l = {l}: |h|_w = {:.3e}, chart sup |W| {:.2e} (floor {:.2e}, verified {})",
            weighted_norm(&cfg.strip()?, &s.h),
            chart.corrected,
            chart.floor,
            chart.verified
        );
    }
    Ok(())
}
