//! Glued profiles S⁴ ♯ CP²: residual decay and the σ_min probe.

use asd_glue::neck_glue::{min_sv_probe, residual_report, Body, GlueGrid, GlueSpec, TransversalOptions};

fn main() -> asd_glue::Result<()> {
    let (s4, fs) = (Body::round_s4()?, Body::fubini_study()?);
    for delta in [1.0 / 3.0, 0.5, 2.0 / 3.0] {
        let spec = GlueSpec { body1: s4.clone(), body2: fs.clone(), delta, grid: GlueGrid::default() };
        let r = residual_report(&spec, &[4.0, 5.0, 6.0, 7.0, 8.0])?;
        println!(
            "δ = {delta:.3}: slopes {:.3} (unweighted), {:.3} (weighted)",
            r.slope_unweighted.unwrap_or(f64::NAN),
            r.slope_weighted.unwrap_or(f64::NAN)
        );
    }
    let spec = GlueSpec { body1: s4, body2: fs, delta: 2.0 / 3.0, grid: GlueGrid::default() };
    for row in min_sv_probe(&spec, TransversalOptions::default(), &[4.0, 8.0, 16.0])? {
        println!("l = {:>4}: σ_min restricted {:.3}, unrestricted {:.2e}", row.l, row.restricted, row.unrestricted);
    }
    Ok(())
}
