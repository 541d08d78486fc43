//! Cohomogeneity-one profiles: Cartan curvature, pipeline agreement, cylindrification.

use asd_glue::cohom_one::{
    cylindrify, pipeline_discrepancy, wplus_reduced, Berger, CompactifiedEguchiHanson, HopfBox, RoundS4,
};
use asd_glue::frame_curvature::RiemannOrder;

fn main() -> asd_glue::Result<()> {
    let berger = Berger { a3: 0.3 };
    for n in [33, 65, 129] {
        let b = HopfBox { t: (0.0, 0.0, 1), theta: (0.8, 2.0, n), psi: (0.0, 0.0, 1) };
        println!("Berger, {n} θ-nodes: chart vs Cartan gap {:.3e}", pipeline_discrepancy(&berger, &b, RiemannOrder::Second)?);
    }

    let s4 = cylindrify(RoundS4, 1.0, 0.0, 12.0, 241, 1)?;
    let eh = cylindrify(CompactifiedEguchiHanson { a: 1.0 }, 1.0, 0.0, 12.0, 241, -1)?;
    println!("η(S⁴) = {:.4}, η(EH) = {:.4}", s4.eta, eh.eta);

    let w = wplus_reduced(&eh.base)?;
    let sup = (0..eh.base.len()).map(|j| w.w[0][j].abs().max(w.w[1][j].abs()).max(w.w[2][j].abs())).fold(0.0, f64::max);
    println!("cylindrified EH, flag −1: sup |W| = {sup:.2e}");
    Ok(())
}
