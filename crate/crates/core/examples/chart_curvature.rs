//! Chart pipeline: metric file round trip, W± blocks, conformal invariance.

use asd_glue::cohom_one::{hopf_chart, FubiniStudy, HopfBox, Jet, RadialProfile};
use asd_glue::frame_curvature::io::{load_metric, save_metric};
use asd_glue::frame_curvature::{
    christoffel, conformal_deviation, interior_nodes, random_factors, riemann_from_christoffel, weyl_decompose,
    wminus_project, wplus_project, RiemannOrder,
};

fn main() -> asd_glue::Result<()> {
    let fs = |r: f64| {
        let (a, da, dda) = FubiniStudy { quotient_k: 1 }.b(r);
        Jet { q: 1.0, dq: 0.0, a, da, dda }
    };
    let b = HopfBox { t: (0.6, 1.2, 25), theta: (0.9, 1.9, 25), psi: (0.0, 0.0, 1) };
    let m = hopf_chart(&fs, &b, -1)?;

    let path = std::env::temp_dir().join("fubini_study_chart.grid");
    save_metric(&path, &m)?;
    let m = load_metric(&path)?;

    let weyl = weyl_decompose(&riemann_from_christoffel(&m, christoffel(&m)?)?, &m)?;
    println!("sup |W+| = {:.4}", wplus_project(&weyl, &m)?.sup_norm());
    println!("sup |W-| = {:.4}", wminus_project(&weyl, &m)?.sup_norm());

    let nodes = interior_nodes(&m.grid, 2);
    for (i, f) in random_factors(&m.grid, 3, 0.3, 7).iter().enumerate() {
        let d = conformal_deviation(&m, f, RiemannOrder::Second, &nodes)?;
        println!("factor {i}: relative W+ deviation {d:.2e}");
    }
    Ok(())
}
