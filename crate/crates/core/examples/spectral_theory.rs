//! Indicial roots, weighted indices and the norm-equivalence probe.

use asd_glue::cohom_one::RoundS4;
use asd_glue::cyl_spectral::{
    exceptional_weights, indicial_spectrum, jump_count, model_index, norm_equivalence_probe, shrinking_family,
    Domain, ModelOperator, WeightProfile, WeightSpec,
};

fn main() -> asd_glue::Result<()> {
    let op = ModelOperator::s3_scalar_exact(3);
    let s = indicial_spectrum(&op, (-3.0, 3.0))?;
    for e in &s.entries {
        println!("λ = {:+.4} {:+.4}i  d = {}  chains {:?}", e.re, e.im, e.d, e.chains);
    }
    println!("exceptional weights {:?}", exceptional_weights(&s));
    println!("n(−0.5, 0.5) = {}", jump_count(&s, -0.5, 0.5)?);

    let full = Domain::FullLine { half_length: 14.0 };
    for profile in [WeightProfile::Uniform, WeightProfile::SymmetricDecaying, WeightProfile::SymmetricGrowing] {
        let r = model_index(&ModelOperator::s3_scalar_exact(2), &WeightSpec::l2(1.0, profile), full, 0.1)?;
        println!("{profile:?}: ker {} coker {} index {}", r.dim_ker, r.dim_coker, r.index);
    }

    for delta in [2.0 / 3.0, 1.5] {
        let r = norm_equivalence_probe(RoundS4, &shrinking_family(6), 3.0, Some(delta))?;
        println!("p = 3, δ = {delta:.3}: ratio max/min {:.4}", r.spread());
    }
    Ok(())
}
