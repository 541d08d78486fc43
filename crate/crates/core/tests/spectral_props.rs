use asd_glue::cyl_spectral::{
    adjoint_kernel_dim, indicial_spectrum, jump_count, model_index, Domain, ModeBlock, ModelOperator, WeightProfile,
    WeightSpec,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn block2(c0: [f64; 4], c1: [f64; 4]) -> ModelOperator {
    let coeffs = vec![
        DMatrix::from_row_slice(2, 2, &c0),
        DMatrix::from_row_slice(2, 2, &c1),
        DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]),
    ];
    ModelOperator::new("random", vec![ModeBlock { mu: 0.0, multiplicity: 1, coeffs }], f64::INFINITY).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn real_operators_have_reflected_spectra(
        c0 in prop::array::uniform4(-3.0f64..3.0),
        c1 in prop::array::uniform4(-2.0f64..2.0),
    ) {
        let op = block2(c0, c1);
        let s = indicial_spectrum(&op, (-50.0, 50.0)).unwrap();
        for e in &s.entries {
            let partner = s
                .entries
                .iter()
                .find(|f| (f.re + e.re).abs() < 1e-5 && (f.im - e.im).abs() < 1e-5);
            prop_assert!(partner.is_some_and(|f| f.d == e.d), "{e:?} in {:?}", s.entries);
        }
        let total: usize = s.entries.iter().map(|e| e.d).sum();
        prop_assert_eq!(total, 4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn index_differences_match_jumps(c in 0.3f64..3.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let op = ModelOperator::point(c);
        let r = c.sqrt();
        // weights spread over (−r − 1, r + 1), kept 0.25 away from ±√c
        let pick = |x: f64| {
            let d = -r - 1.0 + x * (2.0 * r + 2.0);
            if (d.abs() - r).abs() < 0.25 { d + 0.5 } else { d }
        };
        let (mut d1, mut d2) = (pick(u), pick(v));
        if d1 > d2 { std::mem::swap(&mut d1, &mut d2); }
        prop_assume!(d2 - d1 > 0.1 && (d1.abs() - r).abs() >= 0.25 && (d2.abs() - r).abs() >= 0.25);
        let s = indicial_spectrum(&op, (-r - 3.0, r + 3.0)).unwrap();
        let n = jump_count(&s, d1, d2).unwrap() as i64;
        let half = Domain::HalfLine { length: 80.0, dirichlet: true };
        let a = model_index(&op, &WeightSpec::l2(d1, WeightProfile::Uniform), half, 0.2).unwrap();
        let b = model_index(&op, &WeightSpec::l2(d2, WeightProfile::Uniform), half, 0.2).unwrap();
        prop_assert_eq!(a.index - b.index, n);
    }

    #[test]
    fn fredholm_alternative_on_full_line(c in 0.3f64..3.0, x in 0.0f64..1.0) {
        let op = ModelOperator::point(c);
        let r = c.sqrt();
        let d = 0.25 + x * (2.0 * r);
        prop_assume!((d - r).abs() >= 0.25);
        let w = WeightSpec::l2(d, WeightProfile::SymmetricDecaying);
        let full = Domain::FullLine { half_length: 60.0 };
        let rep = model_index(&op, &w, full, 0.2).unwrap();
        prop_assert_eq!(adjoint_kernel_dim(&op, &w, full, 0.2).unwrap(), rep.dim_coker);
    }
}
