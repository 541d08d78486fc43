//! Conformal invariance of the reduced linearizations L and D.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linearize::{ReducedPerturbation, Strip};
use crate::cohom_one::profile::Jet;
use crate::error::{Error, Result};

/// Jet of e^{2φ} g from (φ, φ′, φ″).
pub fn conformal_jet(j: &Jet, phi: (f64, f64, f64)) -> Jet {
    let (p, dp, ddp) = phi;
    let (e2, e1) = ((2.0 * p).exp(), p.exp());
    let mut out = Jet { q: e2 * j.q, dq: e2 * (j.dq + 2.0 * dp * j.q), a: [0.0; 3], da: [0.0; 3], dda: [0.0; 3] };
    for i in 0..3 {
        out.a[i] = e1 * j.a[i];
        out.da[i] = e1 * (j.da[i] + dp * j.a[i]);
        out.dda[i] = e1 * (j.dda[i] + 2.0 * dp * j.da[i] + (ddp + dp * dp) * j.a[i]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizedInvariance {
    /// sup |L̂ξ − Lξ| / sup |Lξ| over the test vector fields.
    pub l_deviation: f64,
    /// sup |e^{2φ}D̂h − Dh| / sup |Dh| over the test perturbations.
    pub d_deviation: f64,
}

/// Compares L and D of g and e^{2φ}g on `count` seeded test sections.
/// `phi` gives (φ, φ′, φ″) at each t.
pub fn linearized_invariance<F>(strip: &Strip, phi: F, count: usize, amplitude: f64, seed: u64) -> Result<LinearizedInvariance>
where
    F: Fn(f64) -> (f64, f64, f64),
{
    if count == 0 {
        return Err(Error::Invalid("need at least one test section".into()));
    }
    let n = strip.n();
    let phis: Vec<_> = strip.t.iter().map(|&t| phi(t)).collect();
    let jets = strip.jets.iter().zip(&phis).map(|(j, &p)| conformal_jet(j, p)).collect();
    let other = Strip::new(strip.t.clone(), jets, strip.weight.clone(), strip.flag, strip.dirichlet)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l0, l1) = (strip.l_matrix(), other.l_matrix());
    let (mut dl, mut sl, mut dd, mut sd) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..count {
        let xi = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let (a, b) = (&l0 * &xi, &l1 * &xi);
        dl = dl.max((a - &b).amax());
        sl = sl.max(b.amax());
        let mut u = ReducedPerturbation::zeros(n);
        for c in 0..3 {
            for k in 0..n {
                u.h[c][k] = amplitude * rng.random_range(-1.0..1.0);
            }
        }
        let x = DVector::from_vec(u.to_flat());
        let base = ReducedPerturbation::zeros(n);
        let (a, b) = (strip.d_matrix(&base) * &x, other.d_matrix(&base) * &x);
        for (r, (va, vb)) in a.iter().zip(b.iter()).enumerate() {
            let j = 1 + r % (n - 2);
            dd = dd.max((va - vb * (2.0 * phis[j].0).exp()).abs());
            sd = sd.max(va.abs());
        }
    }
    if sl == 0.0 || sd == 0.0 {
        return Err(Error::Unmeasurable("test sections lie in the kernel".into()));
    }
    Ok(LinearizedInvariance { l_deviation: dl / sl, d_deviation: dd / sd })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohom_one::{FubiniStudy, RadialProfile};

    fn fs_strip() -> Strip {
        let t: Vec<f64> = (0..41).map(|i| 0.4 + 0.02 * i as f64).collect();
        let jets = t
            .iter()
            .map(|&r| {
                let (a, da, dda) = FubiniStudy { quotient_k: 1 }.b(r);
                Jet { q: 1.0, dq: 0.0, a, da, dda }
            })
            .collect();
        Strip::new(t, jets, vec![1.0; 41], -1.0, (false, false)).unwrap()
    }

    #[test]
    fn conformal_jet_matches_finite_differences() {
        let p = FubiniStudy { quotient_k: 1 };
        let phi = |t: f64| (0.3 * t.sin(), 0.3 * t.cos(), -0.3 * t.sin());
        let jet = |t: f64| {
            let (a, da, dda) = p.b(t);
            conformal_jet(&Jet { q: 1.0, dq: 0.0, a, da, dda }, phi(t))
        };
        let (t, e) = (0.7, 1e-4);
        let (m, c, pl) = (jet(t - e), jet(t), jet(t + e));
        assert!(((pl.q - m.q) / (2.0 * e) - c.dq).abs() < 1e-7);
        for i in 0..3 {
            assert!(((pl.a[i] - m.a[i]) / (2.0 * e) - c.da[i]).abs() < 1e-7);
            assert!(((pl.da[i] - m.da[i]) / (2.0 * e) - c.dda[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn fubini_study_linearizations_are_invariant() {
        let phi = |t: f64| (0.2 * (2.0 * t).cos(), -0.4 * (2.0 * t).sin(), -0.8 * (2.0 * t).cos());
        let r = linearized_invariance(&fs_strip(), phi, 5, 0.05, 11).unwrap();
        assert!(r.l_deviation < 1e-12, "{r:?}");
        assert!(r.d_deviation < 1e-6, "{r:?}");
    }
}
