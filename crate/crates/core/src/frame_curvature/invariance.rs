//! Seeded smooth conformal factors and the W⁺ conformal-invariance check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::chart::{conformal_rescale, ChartMetric4, Grid4};
use super::curvature::{christoffel, e2_weight, self_dual_parts_at, RiemannOrder};
use crate::error::{Error, Result};

/// Sum of a few low-frequency Fourier modes over the active directions of a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothFactor {
    /// (amplitude, wavevector, phase) per mode.
    pub modes: Vec<(f64, [f64; 4], f64)>,
}

impl SmoothFactor {
    pub fn random(grid: &Grid4, amplitude: f64, n_modes: usize, rng: &mut ChaCha8Rng) -> Self {
        let modes = (0..n_modes)
            .map(|_| {
                let mut k = [0.0; 4];
                for (d, kd) in k.iter_mut().enumerate() {
                    if grid.active(d) {
                        let span = grid.h[d] * (grid.n[d] - 1) as f64;
                        *kd = std::f64::consts::TAU * rng.random_range(0..=2) as f64 / span.max(1e-12) * 0.5;
                    }
                }
                let c = amplitude * rng.random_range(-1.0..1.0) / n_modes as f64;
                (c, k, rng.random_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        Self { modes }
    }

    pub fn eval(&self, x: [f64; 4]) -> f64 {
        self.modes
            .iter()
            .map(|(c, k, ph)| c * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + k[3] * x[3] + ph).cos())
            .sum()
    }
}

/// `count` reproducible factors with sup |f| ≤ amplitude.
pub fn random_factors(grid: &Grid4, count: usize, amplitude: f64, seed: u64) -> Vec<SmoothFactor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| SmoothFactor::random(grid, amplitude, 4, &mut rng)).collect()
}

/// Nodes at least `margin` cells inside every active direction.
pub fn interior_nodes(grid: &Grid4, margin: usize) -> Vec<usize> {
    (0..grid.len())
        .filter(|&node| {
            let i = grid.multi(node);
            (0..4).all(|d| !grid.active(d) || (i[d] >= margin && i[d] + margin < grid.n[d]))
        })
        .collect()
}

/// E²-normalized W⁺ blocks at the given nodes.
pub fn wplus_e2_at(m: &ChartMetric4, order: RiemannOrder, nodes: &[usize]) -> Result<Vec<nalgebra::Matrix3<f64>>> {
    let chr = christoffel(m)?;
    let parts = self_dual_parts_at(m, &chr, order, nodes)?;
    Ok(nodes.iter().zip(parts).map(|(&n, (wp, _))| wp * e2_weight(&m.g[n])).collect())
}

/// sup ‖Ŵ⁺ − W⁺‖ / sup ‖W⁺‖ between g and e^f g, E²-normalized.
pub fn conformal_deviation(m: &ChartMetric4, f: &SmoothFactor, order: RiemannOrder, nodes: &[usize]) -> Result<f64> {
    let base = wplus_e2_at(m, order, nodes)?;
    let scale = base.iter().map(|b| b.norm()).fold(0.0, f64::max);
    if scale < 1e-12 {
        return Err(Error::Unmeasurable("W⁺ vanishes; relative deviation undefined".into()));
    }
    let rescaled = conformal_rescale(m, &m.sample(|x| f.eval(x)))?;
    let other = wplus_e2_at(&rescaled, order, nodes)?;
    Ok(base.iter().zip(&other).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame_curvature::chart::samples;

    #[test]
    fn factors_are_reproducible_and_bounded() {
        let g = Grid4::from_box([9, 9, 1, 1], [0.0; 4], [1.0, 2.0, 0.0, 0.0]).unwrap();
        let a = random_factors(&g, 3, 0.4, 7);
        assert_eq!(a, random_factors(&g, 3, 0.4, 7));
        assert_ne!(a, random_factors(&g, 3, 0.4, 8));
        for f in &a {
            for node in 0..g.len() {
                assert!(f.eval(g.coords(g.multi(node))).abs() <= 0.4);
            }
        }
    }

    #[test]
    fn flat_metric_is_unmeasurable() {
        let g = Grid4::from_box([9, 9, 1, 1], [0.0; 4], [1.0, 1.0, 0.0, 0.0]).unwrap();
        let m = ChartMetric4::from_fn(g.clone(), 1, samples::euclidean).unwrap();
        let f = &random_factors(&g, 1, 0.3, 1)[0];
        let r = conformal_deviation(&m, f, RiemannOrder::Second, &interior_nodes(&g, 2));
        assert!(matches!(r, Err(Error::Unmeasurable(_))), "{r:?}");
    }

    #[test]
    fn fubini_study_deviation_shrinks_with_grid() {
        use crate::cohom_one::{hopf_chart, FubiniStudy, HopfBox, Jet, RadialProfile};
        let fs = |r: f64| {
            let (a, da, dda) = FubiniStudy { quotient_k: 1 }.b(r);
            Jet { q: 1.0, dq: 0.0, a, da, dda }
        };
        let dev = |n: usize| {
            let b = HopfBox { t: (0.6, 1.2, n), theta: (0.9, 1.9, n), psi: (0.0, 0.0, 1) };
            let m = hopf_chart(&fs, &b, -1).unwrap();
            let f = &random_factors(&m.grid, 1, 0.3, 3)[0];
            conformal_deviation(&m, f, RiemannOrder::Fourth, &interior_nodes(&m.grid, 2)).unwrap()
        };
        let (a, b) = (dev(13), dev(25));
        assert!(b < a && b < 1e-3, "{a} {b}");
    }
}
