//! Profiles written out in Euler coordinates (t, θ, φ, ψ) on S³, for the chart pipeline.

use nalgebra::Matrix4;

use super::cartan;
use super::profile::ProfileFn;
use crate::error::{Error, Result};
use crate::frame_curvature::chart::samples::{hopf_coframe, hopf_metric};
use crate::frame_curvature::{christoffel, ChartMetric4, CurvatureEvaluator, Grid4, RiemannOrder};

/// Sampling box for [`hopf_chart`]. A direction with one node is inactive.
#[derive(Debug, Clone, Copy)]
pub struct HopfBox {
    pub t: (f64, f64, usize),
    pub theta: (f64, f64, usize),
    pub psi: (f64, f64, usize),
}

impl HopfBox {
    pub fn grid(&self) -> Result<Grid4> {
        Grid4::from_box(
            [self.t.2, self.theta.2, 1, self.psi.2],
            [self.t.0, self.theta.0, 0.0, self.psi.0],
            [self.t.1, self.theta.1, 0.0, self.psi.1],
        )
    }
}

/// Chart metric of a profile. With ψ inactive the profile must have a1 = a2,
/// since otherwise the metric depends on ψ.
pub fn hopf_chart<P: ProfileFn + ?Sized>(p: &P, b: &HopfBox, orientation: i8) -> Result<ChartMetric4> {
    let grid = b.grid()?;
    if b.theta.0 <= 0.0 || b.theta.1 >= std::f64::consts::PI {
        return Err(Error::Invalid("θ must stay inside (0, π)".into()));
    }
    let jets: Vec<_> = (0..grid.n[0]).map(|i| p.jet(grid.lo[0] + i as f64 * grid.h[0])).collect();
    if !grid.active(3) {
        if let Some(j) = jets.iter().find(|j| (j.a[0] - j.a[1]).abs() > 1e-12 * j.a[0].abs()) {
            return Err(Error::Invalid(format!(
                "ψ inactive but a1 = {} ≠ a2 = {}",
                j.a[0], j.a[1]
            )));
        }
    }
    ChartMetric4::from_fn(grid.clone(), orientation, |x| {
        let i = ((x[0] - grid.lo[0]) / grid.h[0]).round() as usize;
        let j = &jets[i.min(jets.len() - 1)];
        hopf_metric(j.q, j.a, x[1], x[3])
    })
}

/// Frame vectors (columns) dual to (√q dt, a_i σ_i) at a chart point.
pub fn hopf_frame<P: ProfileFn + ?Sized>(p: &P, x: [f64; 4]) -> Option<Matrix4<f64>> {
    let j = p.jet(x[0]);
    hopf_coframe(j.q, j.a, x[1], x[3]).try_inverse()
}

/// Largest frame-component difference of the Riemann tensor between the chart
/// pipeline and the Cartan pipeline, over nodes at least two cells from the boundary.
pub fn pipeline_discrepancy<P: ProfileFn + ?Sized>(p: &P, b: &HopfBox, order: RiemannOrder) -> Result<f64> {
    let m = hopf_chart(p, b, 1)?;
    let chr = christoffel(&m)?;
    let ev = CurvatureEvaluator::new(&m, &chr, order)?;
    let g = &m.grid;
    let mut worst: f64 = 0.0;
    for node in 0..g.len() {
        let idx = g.multi(node);
        let interior = (0..4).all(|k| !g.active(k) || (idx[k] >= 2 && idx[k] + 2 < g.n[k]));
        if !interior {
            continue;
        }
        let x = g.coords(idx);
        let e = hopf_frame(p, x).ok_or_else(|| Error::SingularMetric { node, detail: "coframe".into() })?;
        let chart = ev.frame_riemann(node, &e);
        let exact = cartan::frame_riemann(&p.jet(x[0]));
        for a in 0..4 {
            for bb in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        worst = worst.max((chart[a][bb][c][d] - exact[a][bb][c][d]).abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohom_one::exact::{Berger, EguchiHanson};

    #[test]
    fn berger_pipelines_agree_and_converge() {
        let p = Berger { a3: 0.3 };
        let err = |n: usize| {
            let b = HopfBox { t: (0.0, 0.0, 1), theta: (0.8, 2.0, n), psi: (0.0, 0.0, 1) };
            pipeline_discrepancy(&p, &b, RiemannOrder::Second).unwrap()
        };
        let (e1, e2) = (err(33), err(65));
        assert!(e2 < 5e-3, "{e2}");
        assert!((e1 / e2).log2() > 1.7, "{e1} {e2}");
    }

    #[test]
    fn eguchi_hanson_pipelines_agree() {
        let p = EguchiHanson::new(1.0, 1.3).unwrap();
        let b = HopfBox { t: (0.0, 0.8, 25), theta: (0.9, 1.9, 25), psi: (0.0, 0.0, 1) };
        let e = pipeline_discrepancy(&p, &b, RiemannOrder::Fourth).unwrap();
        assert!(e < 5e-4, "{e}");
    }

    #[test]
    fn unequal_a1_a2_needs_active_psi() {
        let p = |_t: f64| crate::cohom_one::profile::Jet {
            q: 1.0,
            dq: 0.0,
            a: [0.5, 0.4, 0.3],
            da: [0.0; 3],
            dda: [0.0; 3],
        };
        let b = HopfBox { t: (0.0, 0.0, 1), theta: (0.8, 2.0, 9), psi: (0.0, 0.0, 1) };
        assert!(hopf_chart(&p, &b, 1).is_err());
    }
}
