use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rectilinear box grid. A direction with a single node is inactive:
/// fields are treated as constant along it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid4 {
    pub n: [usize; 4],
    pub lo: [f64; 4],
    pub h: [f64; 4],
}

impl Grid4 {
    pub fn new(n: [usize; 4], lo: [f64; 4], h: [f64; 4]) -> Result<Self> {
        for k in 0..4 {
            if n[k] == 0 {
                return Err(Error::Invalid(format!("direction {k} has no nodes")));
            }
            if !(h[k] > 0.0) || !h[k].is_finite() {
                return Err(Error::Invalid(format!("spacing {k} must be positive")));
            }
        }
        Ok(Self { n, lo, h })
    }

    /// Box [lo, hi] with `n` nodes per direction (n = 1 makes it inactive at lo).
    pub fn from_box(n: [usize; 4], lo: [f64; 4], hi: [f64; 4]) -> Result<Self> {
        let mut h = [1.0; 4];
        for k in 0..4 {
            if n[k] > 1 {
                h[k] = (hi[k] - lo[k]) / (n[k] - 1) as f64;
            }
        }
        Self::new(n, lo, h)
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn active(&self, k: usize) -> bool {
        self.n[k] > 1
    }

    pub fn index(&self, i: [usize; 4]) -> usize {
        ((i[0] * self.n[1] + i[1]) * self.n[2] + i[2]) * self.n[3] + i[3]
    }

    pub fn multi(&self, mut idx: usize) -> [usize; 4] {
        let mut out = [0; 4];
        for k in (0..4).rev() {
            out[k] = idx % self.n[k];
            idx /= self.n[k];
        }
        out
    }

    pub fn coords(&self, i: [usize; 4]) -> [f64; 4] {
        let mut x = [0.0; 4];
        for k in 0..4 {
            x[k] = self.lo[k] + i[k] as f64 * self.h[k];
        }
        x
    }

    /// Flat index offset for a unit step in direction k.
    pub fn stride(&self, k: usize) -> usize {
        self.n[k + 1..].iter().product()
    }
}

/// Metric components sampled on a grid, with an orientation flag.
#[derive(Debug, Clone)]
pub struct ChartMetric4 {
    pub grid: Grid4,
    pub g: Vec<Matrix4<f64>>,
    pub orientation: i8,
}

impl ChartMetric4 {
    pub fn new(grid: Grid4, g: Vec<Matrix4<f64>>, orientation: i8) -> Result<Self> {
        if g.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for {} nodes",
                g.len(),
                grid.len()
            )));
        }
        if orientation != 1 && orientation != -1 {
            return Err(Error::Invalid("orientation must be ±1".into()));
        }
        let m = Self { grid, g, orientation };
        m.validate()?;
        Ok(m)
    }

    pub fn from_fn<F>(grid: Grid4, orientation: i8, f: F) -> Result<Self>
    where
        F: Fn([f64; 4]) -> Matrix4<f64>,
    {
        let g = (0..grid.len())
            .map(|i| f(grid.coords(grid.multi(i))))
            .collect();
        Self::new(grid, g, orientation)
    }

    pub fn validate(&self) -> Result<()> {
        for (node, g) in self.g.iter().enumerate() {
            let asym = (g - g.transpose()).abs().max();
            if asym > 1e-12 * (1.0 + g.abs().max()) {
                return Err(Error::Invalid(format!("metric not symmetric at node {node}")));
            }
            if !g.iter().all(|v| v.is_finite()) {
                return Err(Error::SingularMetric { node, detail: "non-finite entry".into() });
            }
            if g.cholesky().is_none() {
                return Err(Error::SingularMetric {
                    node,
                    detail: "not positive definite".into(),
                });
            }
        }
        Ok(())
    }

    pub fn with_orientation(&self, orientation: i8) -> Self {
        Self { orientation, ..self.clone() }
    }

    pub fn sample<F: Fn([f64; 4]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| f(self.grid.coords(self.grid.multi(i))))
            .collect()
    }
}

/// e^f g; orientation preserved.
pub fn conformal_rescale(m: &ChartMetric4, f: &[f64]) -> Result<ChartMetric4> {
    if f.len() != m.grid.len() {
        return Err(Error::GridMismatch("conformal factor length".into()));
    }
    if let Some(v) = f.iter().find(|v| !v.is_finite() || v.abs() > 300.0) {
        return Err(Error::Invalid(format!("conformal factor {v} out of range")));
    }
    let g = m.g.iter().zip(f).map(|(g, fv)| g * fv.exp()).collect();
    Ok(ChartMetric4 { grid: m.grid.clone(), g, orientation: m.orientation })
}

/// Standard sample metrics.
pub mod samples {
    use super::*;

    pub fn euclidean(_: [f64; 4]) -> Matrix4<f64> {
        Matrix4::identity()
    }

    /// dr² + r²dθ² + dz² + dw² in (r, θ, z, w).
    pub fn polar(x: [f64; 4]) -> Matrix4<f64> {
        Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, x[0] * x[0], 1.0, 1.0))
    }

    /// 4δ/(1+|x|²)², the unit round S⁴ in stereographic coordinates.
    pub fn round_s4(x: [f64; 4]) -> Matrix4<f64> {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let c = 4.0 / ((1.0 + r2) * (1.0 + r2));
        Matrix4::identity() * c
    }

    /// Left-invariant coframe σ_i on S³ in Euler coordinates (θ, φ, ψ):
    /// rows are σ1, σ2, σ3 as covectors in (dθ, dφ, dψ).
    pub fn sigma_rows(theta: f64, psi: f64) -> [[f64; 3]; 3] {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = psi.sin_cos();
        [[sp, -st * cp, 0.0], [cp, st * sp, 0.0], [0.0, ct, 1.0]]
    }

    /// q dt² + Σ a_i² σ_i² in chart (t, θ, φ, ψ) with coefficients at the point.
    pub fn hopf_metric(q: f64, a: [f64; 3], theta: f64, psi: f64) -> Matrix4<f64> {
        let s = sigma_rows(theta, psi);
        let mut g = Matrix4::zeros();
        g[(0, 0)] = q;
        for i in 0..3 {
            for mu in 0..3 {
                for nu in 0..3 {
                    g[(mu + 1, nu + 1)] += a[i] * a[i] * s[i][mu] * s[i][nu];
                }
            }
        }
        g
    }

    /// Coframe matrix (rows e^a in coordinates) of √q dt, a_i σ_i.
    pub fn hopf_coframe(q: f64, a: [f64; 3], theta: f64, psi: f64) -> Matrix4<f64> {
        let s = sigma_rows(theta, psi);
        let mut e = Matrix4::zeros();
        e[(0, 0)] = q.sqrt();
        for i in 0..3 {
            for mu in 0..3 {
                e[(i + 1, mu + 1)] = a[i] * s[i][mu];
            }
        }
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        let g = Grid4::new([3, 4, 1, 5], [0.0; 4], [0.1; 4]).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.index(g.multi(i)), i);
        }
        assert_eq!(g.stride(3), 1);
        assert_eq!(g.stride(0), 20);
    }

    #[test]
    fn rejects_indefinite_metric() {
        let grid = Grid4::new([1, 1, 1, 1], [0.0; 4], [1.0; 4]).unwrap();
        let mut g = Matrix4::identity();
        g[(2, 2)] = -1.0;
        assert!(matches!(
            ChartMetric4::new(grid, vec![g], 1),
            Err(Error::SingularMetric { .. })
        ));
    }

    #[test]
    fn hopf_metric_matches_coframe() {
        let e = samples::hopf_coframe(1.3, [0.5, 0.4, 0.3], 0.7, 1.1);
        let g = samples::hopf_metric(1.3, [0.5, 0.4, 0.3], 0.7, 1.1);
        assert!((e.transpose() * e - g).norm() < 1e-14);
    }

    #[test]
    fn conformal_rejects_extreme_factor() {
        let grid = Grid4::new([1, 1, 1, 1], [0.0; 4], [1.0; 4]).unwrap();
        let m = ChartMetric4::new(grid, vec![Matrix4::identity()], 1).unwrap();
        assert!(conformal_rescale(&m, &[301.0]).is_err());
        let same = conformal_rescale(&m, &[0.0]).unwrap();
        assert_eq!(same.g[0], m.g[0]);
    }
}
