use nalgebra::{Matrix3, Matrix4};
use rayon::prelude::*;

use super::chart::{ChartMetric4, Grid4};
use super::tensor::{self, Rank3, Rank4};
use crate::error::{Error, Result};
use crate::stencil;

/// Stencil order used when differentiating the Christoffel field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RiemannOrder {
    #[default]
    Second,
    Fourth,
}

/// Γ^k_ij stored as `gamma[node][k][i][j]`.
#[derive(Debug, Clone)]
pub struct Christoffel {
    pub grid: Grid4,
    pub gamma: Vec<Rank3>,
}

fn check_support(grid: &Grid4, need: usize) -> Result<()> {
    for k in 0..4 {
        if grid.active(k) && grid.n[k] < need {
            return Err(Error::GridTooSmall(format!(
                "direction {k} has {} nodes, stencil needs {need}",
                grid.n[k]
            )));
        }
    }
    Ok(())
}

/// Derivative along direction `k` of a node-indexed quantity at `node`.
fn diff_along<T, F>(grid: &Grid4, node: usize, k: usize, order4: bool, f: F) -> T
where
    T: Default + std::ops::AddAssign + std::ops::Mul<f64, Output = T>,
    F: Fn(usize) -> T,
{
    let mut out = T::default();
    if !grid.active(k) {
        return out;
    }
    let i = grid.multi(node)[k];
    let base = node - i * grid.stride(k);
    let st = grid.stride(k);
    if order4 {
        let (s, w) = stencil::d1_order4(i, grid.n[k], grid.h[k]);
        for (m, wv) in w.iter().enumerate() {
            if *wv != 0.0 {
                out += f(base + (s + m) * st) * *wv;
            }
        }
    } else {
        let (s, w) = stencil::d1_order2(i, grid.n[k], grid.h[k]);
        for (m, wv) in w.iter().enumerate() {
            if *wv != 0.0 {
                out += f(base + (s + m) * st) * *wv;
            }
        }
    }
    out
}

#[derive(Default, Clone, Copy)]
struct M4(Matrix4<f64>);
impl std::ops::AddAssign for M4 {
    fn add_assign(&mut self, o: Self) {
        self.0 += o.0;
    }
}
impl std::ops::Mul<f64> for M4 {
    type Output = M4;
    fn mul(self, s: f64) -> M4 {
        M4(self.0 * s)
    }
}

#[derive(Clone, Copy)]
struct R3(Rank3);
impl Default for R3 {
    fn default() -> Self {
        R3(tensor::zero3())
    }
}
impl std::ops::AddAssign for R3 {
    fn add_assign(&mut self, o: Self) {
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    self.0[a][b][c] += o.0[a][b][c];
                }
            }
        }
    }
}
impl std::ops::Mul<f64> for R3 {
    type Output = R3;
    fn mul(mut self, s: f64) -> R3 {
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    self.0[a][b][c] *= s;
                }
            }
        }
        self
    }
}

fn inverse(m: &ChartMetric4, node: usize) -> Result<Matrix4<f64>> {
    m.g[node].try_inverse().ok_or_else(|| Error::SingularMetric {
        node,
        detail: "metric not invertible".into(),
    })
}

/// Levi-Civita connection with 4th-order stencils (one-sided at the boundary).
pub fn christoffel(m: &ChartMetric4) -> Result<Christoffel> {
    check_support(&m.grid, 5)?;
    let grid = &m.grid;
    let gamma: Result<Vec<Rank3>> = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let ginv = inverse(m, node)?;
            let dg: [Matrix4<f64>; 4] =
                std::array::from_fn(|k| diff_along(grid, node, k, true, |j| M4(m.g[j])).0);
            let mut out = tensor::zero3();
            for k in 0..4 {
                for i in 0..4 {
                    for j in i..4 {
                        let mut s = 0.0;
                        for l in 0..4 {
                            s += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                        }
                        out[k][i][j] = 0.5 * s;
                        out[k][j][i] = 0.5 * s;
                    }
                }
            }
            Ok(out)
        })
        .collect();
    Ok(Christoffel { grid: grid.clone(), gamma: gamma? })
}

/// Curvature at a single node.
#[derive(Debug, Clone)]
pub struct PointCurvature {
    /// R^a_bcd
    pub riemann: Rank4,
    pub ricci: Matrix4<f64>,
    pub scalar: f64,
    /// W^a_bcd
    pub weyl: Rank4,
}

/// Lazy per-node curvature: only the Christoffel field is stored.
pub struct CurvatureEvaluator<'a> {
    pub metric: &'a ChartMetric4,
    pub christoffel: &'a Christoffel,
    pub order: RiemannOrder,
}

impl<'a> CurvatureEvaluator<'a> {
    pub fn new(metric: &'a ChartMetric4, christoffel: &'a Christoffel, order: RiemannOrder) -> Result<Self> {
        if metric.grid != christoffel.grid {
            return Err(Error::GridMismatch("metric and connection grids differ".into()));
        }
        let need = if order == RiemannOrder::Fourth { 5 } else { 3 };
        check_support(&metric.grid, need)?;
        Ok(Self { metric, christoffel, order })
    }

    pub fn riemann(&self, node: usize) -> Rank4 {
        let grid = &self.metric.grid;
        let gam = &self.christoffel.gamma;
        let o4 = self.order == RiemannOrder::Fourth;
        let dgam: [Rank3; 4] =
            std::array::from_fn(|c| diff_along(grid, node, c, o4, |j| R3(gam[j])).0);
        let g0 = &gam[node];
        let mut r = tensor::zero4();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let mut s = dgam[c][a][d][b] - dgam[d][a][c][b];
                        for e in 0..4 {
                            s += g0[a][c][e] * g0[e][d][b] - g0[a][d][e] * g0[e][c][b];
                        }
                        r[a][b][c][d] = s;
                    }
                }
            }
        }
        r
    }

    pub fn point(&self, node: usize) -> Result<PointCurvature> {
        let g = &self.metric.g[node];
        let ginv = inverse(self.metric, node)?;
        let riemann = self.riemann(node);
        let ricci = tensor::ricci(&riemann);
        let scalar = tensor::scalar(&ricci, &ginv);
        let rl = tensor::lower_first(&riemann, g);
        let wl = tensor::weyl_lowered(&rl, g, &ricci, scalar);
        let weyl = tensor::raise_first(&wl, &ginv);
        Ok(PointCurvature { riemann, ricci, scalar, weyl })
    }

    /// Curvature at `node` in the orthonormal frame whose vectors are the columns of `e`.
    pub fn frame_riemann(&self, node: usize, e: &Matrix4<f64>) -> Rank4 {
        let rl = tensor::lower_first(&self.riemann(node), &self.metric.g[node]);
        tensor::to_frame(&rl, e)
    }
}

/// Whole-grid curvature.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub christoffel: Christoffel,
    pub riemann: Vec<Rank4>,
    pub ricci: Vec<Matrix4<f64>>,
    pub scalar: Vec<f64>,
    /// Max first-Bianchi residual of the lowered tensor.
    pub bianchi_residual: f64,
    /// Max antisymmetry residual in the last pair.
    pub antisymmetry_residual: f64,
}

pub fn riemann_from_christoffel(m: &ChartMetric4, c: Christoffel) -> Result<CurvatureBundle> {
    riemann_with_order(m, c, RiemannOrder::Second)
}

pub fn riemann_with_order(m: &ChartMetric4, c: Christoffel, order: RiemannOrder) -> Result<CurvatureBundle> {
    let ev = CurvatureEvaluator::new(m, &c, order)?;
    type Pt = (Rank4, Matrix4<f64>, f64, f64, f64);
    let pts: Result<Vec<Pt>> = (0..m.grid.len())
        .into_par_iter()
        .map(|node| {
            let p = ev.point(node)?;
            let rl = tensor::lower_first(&p.riemann, &m.g[node]);
            let (anti, bianchi) = tensor::symmetry_residuals(&rl);
            Ok((p.riemann, p.ricci, p.scalar, anti, bianchi))
        })
        .collect();
    let pts = pts?;
    let mut out = CurvatureBundle {
        christoffel: Christoffel { grid: c.grid.clone(), gamma: Vec::new() },
        riemann: Vec::with_capacity(pts.len()),
        ricci: Vec::with_capacity(pts.len()),
        scalar: Vec::with_capacity(pts.len()),
        bianchi_residual: 0.0,
        antisymmetry_residual: 0.0,
    };
    for (r, ric, s, a, b) in pts {
        out.riemann.push(r);
        out.ricci.push(ric);
        out.scalar.push(s);
        out.antisymmetry_residual = out.antisymmetry_residual.max(a);
        out.bianchi_residual = out.bianchi_residual.max(b);
    }
    out.christoffel = c;
    Ok(out)
}

/// W^a_bcd at every node.
pub fn weyl_decompose(cb: &CurvatureBundle, m: &ChartMetric4) -> Result<Vec<Rank4>> {
    if cb.riemann.len() != m.grid.len() {
        return Err(Error::GridMismatch("bundle and metric differ".into()));
    }
    (0..m.grid.len())
        .map(|node| {
            let g = &m.g[node];
            let ginv = inverse(m, node)?;
            let rl = tensor::lower_first(&cb.riemann[node], g);
            let wl = tensor::weyl_lowered(&rl, g, &cb.ricci[node], cb.scalar[node]);
            Ok(tensor::raise_first(&wl, &ginv))
        })
        .collect()
}

/// Gram–Schmidt on the coordinate frame; columns are e_0..e_3.
/// For orientation −1 the last vector is reversed.
pub fn orthonormal_frame(g: &Matrix4<f64>, orientation: i8) -> Option<Matrix4<f64>> {
    let mut e = Matrix4::<f64>::zeros();
    for a in 0..4 {
        let mut v = nalgebra::Vector4::zeros();
        v[a] = 1.0;
        for b in 0..a {
            let eb = e.column(b).into_owned();
            let ip = (v.transpose() * g * eb)[0];
            v -= eb * ip;
        }
        let n2 = (v.transpose() * g * v)[0];
        if !(n2 > 1e-300) {
            return None;
        }
        e.set_column(a, &(v / n2.sqrt()));
    }
    if orientation < 0 {
        let c = -e.column(3);
        e.set_column(3, &c);
    }
    Some(e)
}

/// Λ⁺ block of Weyl as a symmetric trace-free 3×3 field.
#[derive(Debug, Clone)]
pub struct WplusField {
    pub grid: Grid4,
    pub blocks: Vec<Matrix3<f64>>,
}

impl WplusField {
    pub fn sup_norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm()).fold(0.0, f64::max)
    }

    /// Five independent components (W11, W22, W12, W13, W23).
    pub fn components(&self, node: usize) -> [f64; 5] {
        let b = &self.blocks[node];
        [b[(0, 0)], b[(1, 1)], b[(0, 1)], b[(0, 2)], b[(1, 2)]]
    }

    pub fn max_trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace().abs()).fold(0.0, f64::max)
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| (b - b.transpose()).abs().max())
            .fold(0.0, f64::max)
    }
}

fn frame_weyl(weyl13: &Rank4, m: &ChartMetric4, node: usize) -> Result<Rank4> {
    let g = &m.g[node];
    let e = orthonormal_frame(g, m.orientation).ok_or_else(|| Error::SingularMetric {
        node,
        detail: "frame degeneracy".into(),
    })?;
    Ok(tensor::to_frame(&tensor::lower_first(weyl13, g), &e))
}

/// Λ^s block of a (1,3) Weyl field at one node, s = +1 for W⁺.
pub fn weyl_block_at(weyl13: &Rank4, m: &ChartMetric4, node: usize, s: f64) -> Result<Matrix3<f64>> {
    Ok(tensor::lambda_block(&frame_weyl(weyl13, m, node)?, s))
}

pub fn wplus_project(weyl: &[Rank4], m: &ChartMetric4) -> Result<WplusField> {
    project_block(weyl, m, 1.0)
}

pub fn wminus_project(weyl: &[Rank4], m: &ChartMetric4) -> Result<WplusField> {
    project_block(weyl, m, -1.0)
}

fn project_block(weyl: &[Rank4], m: &ChartMetric4, s: f64) -> Result<WplusField> {
    if weyl.len() != m.grid.len() {
        return Err(Error::GridMismatch("weyl field length".into()));
    }
    let blocks: Result<Vec<_>> = (0..weyl.len())
        .into_par_iter()
        .map(|node| weyl_block_at(&weyl[node], m, node, s))
        .collect();
    Ok(WplusField { grid: m.grid.clone(), blocks: blocks? })
}

/// Conformal weight making frame Weyl blocks comparable across a conformal class.
pub fn e2_weight(g: &Matrix4<f64>) -> f64 {
    g.determinant().powf(0.25)
}

/// W⁺ blocks rescaled to E²-sections (invariant under g → e^f g).
pub fn e2_normalized(w: &WplusField, m: &ChartMetric4) -> Vec<Matrix3<f64>> {
    w.blocks.iter().zip(&m.g).map(|(b, g)| b * e2_weight(g)).collect()
}

/// End-to-end: metric → W⁺ (and W⁻) at selected nodes without storing full curvature.
pub fn self_dual_parts_at(
    m: &ChartMetric4,
    chr: &Christoffel,
    order: RiemannOrder,
    nodes: &[usize],
) -> Result<Vec<(Matrix3<f64>, Matrix3<f64>)>> {
    let ev = CurvatureEvaluator::new(m, chr, order)?;
    nodes
        .par_iter()
        .map(|&node| {
            let p = ev.point(node)?;
            let fw = frame_weyl(&p.weyl, m, node)?;
            Ok((tensor::lambda_block(&fw, 1.0), tensor::lambda_block(&fw, -1.0)))
        })
        .collect()
}

/// Pointwise g-norm of a (1,3) tensor.
pub fn norm_13(t: &Rank4, g: &Matrix4<f64>) -> f64 {
    match orthonormal_frame(g, 1) {
        Some(e) => tensor::frame_norm(&tensor::to_frame(&tensor::lower_first(t, g), &e)),
        None => f64::NAN,
    }
}

/// Trace-free g-symmetric endomorphism field h^a_b.
#[derive(Debug, Clone)]
pub struct PerturbationField {
    pub h: Vec<Matrix4<f64>>,
}

impl PerturbationField {
    pub fn validate(&self, m: &ChartMetric4, tol: f64) -> Result<()> {
        for (node, (h, g)) in self.h.iter().zip(&m.g).enumerate() {
            if h.trace().abs() > tol {
                return Err(Error::Invalid(format!("trace {} at node {node}", h.trace())));
            }
            let gh = g * h;
            if (gh - gh.transpose()).abs().max() > tol {
                return Err(Error::Invalid(format!("not g-symmetric at node {node}")));
            }
        }
        Ok(())
    }

    /// |h|² = h^a_b h^b_a for g-symmetric h.
    pub fn pointwise_norm(&self) -> Vec<f64> {
        self.h.iter().map(|h| (h * h).trace().max(0.0).sqrt()).collect()
    }
}

/// Pointwise norms of a W⁺ field (Frobenius in the orthonormal Λ⁺ basis).
pub fn pointwise_norm(w: &WplusField) -> Vec<f64> {
    w.blocks.iter().map(|b| b.norm()).collect()
}
