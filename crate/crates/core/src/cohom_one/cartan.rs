//! Curvature of q dt² + Σ a_i² σ_i² in the coframe (√q dt, a_i σ_i), dσ_i = −σ_j∧σ_k.

use nalgebra::{Matrix3, Matrix4};
use rayon::prelude::*;

use super::profile::{CoframeProfile, Jet};
use crate::error::{Error, Result};
use crate::frame_curvature::tensor::{self, Rank3, Rank4};

const CYCLIC: [(usize, usize, usize); 3] = [(1, 2, 3), (2, 3, 1), (3, 1, 2)];

/// Structure coefficients C^a_bc with [e_b, e_c] = C^a_bc e_a, and their t-derivatives.
fn structure(j: &Jet) -> (Rank3, Rank3) {
    let f = j.q.sqrt();
    let df = j.dq / (2.0 * f);
    let mut c = tensor::zero3();
    let mut dc = tensor::zero3();
    for i in 0..3 {
        let (a, da, dda) = (j.a[i], j.da[i], j.dda[i]);
        let v = -da / (f * a);
        let dv = -(dda / (f * a) - da * df / (f * f * a) - da * da / (f * a * a));
        c[i + 1][0][i + 1] = v;
        c[i + 1][i + 1][0] = -v;
        dc[i + 1][0][i + 1] = dv;
        dc[i + 1][i + 1][0] = -dv;
    }
    for &(i, jj, k) in &CYCLIC {
        let (ai, aj, ak) = (j.a[i - 1], j.a[jj - 1], j.a[k - 1]);
        let (di, dj, dk) = (j.da[i - 1], j.da[jj - 1], j.da[k - 1]);
        let v = ai / (aj * ak);
        let dv = di / (aj * ak) - ai * dj / (aj * aj * ak) - ai * dk / (aj * ak * ak);
        c[i][jj][k] = v;
        c[i][k][jj] = -v;
        dc[i][jj][k] = dv;
        dc[i][k][jj] = -dv;
    }
    (c, dc)
}

/// Γ[a][c][b] = g(∇_{e_c} e_b, e_a).
fn connection(c: &Rank3) -> Rank3 {
    let mut g = tensor::zero3();
    for a in 0..4 {
        for cc in 0..4 {
            for b in 0..4 {
                g[a][cc][b] = 0.5 * (c[a][cc][b] - c[cc][b][a] + c[b][a][cc]);
            }
        }
    }
    g
}

/// R_abcd in the orthonormal coframe.
pub fn frame_riemann(j: &Jet) -> Rank4 {
    let (c, dc) = structure(j);
    let gam = connection(&c);
    let dgam = connection(&dc);
    let inv_f = 1.0 / j.q.sqrt();
    let mut r = tensor::zero4();
    for a in 0..4 {
        for b in 0..4 {
            for cc in 0..4 {
                for d in 0..4 {
                    let mut s = 0.0;
                    if cc == 0 {
                        s += inv_f * dgam[a][d][b];
                    }
                    if d == 0 {
                        s -= inv_f * dgam[a][cc][b];
                    }
                    for e in 0..4 {
                        s += gam[a][cc][e] * gam[e][d][b] - gam[a][d][e] * gam[e][cc][b]
                            - c[e][cc][d] * gam[a][e][b];
                    }
                    r[a][b][cc][d] = s;
                }
            }
        }
    }
    r
}

/// Frame-component curvature at one point.
#[derive(Debug, Clone)]
pub struct FramePoint {
    pub riemann: Rank4,
    pub ricci: Matrix4<f64>,
    pub scalar: f64,
    pub weyl: Rank4,
}

pub fn frame_point(j: &Jet) -> FramePoint {
    let riemann = frame_riemann(j);
    let id = Matrix4::identity();
    let ricci = tensor::ricci(&riemann);
    let scalar = ricci.trace();
    let weyl = tensor::weyl_lowered(&riemann, &id, &ricci, scalar);
    FramePoint { riemann, ricci, scalar, weyl }
}

/// Λ^s block of Weyl at a jet.
pub fn weyl_block(j: &Jet, s: f64) -> Matrix3<f64> {
    tensor::lambda_block(&frame_point(j).weyl, s)
}

/// Diagonal of the Λ^s Weyl block.
pub fn wplus_diag(j: &Jet, s: f64) -> [f64; 3] {
    let b = weyl_block(j, s);
    [b[(0, 0)], b[(1, 1)], b[(2, 2)]]
}

/// Frame curvature along a profile.
#[derive(Debug, Clone)]
pub struct FrameCurvature {
    pub t: Vec<f64>,
    pub points: Vec<FramePoint>,
}

impl FrameCurvature {
    pub fn scalar(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.scalar).collect()
    }
}

pub fn cartan_curvature(p: &CoframeProfile) -> Result<FrameCurvature> {
    if p.len() < 9 {
        return Err(Error::GridTooSmall("cartan_curvature needs ≥ 9 nodes".into()));
    }
    let jets = p.jets()?;
    Ok(FrameCurvature { t: p.t.clone(), points: jets.par_iter().map(frame_point).collect() })
}

/// Diagonal W⁺ entries in the Λ⁺ basis fixed by the profile's orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedWplus {
    pub w: [Vec<f64>; 3],
    /// Largest off-diagonal entry seen (zero for diagonal profiles).
    pub off_diagonal: f64,
}

impl ReducedWplus {
    pub fn sup_norm(&self) -> f64 {
        (0..self.w[0].len())
            .map(|k| (0..3).map(|i| self.w[i][k].powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn max_component(&self) -> f64 {
        self.w.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn max_trace(&self) -> f64 {
        (0..self.w[0].len())
            .map(|k| (self.w[0][k] + self.w[1][k] + self.w[2][k]).abs())
            .fold(0.0, f64::max)
    }

    pub fn pointwise_norm(&self) -> Vec<f64> {
        (0..self.w[0].len())
            .map(|k| (0..3).map(|i| self.w[i][k].powi(2)).sum::<f64>().sqrt())
            .collect()
    }
}

pub fn wplus_reduced(p: &CoframeProfile) -> Result<ReducedWplus> {
    let jets = p.jets()?;
    Ok(reduce_jets(&jets, p.orientation as f64))
}

pub fn reduce_jets(jets: &[Jet], s: f64) -> ReducedWplus {
    let blocks: Vec<Matrix3<f64>> = jets.par_iter().map(|j| weyl_block(j, s)).collect();
    let mut w = [vec![0.0; jets.len()], vec![0.0; jets.len()], vec![0.0; jets.len()]];
    let mut off: f64 = 0.0;
    for (k, b) in blocks.iter().enumerate() {
        for i in 0..3 {
            w[i][k] = b[(i, i)];
        }
        off = off.max(b[(0, 1)].abs()).max(b[(0, 2)].abs()).max(b[(1, 2)].abs());
    }
    ReducedWplus { w, off_diagonal: off }
}

/// Rows of the trace-free projection used for the reduced operator:
/// (1, −1, 0)/√2 and (1, 1, −2)/√6 applied to the W⁺ diagonal.
pub fn trace_free_rows() -> [[f64; 3]; 2] {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let b = 1.0 / 6f64.sqrt();
    [[a, -a, 0.0], [b, b, -2.0 * b]]
}

fn jet_to_array(j: &Jet) -> [f64; 11] {
    [j.q, j.dq, j.a[0], j.a[1], j.a[2], j.da[0], j.da[1], j.da[2], j.dda[0], j.dda[1], j.dda[2]]
}

fn array_to_jet(x: &[f64; 11]) -> Jet {
    Jet { q: x[0], dq: x[1], a: [x[2], x[3], x[4]], da: [x[5], x[6], x[7]], dda: [x[8], x[9], x[10]] }
}

/// ∂(W⁺ diagonal)/∂(q, q', a, a', a'') by Richardson-extrapolated central differences.
pub fn wplus_jet_gradient(j: &Jet, s: f64) -> [[f64; 11]; 3] {
    let x0 = jet_to_array(j);
    let mut g = [[0.0; 11]; 3];
    for k in 0..11 {
        let step = 2e-3 * (x0[k].abs() + 0.05);
        let diff = |h: f64| {
            let mut xp = x0;
            let mut xm = x0;
            xp[k] += h;
            xm[k] -= h;
            let (wp, wm) = (wplus_diag(&array_to_jet(&xp), s), wplus_diag(&array_to_jet(&xm), s));
            [(wp[0] - wm[0]) / (2.0 * h), (wp[1] - wm[1]) / (2.0 * h), (wp[2] - wm[2]) / (2.0 * h)]
        };
        let (d1, d2) = (diff(step), diff(0.5 * step));
        for r in 0..3 {
            g[r][k] = (4.0 * d2[r] - d1[r]) / 3.0;
        }
    }
    g
}

/// Linearization of the W⁺ diagonal under g ↦ g(1 + h), h = diag(−Σh_i, h1, h2, h3)
/// in the orthonormal coframe: δW = C0 h + C1 h' + C2 h''.
pub fn perturbation_coefficients(j: &Jet, s: f64) -> [Matrix3<f64>; 3] {
    let g = wplus_jet_gradient(j, s);
    let mut c = [Matrix3::zeros(); 3];
    for r in 0..3 {
        for i in 0..3 {
            // h0 = −Σh_i enters through q(1 + h0)
            let (wq, wdq) = (g[r][0], g[r][1]);
            let (wa, wda, wdda) = (g[r][2 + i], g[r][5 + i], g[r][8 + i]);
            // δa = a h/2, δa' = a' h/2 + a h'/2, δa'' = a'' h/2 + a' h' + a h''/2
            c[0][(r, i)] = -wq * j.q - wdq * j.dq + 0.5 * (wa * j.a[i] + wda * j.da[i] + wdda * j.dda[i]);
            c[1][(r, i)] = -wdq * j.q + 0.5 * wda * j.a[i] + wdda * j.da[i];
            c[2][(r, i)] = 0.5 * wdda * j.a[i];
        }
    }
    c
}
