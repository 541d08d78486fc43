//! The reduced gauge-fixed operator 𝒟 = (D, L*) on a uniform t-strip.
//!
//! Unknowns are u = (h1, h2, h3) per node with h0 = −Σh_i, so g(1+h) has
//! q ↦ q(1+h0) and a_i ↦ a_i √(1+h_i). Rows are the two trace-free projections
//! of the W⁺ diagonal at interior nodes, then L* at every node.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cohom_one::cartan::{trace_free_rows, wplus_diag};
use crate::cohom_one::profile::{CoframeProfile, Jet};
use crate::error::{Error, Result};
use crate::stencil;

/// Diagonal trace-free perturbation h = diag(h0, h1, h2, h3), h0 = −(h1 + h2 + h3).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedPerturbation {
    pub h: [Vec<f64>; 3],
}

impl ReducedPerturbation {
    pub fn zeros(n: usize) -> Self {
        Self { h: [vec![0.0; n], vec![0.0; n], vec![0.0; n]] }
    }

    pub fn len(&self) -> usize {
        self.h[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.h[0].is_empty()
    }

    pub fn h0(&self) -> Vec<f64> {
        (0..self.len()).map(|j| -(self.h[0][j] + self.h[1][j] + self.h[2][j])).collect()
    }

    /// Component c ∈ 0..4 at node j, with c = 0 the dt² entry.
    pub fn get(&self, c: usize, j: usize) -> f64 {
        if c == 0 {
            -(self.h[0][j] + self.h[1][j] + self.h[2][j])
        } else {
            self.h[c - 1][j]
        }
    }

    pub fn from_flat(x: &[f64]) -> Self {
        let n = x.len() / 3;
        Self { h: [x[..n].to_vec(), x[n..2 * n].to_vec(), x[2 * n..].to_vec()] }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.h.concat()
    }

    pub fn sup_norm(&self) -> f64 {
        (0..self.len()).flat_map(|j| (0..4).map(move |c| (c, j))).map(|(c, j)| self.get(c, j).abs()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of 1 + h over the grid.
    pub fn positivity_margin(&self) -> f64 {
        (0..self.len())
            .flat_map(|j| (0..4).map(move |c| (c, j)))
            .map(|(c, j)| 1.0 + self.get(c, j))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Background data for the discrete operator.
#[derive(Debug, Clone)]
pub struct Strip {
    pub t: Vec<f64>,
    pub jets: Vec<Jet>,
    pub weight: Vec<f64>,
    /// Orientation flag selecting the Λ^± block whose diagonal is driven to zero.
    pub flag: f64,
    /// Dirichlet h = 0 at the (left, right) end.
    pub dirichlet: (bool, bool),
}

/// Finite-difference step for the directional derivative of the residual.
const FD_STEP: f64 = 1e-6;

impl Strip {
    pub fn new(t: Vec<f64>, jets: Vec<Jet>, weight: Vec<f64>, flag: f64, dirichlet: (bool, bool)) -> Result<Self> {
        let n = t.len();
        if n < 8 {
            return Err(Error::GridTooSmall("strip needs ≥ 8 nodes".into()));
        }
        if jets.len() != n || weight.len() != n {
            return Err(Error::GridMismatch("strip jets/weights do not match the grid".into()));
        }
        let h = t[1] - t[0];
        if !(h > 0.0) || t.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
            return Err(Error::GridMismatch("strip grid must be uniform and increasing".into()));
        }
        for (node, j) in jets.iter().enumerate() {
            if !(j.q > 0.0) {
                return Err(Error::NonPositive { field: "q", node });
            }
            if j.a.iter().any(|a| !(*a > 0.0)) {
                return Err(Error::NonPositive { field: "a", node });
            }
        }
        if flag.abs() != 1.0 {
            return Err(Error::Invalid(format!("orientation flag {flag} must be ±1")));
        }
        Ok(Self { t, jets, weight, flag, dirichlet })
    }

    /// Strip from a sampled profile; the flag is the profile's orientation.
    pub fn from_profile(p: &CoframeProfile, weight: Vec<f64>, dirichlet: (bool, bool)) -> Result<Self> {
        Self::new(p.t.clone(), p.jets()?, weight, p.orientation as f64, dirichlet)
    }

    pub fn n(&self) -> usize {
        self.t.len()
    }

    pub fn h(&self) -> f64 {
        self.t[1] - self.t[0]
    }

    /// √q a1 a2 a3 Δt per node.
    pub fn vol(&self) -> Vec<f64> {
        let h = self.h();
        self.jets.iter().map(|j| j.q.sqrt() * j.a[0] * j.a[1] * j.a[2] * h).collect()
    }

    /// Jet of g(1+h) at an interior node, with h given componentwise (c = 0..4).
    fn jet_with<F: Fn(usize, usize) -> f64>(&self, j: usize, hv: F) -> Jet {
        let dt = self.h();
        let b = &self.jets[j];
        let d1 = |c: usize| (hv(c, j + 1) - hv(c, j - 1)) / (2.0 * dt);
        let d2 = |c: usize| (hv(c, j + 1) - 2.0 * hv(c, j) + hv(c, j - 1)) / (dt * dt);
        let h0 = hv(0, j);
        let mut out = Jet { q: b.q * (1.0 + h0), dq: b.dq * (1.0 + h0) + b.q * d1(0), a: [0.0; 3], da: [0.0; 3], dda: [0.0; 3] };
        for i in 0..3 {
            let (hi, hd, hdd) = (hv(i + 1, j), d1(i + 1), d2(i + 1));
            let s = (1.0 + hi).sqrt();
            out.a[i] = b.a[i] * s;
            out.da[i] = b.da[i] * s + b.a[i] * hd / (2.0 * s);
            out.dda[i] = b.dda[i] * s + b.da[i] * hd / s + b.a[i] * (hdd / (2.0 * s) - hd * hd / (4.0 * s * s * s));
        }
        out
    }

    fn projected(&self, j: &Jet) -> [f64; 2] {
        let w = wplus_diag(j, self.flag);
        let e = trace_free_rows();
        [
            e[0][0] * w[0] + e[0][1] * w[1] + e[0][2] * w[2],
            e[1][0] * w[0] + e[1][1] * w[1] + e[1][2] * w[2],
        ]
    }

    /// Raw W^flag diagonal of g(1+h) at interior nodes (zero at the two ends).
    pub fn wplus(&self, u: &ReducedPerturbation) -> [Vec<f64>; 3] {
        let n = self.n();
        let mut w = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for j in 1..n - 1 {
            let d = wplus_diag(&self.jet_with(j, |c, k| u.get(c, k)), self.flag);
            for i in 0..3 {
                w[i][j] = d[i];
            }
        }
        w
    }

    /// Trace-free W rows, component-major over interior nodes.
    pub fn d_residual(&self, u: &ReducedPerturbation) -> Vec<f64> {
        let n = self.n();
        let mut r = vec![0.0; 2 * (n - 2)];
        for j in 1..n - 1 {
            let p = self.projected(&self.jet_with(j, |c, k| u.get(c, k)));
            r[j - 1] = p[0];
            r[n - 2 + j - 1] = p[1];
        }
        r
    }

    /// Directional derivative of [`Strip::d_residual`] at u, column by column.
    /// Each column only touches the three interior rows around its node.
    pub fn d_matrix(&self, u: &ReducedPerturbation) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(2 * (n - 2), 3 * n);
        for c in 0..3 {
            for k in 0..n {
                let eps = FD_STEP * (1.0 + u.h[c][k].abs());
                for j in k.saturating_sub(1).max(1)..=(k + 1).min(n - 2) {
                    let hv = |sign: f64| {
                        move |cc: usize, kk: usize| {
                            let bump = if kk == k { sign * eps } else { 0.0 };
                            if cc == 0 {
                                u.get(0, kk) - bump
                            } else if cc == c + 1 {
                                u.get(cc, kk) + bump
                            } else {
                                u.get(cc, kk)
                            }
                        }
                    };
                    let p = self.projected(&self.jet_with(j, hv(1.0)));
                    let q = self.projected(&self.jet_with(j, hv(-1.0)));
                    m[(j - 1, c * n + k)] = (p[0] - q[0]) / (2.0 * eps);
                    m[(n - 2 + j - 1, c * n + k)] = (p[1] - q[1]) / (2.0 * eps);
                }
            }
        }
        m
    }

    /// L: f ∂_t ↦ (ℒ_ξ g)₀ in the orthonormal frame, 4N × N (component-major).
    pub fn l_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let dt = self.h();
        let mut full = [DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
        for m in 0..n {
            let j = &self.jets[m];
            full[0][(m, m)] = j.dq / j.q;
            let (s, w) = stencil::d1_forward2(m, n, dt);
            for (o, v) in w.iter().enumerate() {
                full[0][(m, s + o)] += 2.0 * v;
            }
            for i in 0..3 {
                full[i + 1][(m, m)] = 2.0 * j.da[i] / j.a[i];
            }
        }
        let tr = (&full[0] + &full[1] + &full[2] + &full[3]) / 4.0;
        let mut l = DMatrix::zeros(4 * n, n);
        for (k, f) in full.iter().enumerate() {
            l.view_mut((k * n, 0), (n, n)).copy_from(&(f - &tr));
        }
        l
    }

    /// L* as the exact adjoint of L for Σ vol·h·h′ on fields and Σ vol·q·f·f′ on vector fields.
    pub fn lstar_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let l = self.l_matrix();
        let vol = self.vol();
        let mut out = DMatrix::zeros(n, 3 * n);
        for col in 0..n {
            let sx = vol[col] * self.jets[col].q;
            for c in 0..3 {
                for m in 0..n {
                    let v = l[((c + 1) * n + m, col)] - l[(m, col)];
                    if v != 0.0 {
                        out[(col, c * n + m)] = vol[m] * v / sx;
                    }
                }
            }
        }
        out
    }

    /// Row scale w√vol (W rows) and w√(vol q) (L* rows); column scale w√vol.
    pub fn scales(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let vol = self.vol();
        let ws: Vec<f64> = (0..n).map(|j| self.weight[j] * vol[j].sqrt()).collect();
        let mut rows = Vec::with_capacity(3 * n - 4);
        for _ in 0..2 {
            rows.extend_from_slice(&ws[1..n - 1]);
        }
        rows.extend((0..n).map(|j| self.weight[j] * (vol[j] * self.jets[j].q).sqrt()));
        let cols = ws.repeat(3);
        (rows, cols)
    }

    /// Columns kept after the Dirichlet conditions.
    pub fn keep(&self) -> Vec<bool> {
        let n = self.n();
        let mut keep = vec![true; 3 * n];
        for c in 0..3 {
            if self.dirichlet.0 {
                keep[c * n] = false;
            }
            if self.dirichlet.1 {
                keep[c * n + n - 1] = false;
            }
        }
        keep
    }

    pub fn linearize(&self, u: &ReducedPerturbation) -> Result<LinearizedSystem> {
        if u.len() != self.n() {
            return Err(Error::GridMismatch("perturbation length differs from the strip".into()));
        }
        let d_mat = self.d_matrix(u);
        if d_mat.iter().any(|v| !v.is_finite()) {
            return Err(Error::Inconclusive("non-finite entry in the differentiated W rows".into()));
        }
        let l_mat = self.l_matrix();
        let lstar_mat = self.lstar_matrix();
        let (row_scale, col_scale) = self.scales();
        let d_res = self.d_residual(u);
        let g_res = &lstar_mat * DVector::from_vec(u.to_flat());
        let mut residual = d_res;
        residual.extend(g_res.iter());
        Ok(LinearizedSystem { d_mat, l_mat, lstar_mat, row_scale, col_scale, keep: self.keep(), residual })
    }

    /// (‖w·W rows‖, ‖w·L* h‖) in the weighted discrete L² norms.
    pub fn residual_norms(&self, u: &ReducedPerturbation) -> (f64, f64) {
        let (rs, _) = self.scales();
        let d = self.d_residual(u);
        let g = self.lstar_matrix() * DVector::from_vec(u.to_flat());
        let nd = d.len();
        let rw = d.iter().zip(&rs[..nd]).map(|(v, s)| (v * s).powi(2)).sum::<f64>().sqrt();
        let rg = g.iter().zip(&rs[nd..]).map(|(v, s)| (v * s).powi(2)).sum::<f64>().sqrt();
        (rw, rg)
    }
}

/// The stacked system with its scalings; rows [D; L*], columns u = (h1, h2, h3).
#[derive(Debug, Clone)]
pub struct LinearizedSystem {
    pub d_mat: DMatrix<f64>,
    pub l_mat: DMatrix<f64>,
    pub lstar_mat: DMatrix<f64>,
    pub row_scale: Vec<f64>,
    pub col_scale: Vec<f64>,
    pub keep: Vec<bool>,
    /// Unscaled residual [W rows; L* h] at the linearization point.
    pub residual: Vec<f64>,
}

impl LinearizedSystem {
    pub fn kept_columns(&self) -> Vec<usize> {
        (0..self.keep.len()).filter(|&k| self.keep[k]).collect()
    }

    fn entry(&self, r: usize, c: usize) -> f64 {
        let nd = self.d_mat.nrows();
        if r < nd {
            self.d_mat[(r, c)]
        } else {
            self.lstar_mat[(r - nd, c)]
        }
    }

    /// Rows with support on the kept columns; a gauge row at a Dirichlet node is vacuous.
    pub fn active_rows(&self) -> Vec<usize> {
        let cols = self.kept_columns();
        let m = self.d_mat.nrows() + self.lstar_mat.nrows();
        (0..m).filter(|&r| cols.iter().any(|&c| self.entry(r, c) != 0.0)).collect()
    }

    /// diag(row_scale) [D; L*] diag(1/col_scale) on active rows and kept columns.
    pub fn scaled_matrix(&self) -> DMatrix<f64> {
        let cols = self.kept_columns();
        let rows = self.active_rows();
        DMatrix::from_fn(rows.len(), cols.len(), |i, k| {
            let (r, c) = (rows[i], cols[k]);
            self.row_scale[r] * self.entry(r, c) / self.col_scale[c]
        })
    }

    pub fn scaled_residual(&self) -> DVector<f64> {
        let rows = self.active_rows();
        DVector::from_iterator(rows.len(), rows.iter().map(|&r| self.residual[r] * self.row_scale[r]))
    }

    /// Map a scaled increment on kept columns back to a perturbation.
    pub fn unscale(&self, x: &DVector<f64>) -> ReducedPerturbation {
        let mut flat = vec![0.0; self.keep.len()];
        for (k, c) in self.kept_columns().into_iter().enumerate() {
            flat[c] = x[k] / self.col_scale[c];
        }
        ReducedPerturbation::from_flat(&flat)
    }
}
