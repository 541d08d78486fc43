//! Kernel bases H₀, H₁, H₂ and the transversal subspace U⊥(l).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{alpha, weight_profile, GlueSpec, GluedConfig};
use crate::cyl_spectral::index::{MIN_GAP, RANK_TOL};
use crate::cyl_spectral::ModelOperator;
use crate::error::{Error, Result};
use crate::ift_solver::{LinearizedSystem, ReducedPerturbation, Strip};

/// Discrete kernel of a stand-alone body operator, as fields on the body grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BodyKernel {
    pub t: Vec<f64>,
    pub fields: Vec<ReducedPerturbation>,
    pub vol: Vec<f64>,
}

impl BodyKernel {
    pub fn dim(&self) -> usize {
        self.fields.len()
    }

    /// Linear interpolation of field k at t (zero beyond the grid on the right).
    pub fn eval(&self, k: usize, c: usize, t: f64) -> f64 {
        let (t0, h, n) = (self.t[0], self.t[1] - self.t[0], self.t.len());
        let x = (t - t0) / h;
        if x < 0.0 || x > (n - 1) as f64 {
            return 0.0;
        }
        let i = (x.floor() as usize).min(n - 2);
        let f = x - i as f64;
        let v = &self.fields[k];
        (1.0 - f) * v.get(c, i) + f * v.get(c, i + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBases {
    /// τ-independent null vectors (h1, h2, h3) of the λ = 0 block of the reduced model.
    pub h0: Vec<[f64; 3]>,
    pub h1: BodyKernel,
    pub h2: BodyKernel,
}

impl KernelBases {
    pub fn total(&self) -> usize {
        self.h0.len() + self.h1.dim() + self.h2.dim()
    }
}

/// Stand-alone body operators extend to t = BODY_END.
pub const BODY_END: f64 = 6.0;

/// Right singular vectors of `a` with σ < RANK_TOL·σ_max, counting the structural
/// kernel of a wide matrix.
pub fn null_basis(a: &DMatrix<f64>) -> Result<(Vec<DVector<f64>>, f64)> {
    let (m, n) = a.shape();
    let sq = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = sq.svd(false, true);
    let vt = svd.v_t.as_ref().expect("requested V");
    let smax = svd.singular_values.max();
    let tau = RANK_TOL * smax;
    let mut small = Vec::new();
    let mut above = f64::INFINITY;
    let mut below: f64 = 0.0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s < tau {
            small.push(vt.row(k).transpose());
            below = below.max(s);
        } else {
            above = above.min(s);
        }
    }
    let gap = if below == 0.0 { f64::INFINITY } else { above / below };
    if gap < MIN_GAP {
        return Err(Error::Inconclusive(format!("kernel gap {gap:.2e} below {MIN_GAP:e}")));
    }
    Ok((small, gap))
}

/// Kernel elements are kept when at most this fraction of their e^{δt}-weighted mass
/// lies on t ≥ TAIL_START; the rest grow toward the truncated end.
pub const TAIL_MAX: f64 = 1e-2;
pub const TAIL_START: f64 = BODY_END - 2.0;

/// δ-decaying part of the discrete kernel of a stand-alone body operator whose
/// grid coordinate is `chart`·t.
fn body_kernel(strip: &Strip, delta: f64, chart: f64) -> Result<BodyKernel> {
    let sys = strip.linearize(&ReducedPerturbation::zeros(strip.n()))?;
    let (basis, _) = null_basis(&sys.scaled_matrix())?;
    let raw: Vec<ReducedPerturbation> = basis.iter().map(|x| sys.unscale(x)).collect();
    let vol = strip.vol();
    let d = raw.len();
    let mass = |i: usize, j: usize, tail: bool| -> f64 {
        (0..strip.n())
            .filter(|&m| !tail || chart * strip.t[m] >= TAIL_START)
            .map(|m| {
                let w = (2.0 * delta * (chart * strip.t[m]).max(0.0)).exp();
                (0..4).map(|c| raw[i].get(c, m) * raw[j].get(c, m)).sum::<f64>() * vol[m] * w
            })
            .sum()
    };
    let mut fields = Vec::new();
    if d > 0 {
        let total = DMatrix::<f64>::from_fn(d, d, |i, j| mass(i, j, false));
        let tail = DMatrix::<f64>::from_fn(d, d, |i, j| mass(i, j, true));
        let l = total
            .cholesky()
            .ok_or_else(|| Error::Inconclusive("body kernel basis is degenerate".into()))?
            .l();
        let li = l.try_inverse().expect("triangular factor is invertible");
        let eig = (&li * tail * li.transpose()).symmetric_eigen();
        let back = li.transpose();
        for k in 0..d {
            if eig.eigenvalues[k] < TAIL_MAX {
                let coef = &back * eig.eigenvectors.column(k);
                let mut f = ReducedPerturbation::zeros(strip.n());
                for (i, r) in raw.iter().enumerate() {
                    for c in 0..3 {
                        for m in 0..strip.n() {
                            f.h[c][m] += coef[i] * r.h[c][m];
                        }
                    }
                }
                fields.push(f);
            }
        }
    }
    let mut t: Vec<f64> = strip.t.iter().map(|x| chart * x).collect();
    let mut vol = vol;
    if chart < 0.0 {
        t.reverse();
        vol.reverse();
        for f in &mut fields {
            for c in 0..3 {
                f.h[c].reverse();
            }
        }
    }
    Ok(BodyKernel { t, fields, vol })
}

/// τ-independent null vectors of the reduced cylinder model at λ = 0.
pub fn neck_kernel(flag: f64) -> Vec<[f64; 3]> {
    let c0 = ModelOperator::reduced_asd(flag).modes[0].coeffs[0].clone();
    let svd = c0.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let smax = svd.singular_values.max();
    (0..3)
        .filter(|&k| svd.singular_values[k] < 1e-8 * smax)
        .map(|k| {
            let v = vt.row(k);
            let s = if v.sum() < 0.0 { -1.0 } else { 1.0 };
            [s * v[0], s * v[1], s * v[2]]
        })
        .collect()
}

pub fn kernel_bases(spec: &GlueSpec) -> Result<KernelBases> {
    for b in [&spec.body1, &spec.body2] {
        if b.obstructions.0 > 0 {
            return Err(Error::Hypothesis(format!("{} has a nonzero obstruction space (dim {})", b.name, b.obstructions.0)));
        }
        if b.obstructions.1 > 0 {
            return Err(Error::Hypothesis(format!("{} has conformal Killing fields (dim {})", b.name, b.obstructions.1)));
        }
    }
    let s = spec.flag()? as f64;
    let (h, pad) = (spec.grid.h, spec.grid.pad);
    let h1 = body_kernel(&spec.body1.strip(pad, BODY_END, h, s, false)?, spec.delta, 1.0)?;
    let h2 = body_kernel(&spec.body2.reflected_strip(pad, BODY_END, h, s)?, spec.delta, -1.0)?;
    Ok(KernelBases { h0: neck_kernel(s), h1, h2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    Neck,
    Body1,
    Body2,
}

/// Constraint functionals on the flat unknown u = (h1, h2, h3) of the glued grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalSpec {
    pub rows: Vec<Vec<f64>>,
    pub kinds: Vec<ConstraintKind>,
    /// Body cutoff position L: body constraints use α(t_i − L).
    pub cutoff: f64,
    /// Neck constraints live on |τ| ≤ ε.
    pub eps: f64,
    /// Largest condition number of the truncated-vs-true Gram matrices.
    pub gram_condition: f64,
}

impl TransversalSpec {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Condition number of G_ij = ⟨α(t − L) e_i, e_j⟩ on the body grid.
pub fn gram_condition(k: &BodyKernel, cutoff: f64) -> f64 {
    let d = k.dim();
    if d == 0 {
        return 1.0;
    }
    let g = DMatrix::<f64>::from_fn(d, d, |i, j| {
        (0..k.t.len())
            .map(|m| {
                let a = alpha(k.t[m] - cutoff).0;
                (0..4).map(|c| a * k.fields[i].get(c, m) * k.fields[j].get(c, m)).sum::<f64>() * k.vol[m]
            })
            .sum::<f64>()
    });
    let s = g.svd(false, false).singular_values;
    s.max() / s.min()
}

pub const GRAM_LIMIT: f64 = 1e6;

/// Constraint options: body cutoff L and neck half-width ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransversalOptions {
    pub cutoff: f64,
    pub eps: f64,
}

impl Default for TransversalOptions {
    fn default() -> Self {
        Self { cutoff: 3.0, eps: 1.0 }
    }
}

pub fn build_transversal(cfg: &GluedConfig, bases: &KernelBases, opts: TransversalOptions) -> Result<TransversalSpec> {
    let TransversalOptions { cutoff, eps } = opts;
    if cfg.l < cutoff + 1.0 {
        return Err(Error::Invalid(format!("l = {} below L + 1 = {}", cfg.l, cutoff + 1.0)));
    }
    let gram = gram_condition(&bases.h1, cutoff).max(gram_condition(&bases.h2, cutoff));
    if gram > GRAM_LIMIT {
        return Err(Error::Inconclusive(format!("Gram condition {gram:.2e} above {GRAM_LIMIT:e}; increase L or ε")));
    }
    let n = cfg.n();
    let strip = cfg.strip()?;
    let vol = strip.vol();
    let w = weight_profile(cfg).w;
    let wv: Vec<f64> = (0..n).map(|j| w[j] * w[j] * vol[j]).collect();
    let mut rows = Vec::new();
    let mut kinds = Vec::new();
    for v in &bases.h0 {
        let mut r = vec![0.0; 3 * n];
        for j in 0..n {
            if cfg.tau[j].abs() <= eps {
                for c in 0..3 {
                    r[c * n + j] = v[c] * wv[j];
                }
            }
        }
        rows.push(r);
        kinds.push(ConstraintKind::Neck);
    }
    for (kind, kern, to_t) in [
        (ConstraintKind::Body1, &bases.h1, 1.0),
        (ConstraintKind::Body2, &bases.h2, -1.0),
    ] {
        for k in 0..kern.dim() {
            let mut r = vec![0.0; 3 * n];
            for j in 0..n {
                let t = cfg.l + to_t * cfg.tau[j];
                let a = alpha(t - cutoff).0;
                if a == 0.0 {
                    continue;
                }
                for c in 0..3 {
                    r[c * n + j] = a * kern.eval(k, c + 1, t) * wv[j];
                }
            }
            rows.push(r);
            kinds.push(kind);
        }
    }
    Ok(TransversalSpec { rows, kinds, cutoff, eps, gram_condition: gram })
}

/// Orthonormal basis of the null space of the constraints in scaled kept coordinates.
pub fn constraint_nullspace(sys: &LinearizedSystem, t: &TransversalSpec) -> Result<DMatrix<f64>> {
    let cols = sys.kept_columns();
    let n = cols.len();
    if t.is_empty() {
        return Ok(DMatrix::identity(n, n));
    }
    let ct = DMatrix::from_fn(n, t.len(), |k, r| t.rows[r][cols[k]] / sys.col_scale[cols[k]]);
    let qr = ct.qr();
    let rd = qr.r().diagonal().abs();
    if rd.min() < 1e-10 * rd.max() {
        return Err(Error::Inconclusive("constraint functionals are linearly dependent".into()));
    }
    let mut q = DMatrix::identity(n, n);
    qr.q_tr_mul(&mut q);
    let q = q.transpose();
    Ok(q.columns(t.len(), n - t.len()).into_owned())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvRow {
    pub l: f64,
    pub delta: f64,
    pub restricted: f64,
    pub unrestricted: f64,
    pub constraints: usize,
}

fn min_sv(a: &DMatrix<f64>) -> f64 {
    a.clone().svd(false, false).singular_values.min()
}

/// Smallest singular values of the scaled 𝒟(l) with and without the U⊥ constraints.
pub fn min_sv_row(spec: &GlueSpec, bases: &KernelBases, opts: TransversalOptions, l: f64) -> Result<SvRow> {
    let cfg = spec.at(l)?;
    let strip = cfg.strip()?;
    let sys = strip.linearize(&ReducedPerturbation::zeros(cfg.n()))?;
    let t = build_transversal(&cfg, bases, opts)?;
    let a = sys.scaled_matrix();
    let z = constraint_nullspace(&sys, &t)?;
    Ok(SvRow { l, delta: spec.delta, restricted: min_sv(&(&a * z)), unrestricted: min_sv(&a), constraints: t.len() })
}

pub fn min_sv_probe(spec: &GlueSpec, opts: TransversalOptions, sweep: &[f64]) -> Result<Vec<SvRow>> {
    let bases = kernel_bases(spec)?;
    sweep.par_iter().map(|&l| min_sv_row(spec, &bases, opts, l)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyl_spectral::indicial_spectrum;
    use crate::neck_glue::{Body, GlueGrid};

    fn s4_cp2() -> GlueSpec {
        GlueSpec {
            body1: Body::round_s4().unwrap(),
            body2: Body::fubini_study().unwrap(),
            delta: 2.0 / 3.0,
            grid: GlueGrid::default(),
        }
    }

    #[test]
    fn neck_kernel_matches_indicial_chains() {
        for s in [1.0, -1.0] {
            let h0 = neck_kernel(s);
            let sp = indicial_spectrum(&ModelOperator::reduced_asd(s), (-0.5, 0.5)).unwrap();
            assert_eq!(h0.len(), sp.entries[0].chains.len());
            let v = h0[0];
            assert!((v[0] - v[1]).abs() < 1e-8 && (v[1] - v[2]).abs() < 1e-8, "{v:?}");
        }
    }

    #[test]
    fn bases_and_codimension() {
        let spec = s4_cp2();
        let b = kernel_bases(&spec).unwrap();
        assert_eq!((b.h0.len(), b.h1.dim(), b.h2.dim()), (1, 0, 4));
        let cfg = spec.at(6.0).unwrap();
        let t = build_transversal(&cfg, &b, TransversalOptions::default()).unwrap();
        assert_eq!(t.len(), b.total());
        assert!(t.gram_condition < 10.0, "{}", t.gram_condition);
    }

    #[test]
    fn obstructed_body_is_rejected() {
        let mut spec = s4_cp2();
        spec.body2 = spec.body2.with_obstructions(1, 0);
        assert!(matches!(kernel_bases(&spec), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn probe_sweep() {
        let spec = s4_cp2();
        let rows = min_sv_probe(&spec, TransversalOptions::default(), &[4.0, 8.0, 16.0]).unwrap();
        let r: Vec<f64> = rows.iter().map(|x| x.restricted).collect();
        let u: Vec<f64> = rows.iter().map(|x| x.unrestricted).collect();
        let (lo, hi) = r.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi / lo < 2.0, "{r:?}");
        assert!(u[0] > u[1] && u[1] > u[2] && u[0] / u[2] > 5.0, "{u:?}");
    }
}
