//! Fredholm indices of discretized weighted operators by singular-value thresholding.
//!
//! Kernels are counted as near-null vectors of the weighted operator stacked with
//! rows pinning the data at every truncation end; cokernels as near-null vectors of the
//! transpose of the weighted operator, whose free ends carry the matching adjoint
//! conditions automatically.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{ModeBlock, ModelOperator};
use super::weights::{WeightProfile, WeightSpec};
use crate::error::{Error, Result};

/// Relative rank threshold.
pub const RANK_TOL: f64 = 1e-6;
/// Required ratio across the threshold.
pub const MIN_GAP: f64 = 1e3;
/// Nodes pinned at each truncation end in the kernel probe.
const PIN: usize = 2;

/// A discretized operator between sampled fields, with sample positions and
/// quadrature weights for rows (target) and columns (domain).
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub matrix: DMatrix<f64>,
    pub row_t: Vec<f64>,
    pub row_vol: Vec<f64>,
    pub col_t: Vec<f64>,
    pub col_vol: Vec<f64>,
    /// Columns sitting at truncation ends, where admissible kernel elements decay.
    pub end_cols: Vec<usize>,
    pub truncation: Truncation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub t_min: f64,
    pub t_max: f64,
    pub h: f64,
    pub nodes: usize,
}

/// Where a model mode is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    /// t ∈ [−T, T], both ends truncation ends.
    FullLine { half_length: f64 },
    /// t ∈ [0, T]: the compact side at 0 carries Dirichlet data on every component when
    /// `dirichlet`, nothing otherwise; T is a truncation end.
    HalfLine { length: f64, dirichlet: bool },
    /// t ∈ [−L/2, L/2], compact at both ends with Dirichlet data on every component.
    Interval { length: f64 },
}

impl Domain {
    fn scaled(&self, f: f64) -> Self {
        match *self {
            Domain::FullLine { half_length } => Domain::FullLine { half_length: half_length * f },
            Domain::HalfLine { length, dirichlet } => Domain::HalfLine { length: length * f, dirichlet },
            Domain::Interval { length } => Domain::Interval { length: length * f },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub dim_ker: usize,
    pub dim_coker: usize,
    pub index: i64,
    pub weight: WeightSpec,
    pub truncation: Truncation,
    /// Smallest singular values of the kernel probe, ascending.
    pub ker_singular_values: Vec<f64>,
    pub coker_singular_values: Vec<f64>,
    pub gap_ker: f64,
    pub gap_coker: f64,
}

/// Second-order rows at interior nodes, first-order rows at cell midpoints, algebraic
/// rows at nodes. Midpoint rows keep the discrete solution space the size of the
/// continuous one, with no odd-even mode.
pub fn discretize_block(block: &ModeBlock, domain: Domain, h: f64) -> Result<DiscreteOperator> {
    let (t0, t1, left_dirichlet, right_dirichlet) = match domain {
        Domain::FullLine { half_length } => (-half_length, half_length, false, false),
        Domain::HalfLine { length, dirichlet } => (0.0, length, dirichlet, false),
        Domain::Interval { length } => (-0.5 * length, 0.5 * length, true, true),
    };
    let nodes = ((t1 - t0) / h).round() as usize + 1;
    if nodes < 8 {
        return Err(Error::GridTooSmall("fewer than 8 nodes".into()));
    }
    if block.degree() > 2 {
        return Err(Error::Invalid("discretization supports order ≤ 2".into()));
    }
    let h = (t1 - t0) / (nodes - 1) as f64;
    let n = block.dim();
    let orders = block.row_orders();
    let zero = DMatrix::zeros(n, n);
    let c = |j: usize| block.coeffs.get(j).unwrap_or(&zero);
    let mut rows: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    for (r, &m) in orders.iter().enumerate() {
        match m {
            2 => {
                for i in 1..nodes - 1 {
                    let mut e = Vec::new();
                    for col in 0..n {
                        let (a0, a1, a2) = (c(0)[(r, col)], c(1)[(r, col)], c(2)[(r, col)]);
                        e.push(((i - 1) * n + col, a2 / (h * h) - a1 / (2.0 * h)));
                        e.push((i * n + col, a0 - 2.0 * a2 / (h * h)));
                        e.push(((i + 1) * n + col, a2 / (h * h) + a1 / (2.0 * h)));
                    }
                    rows.push((t0 + i as f64 * h, e));
                }
            }
            1 => {
                for i in 0..nodes - 1 {
                    let mut e = Vec::new();
                    for col in 0..n {
                        let (a0, a1) = (c(0)[(r, col)], c(1)[(r, col)]);
                        e.push((i * n + col, 0.5 * a0 - a1 / h));
                        e.push(((i + 1) * n + col, 0.5 * a0 + a1 / h));
                    }
                    rows.push((t0 + (i as f64 + 0.5) * h, e));
                }
            }
            _ => {
                for i in 0..nodes {
                    let e = (0..n).map(|col| (i * n + col, c(0)[(r, col)])).collect();
                    rows.push((t0 + i as f64 * h, e));
                }
            }
        }
    }
    let kept: Vec<usize> = (0..nodes * n)
        .filter(|&k| !(left_dirichlet && k / n == 0) && !(right_dirichlet && k / n == nodes - 1))
        .collect();
    let mut slot = vec![usize::MAX; nodes * n];
    for (i, &k) in kept.iter().enumerate() {
        slot[k] = i;
    }
    let ncols = kept.len();
    let mut matrix = DMatrix::zeros(rows.len(), ncols);
    for (ri, (_, entries)) in rows.iter().enumerate() {
        for &(col, v) in entries {
            if slot[col] != usize::MAX {
                matrix[(ri, slot[col])] += v;
            }
        }
    }
    let col_t: Vec<f64> = kept.iter().map(|&k| t0 + (k / n) as f64 * h).collect();
    let mut end_cols = Vec::new();
    for (i, &k) in kept.iter().enumerate() {
        let node = k / n;
        let left_end = matches!(domain, Domain::FullLine { .. }) && node < PIN;
        let right_end = !right_dirichlet && node + PIN >= nodes;
        if left_end || right_end {
            end_cols.push(i);
        }
    }
    Ok(DiscreteOperator {
        matrix,
        row_vol: vec![h; rows.len()],
        row_t: rows.iter().map(|r| r.0).collect(),
        col_vol: vec![h; ncols],
        col_t,
        end_cols,
        truncation: Truncation { t_min: t0, t_max: t1, h, nodes },
    })
}

fn scaled(op: &DiscreteOperator, w: &WeightSpec) -> DMatrix<f64> {
    let mut m = op.matrix.clone();
    for (i, mut row) in m.row_iter_mut().enumerate() {
        row *= w.at(op.row_t[i]) * op.row_vol[i].sqrt();
    }
    for (j, mut col) in m.column_iter_mut().enumerate() {
        col /= w.at(op.col_t[j]) * op.col_vol[j].sqrt();
    }
    m
}

/// Number of singular values under the threshold, the ascending tail, and the gap ratio.
fn null_count(m: DMatrix<f64>) -> (usize, Vec<f64>, f64) {
    let structural = m.ncols().saturating_sub(m.nrows());
    let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    sv.extend(std::iter::repeat_n(0.0, structural));
    sv.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let top = sv.last().copied().unwrap_or(0.0);
    let tau = RANK_TOL * top;
    let zero = sv.iter().filter(|s| **s < tau).count();
    let gap = match (zero, sv.get(zero)) {
        (_, None) => 0.0,
        (0, Some(&above)) => above / tau,
        (z, Some(&above)) => above / sv[z - 1].max(f64::MIN_POSITIVE),
    };
    (zero, sv.into_iter().take(8).collect(), gap)
}

/// dim ker, dim coker and index of a weighted discrete operator.
pub fn discrete_index(op: &DiscreteOperator, w: &WeightSpec) -> Result<IndexReport> {
    let s = scaled(op, w);
    let kappa = s.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut probe = DMatrix::zeros(s.nrows() + op.end_cols.len(), s.ncols());
    probe.view_mut((0, 0), (s.nrows(), s.ncols())).copy_from(&s);
    for (i, &c) in op.end_cols.iter().enumerate() {
        probe[(s.nrows() + i, c)] = kappa;
    }
    let ((dim_ker, ker_sv, gap_ker), (dim_coker, coker_sv, gap_coker)) =
        rayon::join(|| null_count(probe), || null_count(s.transpose()));
    let report = IndexReport {
        dim_ker,
        dim_coker,
        index: dim_ker as i64 - dim_coker as i64,
        weight: *w,
        truncation: op.truncation,
        ker_singular_values: ker_sv,
        coker_singular_values: coker_sv,
        gap_ker,
        gap_coker,
    };
    // with nothing below the threshold, the smallest singular value must still clear it
    let need = |zero: usize| if zero == 0 { 10.0 } else { MIN_GAP };
    if report.gap_ker < need(dim_ker) || report.gap_coker < need(dim_coker) {
        return Err(Error::Inconclusive(format!(
            "no reliable singular-value gap (ker gap {:.3e}, coker gap {:.3e}; tails {:?} / {:?})",
            report.gap_ker, report.gap_coker, report.ker_singular_values, report.coker_singular_values
        )));
    }
    Ok(report)
}

/// Index of a model operator summed over modes, checked stable under lengthening the
/// truncation by half.
pub fn model_index(op: &ModelOperator, w: &WeightSpec, domain: Domain, h: f64) -> Result<IndexReport> {
    let per_mode: Vec<Result<(IndexReport, usize)>> = op
        .modes
        .par_iter()
        .map(|b| {
            let a = discrete_index(&discretize_block(b, domain, h)?, w)?;
            let long = discrete_index(&discretize_block(b, domain.scaled(1.5), h)?, w)?;
            if (a.dim_ker, a.dim_coker) != (long.dim_ker, long.dim_coker) {
                return Err(Error::Inconclusive(format!(
                    "mode μ = {}: dimensions ({}, {}) change to ({}, {}) under truncation refinement",
                    b.mu, a.dim_ker, a.dim_coker, long.dim_ker, long.dim_coker
                )));
            }
            Ok((a, b.multiplicity))
        })
        .collect();
    let mut total: Option<IndexReport> = None;
    for r in per_mode {
        let (rep, mult) = r?;
        total = Some(match total {
            None => IndexReport {
                dim_ker: rep.dim_ker * mult,
                dim_coker: rep.dim_coker * mult,
                index: rep.index * mult as i64,
                ..rep
            },
            Some(t) => IndexReport {
                dim_ker: t.dim_ker + rep.dim_ker * mult,
                dim_coker: t.dim_coker + rep.dim_coker * mult,
                index: t.index + rep.index * mult as i64,
                gap_ker: t.gap_ker.min(rep.gap_ker),
                gap_coker: t.gap_coker.min(rep.gap_coker),
                ..t
            },
        });
    }
    total.ok_or_else(|| Error::Invalid("model operator has no modes".into()))
}

/// dim ker of the formal adjoint at the dual weight, for comparison with dim coker.
pub fn adjoint_kernel_dim(op: &ModelOperator, w: &WeightSpec, domain: Domain, h: f64) -> Result<usize> {
    let adj = op.adjoint();
    let dual = w.dual();
    let mut total = 0;
    for b in &adj.modes {
        let d = discretize_block(b, domain, h)?;
        total += discrete_index(&d, &dual)?.dim_ker * b.multiplicity;
    }
    Ok(total)
}

/// ind(glued) − Σ ind(pieces).
pub fn index_additivity_check(pieces: &[IndexReport], glued: &IndexReport) -> Result<i64> {
    if let Some(p) = pieces.iter().find(|p| (p.weight.delta.abs() - glued.weight.delta.abs()).abs() > 1e-12) {
        return Err(Error::Invalid(format!(
            "weight mismatch: piece at δ = {}, glued at δ = {}",
            p.weight.delta, glued.weight.delta
        )));
    }
    Ok(glued.index - pieces.iter().map(|p| p.index).sum::<i64>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditivityReport {
    /// Body ends (t ∈ [0, T], compact side at 0) and their reflection.
    pub body1: IndexReport,
    pub body2: IndexReport,
    /// Full cylinder with the neck-type weight admitting e^{δ|τ|} growth.
    pub neck: IndexReport,
    /// Compact interval [−T, T]. All weights give equivalent norms there, so the unit
    /// weight w(0) is used.
    pub glued: IndexReport,
    pub residual: i64,
}

/// ind(glued) − ind(D₁) − ind(D₂) − ind(D₀) for a model operator glued from two
/// decaying-weight ends through the neck.
pub fn glued_model_additivity(op: &ModelOperator, delta: f64, length: f64, h: f64) -> Result<AdditivityReport> {
    if !(delta > 0.0) {
        return Err(Error::Invalid("additivity needs δ > 0".into()));
    }
    let end = WeightSpec::l2(delta, WeightProfile::Uniform);
    let half = Domain::HalfLine { length, dirichlet: true };
    let body1 = model_index(op, &end, half, h)?;
    let body2 = model_index(&op.reflected(), &end, half, h)?;
    let neck = model_index(op, &WeightSpec::l2(delta, WeightProfile::SymmetricDecaying), Domain::FullLine { half_length: length }, h)?;
    let glued = model_index(op, &WeightSpec::l2(delta, WeightProfile::Neck { l: 0.0 }), Domain::Interval { length: 2.0 * length }, h)?;
    let residual = index_additivity_check(&[body1.clone(), body2.clone(), neck.clone()], &glued)?;
    Ok(AdditivityReport { body1, body2, neck, glued, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_model_full_line_is_invertible() {
        let op = ModelOperator::point(1.0);
        let r = model_index(&op, &WeightSpec::l2(0.5, WeightProfile::Uniform), Domain::FullLine { half_length: 12.0 }, 0.1)
            .unwrap();
        assert_eq!((r.dim_ker, r.dim_coker, r.index), (0, 0, 0));
    }

    #[test]
    fn symmetric_weights_give_opposite_indices() {
        let op = ModelOperator::s3_scalar_exact(2);
        let dom = Domain::FullLine { half_length: 14.0 };
        let dec = model_index(&op, &WeightSpec::l2(1.0, WeightProfile::SymmetricDecaying), dom, 0.1).unwrap();
        let gro = model_index(&op, &WeightSpec::l2(1.0, WeightProfile::SymmetricGrowing), dom, 0.1).unwrap();
        assert_eq!((dec.dim_ker, dec.dim_coker), (2, 0));
        assert_eq!(gro.index, -dec.index);
    }

    #[test]
    fn half_line_jump_matches_count() {
        let op = ModelOperator::s3_scalar_exact(2);
        let dom = Domain::HalfLine { length: 40.0, dirichlet: true };
        let lo = model_index(&op, &WeightSpec::l2(-0.5, WeightProfile::Uniform), dom, 0.1).unwrap();
        let hi = model_index(&op, &WeightSpec::l2(0.5, WeightProfile::Uniform), dom, 0.1).unwrap();
        assert_eq!(lo.index - hi.index, 2, "{lo:?} {hi:?}");
    }

    #[test]
    fn glued_models_are_additive() {
        for (op, d) in [
            (ModelOperator::reduced_asd(1.0), 1.0),
            (ModelOperator::reduced_asd(-1.0), 1.0),
            (ModelOperator::s3_scalar_exact(1), 1.0),
            (ModelOperator::point(1.0), 0.5),
        ] {
            let r = glued_model_additivity(&op, d, 12.0, 0.1).unwrap();
            assert_eq!(r.residual, 0, "{}", op.name);
        }
    }

    #[test]
    fn wide_and_tall_null_counts_include_structural_dimension() {
        let wide = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(null_count(wide.clone()).0, 1);
        assert_eq!(null_count(wide.transpose()).0, 0);
    }

    #[test]
    fn additivity_rejects_weight_mismatch() {
        let op = ModelOperator::point(1.0);
        let dom = Domain::FullLine { half_length: 10.0 };
        let a = model_index(&op, &WeightSpec::l2(0.5, WeightProfile::Uniform), dom, 0.1).unwrap();
        let b = model_index(&op, &WeightSpec::l2(0.3, WeightProfile::Uniform), dom, 0.1).unwrap();
        assert!(index_additivity_check(std::slice::from_ref(&a), &b).is_err());
        assert_eq!(index_additivity_check(std::slice::from_ref(&a), &a).unwrap(), 0);
    }

    #[test]
    fn reduced_model_indices() {
        let op = ModelOperator::reduced_asd(1.0);
        let full = Domain::FullLine { half_length: 12.0 };
        let uni = model_index(&op, &WeightSpec::l2(1.0, WeightProfile::Uniform), full, 0.1).unwrap();
        assert_eq!(uni.index, 0, "{uni:?}");
        let dec = WeightSpec::l2(1.0, WeightProfile::SymmetricDecaying);
        let r = model_index(&op, &dec, full, 0.1).unwrap();
        assert_eq!(r.index, 1);
        assert_eq!(adjoint_kernel_dim(&op, &dec, full, 0.1).unwrap(), r.dim_coker);
        let half = Domain::HalfLine { length: 24.0, dirichlet: true };
        let a = model_index(&op, &WeightSpec::l2(-3.0, WeightProfile::Uniform), half, 0.1).unwrap();
        let b = model_index(&op, &WeightSpec::l2(-1.0, WeightProfile::Uniform), half, 0.1).unwrap();
        assert_eq!(a.index - b.index, 2);
    }
}
