//! Translation-invariant model operators on Y × ℝ, split into cross-section modes.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cohom_one::cartan::{perturbation_coefficients, trace_free_rows};
use crate::cohom_one::profile::Jet;
use crate::error::{Error, Result};

/// One cross-section mode: B(λ) = Σ_j coeffs[j] (iλ)^j acting on ℂⁿ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeBlock {
    /// Cross-section eigenvalue labelling the mode.
    pub mu: f64,
    pub multiplicity: usize,
    pub coeffs: Vec<DMatrix<f64>>,
}

impl ModeBlock {
    pub fn dim(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Highest derivative appearing in each row.
    pub fn row_orders(&self) -> Vec<usize> {
        (0..self.dim())
            .map(|r| {
                (0..self.coeffs.len())
                    .rev()
                    .find(|&j| self.coeffs[j].row(r).iter().any(|v| *v != 0.0))
                    .unwrap_or(0)
            })
            .collect()
    }

    /// Formal adjoint with respect to dt: Σ C_jᵀ (−∂_t)^j.
    pub fn adjoint(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| if j % 2 == 0 { c.transpose() } else { -c.transpose() })
            .collect();
        Self { mu: self.mu, multiplicity: self.multiplicity, coeffs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOperator {
    pub name: String,
    pub order: usize,
    pub modes: Vec<ModeBlock>,
    /// Every discarded mode has all indicial roots with |Im λ| above this height.
    pub certified_height: f64,
}

impl ModelOperator {
    pub fn new(name: &str, modes: Vec<ModeBlock>, certified_height: f64) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Invalid("model operator needs at least one mode".into()));
        }
        let order = modes.iter().map(|m| m.degree()).max().unwrap_or(0);
        for m in &modes {
            let n = m.dim();
            if m.coeffs.iter().any(|c| c.nrows() != n || c.ncols() != n) {
                return Err(Error::Invalid("mode coefficients must be square and equal size".into()));
            }
            if m.coeffs.iter().flat_map(|c| c.iter()).any(|v| !v.is_finite()) {
                return Err(Error::Invalid("non-finite coefficient".into()));
            }
            if m.multiplicity == 0 {
                return Err(Error::Invalid("zero multiplicity".into()));
            }
        }
        Ok(Self { name: name.into(), order, modes, certified_height })
    }

    /// −∂_t² + c with Y a point.
    pub fn point(c: f64) -> Self {
        let coeffs = vec![DMatrix::from_element(1, 1, c), DMatrix::zeros(1, 1), DMatrix::from_element(1, 1, -1.0)];
        Self::new("point", vec![ModeBlock { mu: c, multiplicity: 1, coeffs }], f64::INFINITY)
            .expect("valid scalar model")
    }

    /// −∂_t² + Δ_Y from cross-section eigenvalue levels (μ, multiplicity).
    /// `mu_cutoff` is the largest eigenvalue the level list is complete up to.
    pub fn scalar_laplacian(name: &str, levels: &[(f64, usize)], mu_cutoff: f64) -> Result<Self> {
        let modes = levels
            .iter()
            .map(|&(mu, m)| ModeBlock {
                mu,
                multiplicity: m,
                // (iλ)² = −λ², so −∂² ↦ λ² corresponds to coefficient −1 on (iλ)²
                coeffs: vec![DMatrix::from_element(1, 1, mu), DMatrix::zeros(1, 1), DMatrix::from_element(1, 1, -1.0)],
            })
            .collect();
        Self::new(name, modes, mu_cutoff.max(0.0).sqrt())
    }

    /// Scalar model on the unit round S³ with the closed-form levels k(k+2), (k+1)².
    pub fn s3_scalar_exact(k_max: usize) -> Self {
        let levels: Vec<(f64, usize)> = (0..=k_max).map(|k| ((k * (k + 2)) as f64, (k + 1) * (k + 1))).collect();
        let next = ((k_max + 1) * (k_max + 3)) as f64;
        Self::scalar_laplacian("s3-scalar", &levels, next - 1e-9).expect("valid levels")
    }

    /// Gauge-fixed reduced ASD operator (D, L*) on the round cylinder for orientation flag s.
    /// Unknowns (h1, h2, h3) with h0 = −Σh_i; rows are the trace-free W⁺ projections and L*.
    pub fn reduced_asd(s: f64) -> Self {
        let c = perturbation_coefficients(&Jet::cylinder(), s);
        let e = trace_free_rows();
        let mut coeffs = vec![DMatrix::zeros(3, 3), DMatrix::zeros(3, 3), DMatrix::zeros(3, 3)];
        for j in 0..3 {
            for r in 0..2 {
                for i in 0..3 {
                    coeffs[j][(r, i)] = (0..3).map(|k| e[r][k] * c[j][(k, i)]).sum();
                }
            }
        }
        // L*h = 2 (Σ h_i)' on the cylinder
        for i in 0..3 {
            coeffs[1][(2, i)] = 2.0;
        }
        Self::new(
            if s > 0.0 { "reduced-asd+" } else { "reduced-asd-" },
            vec![ModeBlock { mu: 0.0, multiplicity: 1, coeffs }],
            f64::INFINITY,
        )
        .expect("valid reduced model")
    }

    /// The operator in the reversed coordinate −t: odd-order coefficients change sign.
    pub fn reflected(&self) -> Self {
        let flip = |m: &ModeBlock| ModeBlock {
            coeffs: m.coeffs.iter().enumerate().map(|(j, c)| if j % 2 == 0 { c.clone() } else { -c }).collect(),
            ..m.clone()
        };
        Self { name: format!("{}~", self.name), modes: self.modes.iter().map(flip).collect(), ..self.clone() }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            name: format!("{}*", self.name),
            order: self.order,
            modes: self.modes.iter().map(ModeBlock::adjoint).collect(),
            certified_height: self.certified_height,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_orders_of_reduced_model_are_mixed() {
        let m = ModelOperator::reduced_asd(1.0);
        assert_eq!(m.modes[0].row_orders(), vec![2, 2, 1]);
    }

    #[test]
    fn adjoint_is_involutive() {
        let m = ModelOperator::reduced_asd(-1.0);
        assert_eq!(m.adjoint().adjoint().modes, m.modes);
    }

    #[test]
    fn exact_levels_have_square_multiplicities() {
        let m = ModelOperator::s3_scalar_exact(3);
        let mult: Vec<usize> = m.modes.iter().map(|b| b.multiplicity).collect();
        assert_eq!(mult, vec![1, 4, 9, 16]);
        assert!((m.certified_height - 24f64.sqrt()).abs() < 1e-6);
    }
}
