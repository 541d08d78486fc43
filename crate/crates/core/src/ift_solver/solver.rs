//! Damped Gauss–Newton on U⊥(l) for W^s[g(l)(1+h)] = 0, L* h = 0.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::linearize::{ReducedPerturbation, Strip};
use crate::cohom_one::profile::CoframeProfile;
use crate::error::{Error, Result};
use crate::neck_glue::config::GluedConfig;
use crate::neck_glue::transversal::{build_transversal, constraint_nullspace, KernelBases, TransversalOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Success threshold for both residual norms.
    pub tol: f64,
    /// Iteration stops once both residuals fall below this.
    pub stop: f64,
    pub max_iter: usize,
    pub min_damping: f64,
    pub transversal: TransversalOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-9, stop: 1e-13, max_iter: 12, min_damping: 1.0 / 64.0, transversal: TransversalOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iter: usize,
    pub step_norm: f64,
    #[serde(rename = "residual_W")]
    pub residual_w: f64,
    pub residual_gauge: f64,
    pub damping: f64,
    pub positivity_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverState {
    pub h: ReducedPerturbation,
    pub residual_w: f64,
    pub residual_gauge: f64,
    pub positivity_margin: f64,
    pub iterates: Vec<IterationLog>,
}

impl SolverState {
    pub fn at(strip: &Strip, h: ReducedPerturbation) -> Self {
        let (rw, rg) = strip.residual_norms(&h);
        let margin = h.positivity_margin();
        let log = IterationLog {
            iter: 0,
            step_norm: 0.0,
            residual_w: rw,
            residual_gauge: rg,
            damping: 0.0,
            positivity_margin: margin,
        };
        Self { h, residual_w: rw, residual_gauge: rg, positivity_margin: margin, iterates: vec![log] }
    }

    pub fn residual(&self) -> f64 {
        self.residual_w.max(self.residual_gauge)
    }
}

/// Weighted U(l)-norm: Σ_j w_j² vol_j Σ_c h_c(j)² over the three free components.
pub fn weighted_norm(strip: &Strip, h: &ReducedPerturbation) -> f64 {
    let (_, cs) = strip.scales();
    h.to_flat().iter().zip(&cs).map(|(v, s)| (v * s).powi(2)).sum::<f64>().sqrt()
}

/// The background strip together with the orthonormal constraint nullspace Z.
pub struct NewtonContext {
    pub strip: Strip,
    pub z: DMatrix<f64>,
}

impl NewtonContext {
    pub fn new(cfg: &GluedConfig, bases: &KernelBases, opts: TransversalOptions) -> Result<Self> {
        let strip = cfg.strip()?;
        let sys = strip.linearize(&ReducedPerturbation::zeros(cfg.n()))?;
        let t = build_transversal(cfg, bases, opts)?;
        let z = constraint_nullspace(&sys, &t)?;
        Ok(Self { strip, z })
    }

    /// Unconstrained context (Z = identity on kept columns).
    pub fn unconstrained(strip: Strip) -> Result<Self> {
        let sys = strip.linearize(&ReducedPerturbation::zeros(strip.n()))?;
        let k = sys.kept_columns().len();
        Ok(Self { strip, z: DMatrix::identity(k, k) })
    }
}

/// One least-norm correction on U⊥ with backtracking on residual_W.
pub fn newton_step(ctx: &NewtonContext, state: &SolverState, opts: &SolverOptions) -> Result<SolverState> {
    let sys = ctx.strip.linearize(&state.h)?;
    let az = sys.scaled_matrix() * &ctx.z;
    let rhs = -sys.scaled_residual();
    let svd = az.svd(true, true);
    let eps = 1e-13 * svd.singular_values.max();
    let y = svd.solve(&rhs, eps).map_err(|e| Error::Inconclusive(format!("least-squares solve: {e}")))?;
    let du = sys.unscale(&(&ctx.z * y));
    let full_norm = weighted_norm(&ctx.strip, &du);
    let mut lambda = 1.0;
    let mut positive_seen = false;
    while lambda >= opts.min_damping {
        let mut trial = state.h.clone();
        for c in 0..3 {
            for (v, d) in trial.h[c].iter_mut().zip(&du.h[c]) {
                *v += lambda * d;
            }
        }
        let margin = trial.positivity_margin();
        if margin > 0.0 {
            positive_seen = true;
            let (rw, rg) = ctx.strip.residual_norms(&trial);
            if rw.is_finite() && (rw < state.residual_w || rw.max(rg) < opts.stop) {
                let mut iterates = state.iterates.clone();
                iterates.push(IterationLog {
                    iter: iterates.len(),
                    step_norm: lambda * full_norm,
                    residual_w: rw,
                    residual_gauge: rg,
                    damping: lambda,
                    positivity_margin: margin,
                });
                return Ok(SolverState { h: trial, residual_w: rw, residual_gauge: rg, positivity_margin: margin, iterates });
            }
        }
        lambda *= 0.5;
    }
    if positive_seen {
        Err(Error::Divergence(format!(
            "no damping ≥ {} reduces residual_W = {:.3e} (residual_gauge {:.3e}, step norm {full_norm:.3e})",
            opts.min_damping, state.residual_w, state.residual_gauge
        )))
    } else {
        Err(Error::Positivity(format!("1 + h loses positivity for every damping ≥ {}", opts.min_damping)))
    }
}

/// Newton loop from h = 0. Stops below `stop`, at `max_iter`, or when a step no
/// longer halves the residual once it is below `tol`.
pub fn solve_with(ctx: &NewtonContext, opts: &SolverOptions) -> Result<SolverState> {
    let mut state = SolverState::at(&ctx.strip, ReducedPerturbation::zeros(ctx.strip.n()));
    for _ in 0..opts.max_iter {
        if state.residual() < opts.stop {
            break;
        }
        let next = match newton_step(ctx, &state, opts) {
            Ok(s) => s,
            Err(Error::Divergence(_)) if state.residual() <= opts.tol => break,
            Err(e) => return Err(e),
        };
        let stalled = next.residual() > 0.5 * state.residual() && next.residual() <= opts.tol;
        state = next;
        if stalled {
            break;
        }
    }
    if state.residual_w > opts.tol || state.residual_gauge > opts.tol {
        return Err(Error::Divergence(format!(
            "stopped after {} iterations at residual_W = {:.3e}, residual_gauge = {:.3e}",
            state.iterates.len() - 1,
            state.residual_w,
            state.residual_gauge
        )));
    }
    if state.positivity_margin <= 0.0 {
        return Err(Error::Positivity(format!("final margin {}", state.positivity_margin)));
    }
    Ok(state)
}

/// Solve on the glued configuration, with U⊥ built from `bases`.
pub fn solve_asd(cfg: &GluedConfig, bases: &KernelBases, opts: &SolverOptions) -> Result<SolverState> {
    let strip = cfg.strip()?;
    let start = SolverState::at(&strip, ReducedPerturbation::zeros(cfg.n()));
    if start.residual() < opts.stop {
        return Ok(start);
    }
    solve_with(&NewtonContext::new(cfg, bases, opts.transversal)?, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyReport {
    pub positivity_margin: f64,
    pub sup_h: f64,
    pub weighted_norm: f64,
    pub ok: bool,
}

pub fn nondegeneracy_check(strip: &Strip, h: &ReducedPerturbation) -> NondegeneracyReport {
    let sup_h = h.sup_norm();
    let positivity_margin = h.positivity_margin();
    NondegeneracyReport {
        positivity_margin,
        sup_h,
        weighted_norm: weighted_norm(strip, h),
        ok: sup_h < 1.0 && positivity_margin > 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    /// κ_n = r_{n+1} / r_n² over consecutive iterates above the floor.
    pub kappas: Vec<f64>,
    /// Observed orders ln(r_{n+2}/r_{n+1}) / ln(r_{n+1}/r_n).
    pub orders: Vec<f64>,
    pub above_floor: usize,
    pub quadratic: bool,
}

/// Order below which a convergence triple does not count as quadratic.
pub const MIN_ORDER: f64 = 1.5;

/// Quadratic convergence check on residual_W: at least three iterates above
/// `floor`, κ stable within a factor 10 and every observed order ≥ 1.5.
pub fn quadratic_tail(log: &[IterationLog], floor: f64) -> TailReport {
    let r: Vec<f64> = log.iter().map(|x| x.residual_w).collect();
    let above = r.iter().take_while(|&&x| x > floor).count();
    let kappas: Vec<f64> = r[..above].windows(2).map(|w| w[1] / (w[0] * w[0])).collect();
    let orders: Vec<f64> = r[..above].windows(3).map(|w| (w[2] / w[1]).ln() / (w[1] / w[0]).ln()).collect();
    let (lo, hi) = kappas.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &k| (a.min(k), b.max(k)));
    let quadratic = above >= 3 && hi / lo < 10.0 && orders.iter().all(|&p| p >= MIN_ORDER);
    TailReport { kappas, orders, above_floor: above, quadratic }
}

pub fn write_iterations_csv<W: Write>(w: W, log: &[IterationLog]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in log {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

/// g(l)(1+h) as a sampled coframe profile on the glued τ grid.
pub fn corrected_profile(cfg: &GluedConfig, h: &ReducedPerturbation) -> Result<CoframeProfile> {
    if h.len() != cfg.n() {
        return Err(Error::GridMismatch("perturbation length differs from the glued grid".into()));
    }
    let n = cfg.n();
    let q = (0..n).map(|j| cfg.jets[j].q * (1.0 + h.get(0, j))).collect();
    let a = [0, 1, 2].map(|i| (0..n).map(|j| cfg.jets[j].a[i] * (1.0 + h.get(i + 1, j)).sqrt()).collect());
    let p = CoframeProfile::from_samples(cfg.tau.clone(), q, a, cfg.bodies.0.quotient_k, cfg.flag);
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neck_glue::transversal::kernel_bases;
    use crate::neck_glue::{Body, GlueGrid, GlueSpec};

    fn s4_cp2() -> GlueSpec {
        GlueSpec {
            body1: Body::round_s4().unwrap(),
            body2: Body::fubini_study().unwrap(),
            delta: 2.0 / 3.0,
            grid: GlueGrid::default(),
        }
    }

    #[test]
    fn glued_half_cylinders_are_already_solved() {
        let c = Body::half_cylinder(1);
        let spec = GlueSpec { body1: c.clone(), body2: c, delta: 0.5, grid: GlueGrid::default() };
        let cfg = spec.at(5.0).unwrap();
        let bases = KernelBases { h0: vec![], h1: Default::default(), h2: Default::default() };
        let s = solve_asd(&cfg, &bases, &SolverOptions::default()).unwrap();
        assert_eq!(s.iterates.len(), 1);
        assert_eq!(s.h.sup_norm(), 0.0);
        assert_eq!(s.positivity_margin, 1.0);
    }

    #[test]
    fn s4_cp2_converges_and_scales() {
        let spec = s4_cp2();
        let bases = kernel_bases(&spec).unwrap();
        let opts = SolverOptions::default();
        let mut norms = Vec::new();
        for l in [5.0, 6.0, 7.0, 8.0] {
            let cfg = spec.at(l).unwrap();
            let s = solve_asd(&cfg, &bases, &opts).unwrap();
            assert!(s.residual_w <= 1e-9 && s.residual_gauge <= 1e-9);
            assert!(s.iterates[1].residual_w < 0.1 * s.iterates[0].residual_w);
            let strip = cfg.strip().unwrap();
            let nd = nondegeneracy_check(&strip, &s.h);
            assert!(nd.ok && nd.sup_h < 0.2);
            norms.push((l, nd.weighted_norm.ln()));
        }
        let slope = crate::cohom_one::decay::linear_fit(&norms).0;
        assert!((slope + 4.0 / 3.0).abs() < 0.15 * 4.0 / 3.0, "{slope}");
    }

    #[test]
    fn nondegeneracy_flags_large_entries() {
        let strip = s4_cp2().at(5.0).unwrap().strip().unwrap();
        let mut h = ReducedPerturbation::zeros(strip.n());
        assert_eq!(nondegeneracy_check(&strip, &h).positivity_margin, 1.0);
        h.h[0][10] = -1.05;
        h.h[1][10] = 0.5;
        assert!(!nondegeneracy_check(&strip, &h).ok);
    }

    #[test]
    fn quadratic_tail_on_synthetic_logs() {
        let log = |r: &[f64]| -> Vec<IterationLog> {
            r.iter()
                .enumerate()
                .map(|(i, &x)| IterationLog {
                    iter: i,
                    step_norm: 0.0,
                    residual_w: x,
                    residual_gauge: 0.0,
                    damping: 1.0,
                    positivity_margin: 1.0,
                })
                .collect()
        };
        let t = quadratic_tail(&log(&[1e-1, 2e-2, 8e-4, 1.3e-6, 1e-15]), 1e-13);
        assert!(t.quadratic && t.above_floor == 4, "{t:?}");
        assert!(!quadratic_tail(&log(&[1e-1, 5e-2, 2.5e-2, 1.2e-2]), 1e-13).quadratic);
        assert!(!quadratic_tail(&log(&[1e-3, 1e-8, 1e-15]), 1e-13).quadratic);
    }

    #[test]
    fn iteration_csv_header() {
        let mut buf = Vec::new();
        write_iterations_csv(&mut buf, &[IterationLog { iter: 0, step_norm: 0.0, residual_w: 1.0, residual_gauge: 0.0, damping: 0.0, positivity_margin: 1.0 }]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iter,step_norm,residual_W,residual_gauge,damping,positivity_margin"));
    }
}
