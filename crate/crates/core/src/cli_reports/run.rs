//! Command dispatch, sweeps and exit codes.

use std::path::Path;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{model_from_name, with_profile, Command, Input, ProfileVisitor, RunConfig};
use super::report::{cell, col, manifest, opt_cell, ArtifactWriter, Column};
use crate::cohom_one::decay::linear_fit;
use crate::cohom_one::{cylindrify, CEProfile, RadialProfile};
use crate::cyl_spectral::{
    delta0, exceptional_weights, indicial_spectrum, model_index, norm_equivalence_probe, shrinking_family, Domain,
    NormRatioReport, WeightProfile, WeightSpec,
};
use crate::error::{Error, Result};
use crate::frame_curvature::io::load_metric;
use crate::frame_curvature::{
    christoffel, conformal_deviation, interior_nodes, random_factors, riemann_with_order, weyl_decompose,
    wminus_project, wplus_project, RiemannOrder,
};
use crate::ift_solver::{
    chart_verification, quadratic_tail, solve_asd, weighted_norm, ReducedPerturbation, SolverOptions, SolverState,
};
use crate::neck_glue::{kernel_bases, min_sv_row, residual_row, GlueSpec, KernelBases, TransversalOptions, RESIDUAL_FLOOR};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_DIVERGENCE: i32 = 4;

/// Exit code class of an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invalid(_)
        | Error::Format(_)
        | Error::GridMismatch(_)
        | Error::GridTooSmall(_)
        | Error::NonPositive { .. }
        | Error::Complementarity(_)
        | Error::Orientation(_)
        | Error::Hypothesis(_) => EXIT_VALIDATION,
        Error::SingularMetric { .. }
        | Error::Unmeasurable(_)
        | Error::Inconclusive(_)
        | Error::ModeCutoff(_)
        | Error::Undefined(_)
        | Error::ExceptionalWeight(_) => EXIT_INCONCLUSIVE,
        Error::Divergence(_) | Error::Positivity(_) => EXIT_DIVERGENCE,
        Error::Io(_) => EXIT_FAILURE,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub status: String,
    pub artifacts: Vec<String>,
}

/// Validate, dispatch, and write artifacts plus `manifest.json` into `out`.
/// Validation failures return early and write nothing.
pub fn run(cfg: &RunConfig, base: &Path, out: &Path) -> Result<RunOutcome> {
    cfg.validate(base)?;
    let mut w = ArtifactWriter::new(out)?;
    let (exit_code, status) = match dispatch(cfg, base, &mut w) {
        Ok(status) => (EXIT_OK, status),
        Err(e) => (exit_code(&e), e.to_string()),
    };
    let artifacts = w.written.clone();
    w.json("manifest", &manifest(cfg, base, artifacts.clone(), &status, exit_code)?)?;
    Ok(RunOutcome { exit_code, status, artifacts })
}

fn dispatch(cfg: &RunConfig, base: &Path, w: &mut ArtifactWriter) -> Result<String> {
    match cfg.command {
        Command::Curvature => curvature(cfg, base, w),
        Command::Spectrum => spectrum(cfg, w),
        Command::Index => index(cfg, w),
        Command::Cylindrify => cylindrify_cmd(cfg, base, w),
        Command::Glue => glue(cfg, base, w),
        Command::Probe => probe(cfg, base, w),
        Command::Solve => solve(cfg, base, w),
        Command::Sweep => sweep(cfg, base, w).map(|s| s.status),
    }
}

fn builtin_profile(cfg: &RunConfig, base: &Path) -> Result<String> {
    match cfg.input("profile", base)? {
        Input::Builtin(name) => Ok(name),
        Input::File(p) => Err(Error::Invalid(format!("`profile` must be a built-in radial profile, got {}", p.display()))),
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
struct CurvatureSummary {
    sup_wplus: f64,
    sup_wminus: f64,
    max_trace: f64,
    max_asymmetry: f64,
}

fn curvature(cfg: &RunConfig, base: &Path, w: &mut ArtifactWriter) -> Result<String> {
    let path = match cfg.input("metric", base)? {
        Input::File(p) => p,
        Input::Builtin(n) => return Err(Error::Invalid(format!("no built-in metric `{n}`"))),
    };
    let m = load_metric(&path)?;
    let order = if cfg.params.order == 4 { RiemannOrder::Fourth } else { RiemannOrder::Second };
    let weyl = weyl_decompose(&riemann_with_order(&m, christoffel(&m)?, order)?, &m)?;
    let (wp, wm) = (wplus_project(&weyl, &m)?, wminus_project(&weyl, &m)?);
    let columns: Vec<Column> = vec![
        col("node", "index", "node-major grid index"),
        col("x0", "chart", "coordinate 0"),
        col("x1", "chart", "coordinate 1"),
        col("x2", "chart", "coordinate 2"),
        col("x3", "chart", "coordinate 3"),
        col("wplus_norm", "curvature", "Frobenius norm of the Λ⁺ Weyl block in an oriented orthonormal frame"),
        col("wminus_norm", "curvature", "Frobenius norm of the Λ⁻ Weyl block"),
        col("w11", "curvature", "Λ⁺ block entry (1,1)"),
        col("w22", "curvature", "Λ⁺ block entry (2,2)"),
        col("w12", "curvature", "Λ⁺ block entry (1,2)"),
        col("w13", "curvature", "Λ⁺ block entry (1,3)"),
        col("w23", "curvature", "Λ⁺ block entry (2,3)"),
    ];
    let rows: Vec<Vec<String>> = (0..m.grid.len())
        .map(|node| {
            let x = m.grid.coords(m.grid.multi(node));
            let mut r = vec![node.to_string()];
            r.extend(x.iter().map(|v| cell(*v)));
            r.push(cell(wp.blocks[node].norm()));
            r.push(cell(wm.blocks[node].norm()));
            r.extend(wp.components(node).iter().map(|v| cell(*v)));
            r
        })
        .collect();
    w.table("wplus", &columns, &rows)?;
    let summary = CurvatureSummary {
        sup_wplus: wp.sup_norm(),
        sup_wminus: wm.sup_norm(),
        max_trace: wp.max_trace(),
        max_asymmetry: wp.max_asymmetry(),
    };
    w.json("curvature_summary", &summary)?;
    if cfg.params.conformal_factors > 0 {
        let nodes = interior_nodes(&m.grid, 2);
        let factors = random_factors(&m.grid, cfg.params.conformal_factors, 0.3, cfg.params.seed);
        let devs: Vec<f64> =
            factors.par_iter().map(|f| conformal_deviation(&m, f, order, &nodes)).collect::<Result<_>>()?;
        let rows: Vec<Vec<String>> = devs.iter().enumerate().map(|(i, d)| vec![i.to_string(), cell(*d)]).collect();
        w.table(
            "conformal",
            &[
                col("factor", "index", "seeded random conformal factor"),
                col("relative_deviation", "dimensionless", "sup ‖Ŵ⁺ − W⁺‖ / sup ‖W⁺‖ of E²-normalized blocks"),
            ],
            &rows,
        )?;
    }
    Ok(format!("sup ‖W⁺‖ = {:e}", summary.sup_wplus))
}

#[derive(Debug, Clone, Serialize)]
struct WeightsSummary {
    operator: String,
    exceptional_weights: Vec<f64>,
    delta0: Option<f64>,
}

fn spectrum(cfg: &RunConfig, w: &mut ArtifactWriter) -> Result<String> {
    let op = model_from_name(&cfg.params.model)?;
    let s = indicial_spectrum(&op, cfg.params.strip)?;
    let rows: Vec<Vec<String>> = s
        .entries
        .iter()
        .map(|e| {
            let chains: Vec<String> = e.chains.iter().map(|c| c.to_string()).collect();
            vec![cell(e.re), cell(e.im), e.d.to_string(), chains.join(";")]
        })
        .collect();
    w.table(
        "spectrum",
        &[
            col("re", "1/t", "Re λ of the indicial root (oscillation)"),
            col("im", "1/t", "Im λ; the exceptional weight"),
            col("d", "count", "independent solutions e^{iλt} Σ u_n tⁿ"),
            col("chains", "lengths", "Jordan chain lengths, ';'-separated"),
        ],
        &rows,
    )?;
    w.json("spectrum", &s)?;
    let weights = exceptional_weights(&s);
    w.json("weights", &WeightsSummary { operator: s.operator.clone(), exceptional_weights: weights.clone(), delta0: delta0(&s).ok() })?;
    Ok(format!("{} exceptional weights", weights.len()))
}

fn index(cfg: &RunConfig, w: &mut ArtifactWriter) -> Result<String> {
    let op = model_from_name(&cfg.params.model)?;
    let domain = Domain::FullLine { half_length: cfg.params.length };
    let rows: Vec<Vec<String>> = cfg
        .deltas()
        .par_iter()
        .map(|&d| match model_index(&op, &WeightSpec::l2(d, WeightProfile::Uniform), domain, cfg.params.step) {
            Ok(r) => vec![cell(d), r.dim_ker.to_string(), r.dim_coker.to_string(), r.index.to_string(), "ok".into()],
            Err(e) => vec![cell(d), String::new(), String::new(), String::new(), e.to_string()],
        })
        .collect();
    let ok = rows.iter().filter(|r| r[4] == "ok").count();
    w.table(
        "index",
        &[
            col("delta", "1/t", "uniform weight e^{δt}"),
            col("dim_ker", "count", "weighted kernel dimension"),
            col("dim_coker", "count", "weighted cokernel dimension"),
            col("index", "count", "dim_ker − dim_coker"),
            col("status", "text", "ok or the failure for this row"),
        ],
        &rows,
    )?;
    if ok == 0 {
        return Err(Error::Inconclusive("every index row failed".into()));
    }
    Ok(format!("{ok}/{} rows", rows.len()))
}

struct Cyl {
    t_range: (f64, f64),
    samples: usize,
    orientation: i8,
}

impl ProfileVisitor for Cyl {
    type Output = CEProfile;
    fn visit<P: RadialProfile + Clone + 'static>(self, p: P) -> Result<CEProfile> {
        cylindrify(p, 1.0, self.t_range.0, self.t_range.1, self.samples, self.orientation)
    }
}

fn cylindrify_cmd(cfg: &RunConfig, base: &Path, w: &mut ArtifactWriter) -> Result<String> {
    let name = builtin_profile(cfg, base)?;
    let p = &cfg.params;
    let ce = with_profile(&name, Cyl { t_range: p.t_range, samples: p.samples, orientation: p.orientation })?;
    w.raw("ce_profile.json", &(ce.to_json()? + "\n"))?;
    w.table(
        "decay",
        &[
            col("eta", "1/t", "fitted decay rate of |g − g_cyl|"),
            col("decay_constant", "dimensionless", "fitted prefactor"),
        ],
        &[vec![cell(ce.eta), cell(ce.decay_constant)]],
    )?;
    Ok(format!("η = {:.4}", ce.eta))
}

fn residual_columns() -> Vec<Column> {
    vec![
        col("l", "t", "half neck length"),
        col("delta", "1/t", "neck weight rate"),
        col("sup", "curvature", "sup of the pointwise W norm of g(l)"),
        col("unweighted", "curvature", "L² norm of W[g(l)] with the Riemannian volume"),
        col("weighted", "curvature", "L² norm of w(l)·W[g(l)]"),
    ]
}

fn glue(cfg: &RunConfig, base: &Path, w: &mut ArtifactWriter) -> Result<String> {
    let delta = cfg.deltas()[0];
    let spec = cfg.glue_spec(base, delta)?;
    let ls = cfg.ls();
    let glued = spec.at(ls[0])?;
    w.raw("glued_profile.json", &(glued.metric.to_json()? + "\n"))?;
    let rows: Vec<Vec<String>> = ls
        .par_iter()
        .map(|&l| residual_row(&spec, l))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .map(|r| vec![cell(r.l), cell(r.delta), cell(r.sup), cell(r.unweighted), cell(r.weighted)])
        .collect();
    w.table("residual", &residual_columns(), &rows)?;
    Ok(format!("glued flag {}", glued.flag))
}

struct Probe {
    levels: usize,
    p: f64,
    delta: Option<f64>,
}

impl ProfileVisitor for Probe {
    type Output = NormRatioReport;
    fn visit<P: RadialProfile + Clone + 'static>(self, prof: P) -> Result<NormRatioReport> {
        norm_equivalence_probe(prof, &shrinking_family(self.levels), self.p, self.delta)
    }
}

fn probe(cfg: &RunConfig, base: &Path, w: &mut ArtifactWriter) -> Result<String> {
    let name = builtin_profile(cfg, base)?;
    let delta = cfg.params.delta.as_ref().map(|d| d.values()[0]);
    let r = with_profile(&name, Probe { levels: cfg.params.levels, p: cfg.params.p, delta })?;
    let rows: Vec<Vec<String>> = r.ratios.iter().map(|(s, v)| vec![cell(*s), cell(*v)]).collect();
    w.table(
        "norm_ratio",
        &[
            col("scale", "r", "support scale ε of the test section"),
            col("ratio", "dimensionless", "compact L^p norm / weighted cylinder L^p_δ norm"),
        ],
        &rows,
    )?;
    w.json("norm_ratio_summary", &r)?;
    Ok(format!("max/min = {:.4}", r.spread()))
}

/// Bases are only built when some l actually needs a Newton solve.
struct LazyBases<'a> {
    spec: &'a GlueSpec,
    cell: OnceLock<std::result::Result<KernelBases, String>>,
}

impl<'a> LazyBases<'a> {
    fn new(spec: &'a GlueSpec) -> Self {
        Self { spec, cell: OnceLock::new() }
    }

    fn get(&self) -> Result<&KernelBases> {
        self.cell
            .get_or_init(|| kernel_bases(self.spec).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::Hypothesis(e.clone()))
    }
}

#[derive(Debug, Clone, Serialize)]
struct SolveRow {
    l: f64,
    state: SolverState,
    correction_weighted: f64,
    quadratic_tail: bool,
    chart_floor: f64,
    chart_corrected: f64,
    chart_verified: bool,
}

fn solve_one(spec: &GlueSpec, bases: &LazyBases, opts: &SolverOptions, l: f64) -> Result<SolveRow> {
    let cfg = spec.at(l)?;
    let strip = cfg.strip()?;
    let start = SolverState::at(&strip, ReducedPerturbation::zeros(cfg.n()));
    let state = if start.residual() < opts.stop { start } else { solve_asd(&cfg, bases.get()?, opts)? };
    let chart = chart_verification(&cfg, &state.h)?;
    Ok(SolveRow {
        l,
        correction_weighted: weighted_norm(&strip, &state.h),
        quadratic_tail: quadratic_tail(&state.iterates, 1e-12).quadratic,
        chart_floor: chart.floor,
        chart_corrected: chart.corrected,
        chart_verified: chart.verified,
        state,
    })
}

fn iteration_columns() -> Vec<Column> {
    vec![
        col("iter", "count", "Newton iterate (0 = initial configuration)"),
        col("step_norm", "weighted L2", "norm of the accepted correction step"),
        col("residual_W", "weighted L2", "trace-free W residual of g(l)(1+h)"),
        col("residual_gauge", "weighted L2", "gauge residual L*h"),
        col("damping", "dimensionless", "accepted step fraction"),
        col("positivity_margin", "dimensionless", "min over nodes of 1 + min_i h_i"),
    ]
}

fn solve(cfg: &RunConfig, base: &Path, w: &mut ArtifactWriter) -> Result<String> {
    let delta = cfg.deltas()[0];
    let spec = cfg.glue_spec(base, delta)?;
    let opts = SolverOptions { tol: cfg.params.tol, max_iter: cfg.params.max_iter, transversal: TransversalOptions::default(), ..SolverOptions::default() };
    let bases = LazyBases::new(&spec);
    let ls = cfg.ls();
    let results: Vec<Result<SolveRow>> = ls.par_iter().map(|&l| solve_one(&spec, &bases, &opts, l)).collect();
    let mut summary = Vec::new();
    let mut first_err = None;
    for (l, r) in ls.iter().zip(results) {
        match r {
            Ok(row) => {
                let it: Vec<Vec<String>> = row
                    .state
                    .iterates
                    .iter()
                    .map(|x| {
                        vec![
                            x.iter.to_string(),
                            cell(x.step_norm),
                            cell(x.residual_w),
                            cell(x.residual_gauge),
                            cell(x.damping),
                            cell(x.positivity_margin),
                        ]
                    })
                    .collect();
                w.table(&format!("iterations_l{l}"), &iteration_columns(), &it)?;
                summary.push(vec![
                    cell(*l),
                    cell(row.state.residual_w),
                    cell(row.state.residual_gauge),
                    cell(row.state.positivity_margin),
                    cell(row.correction_weighted),
                    row.quadratic_tail.to_string(),
                    cell(row.chart_floor),
                    cell(row.chart_corrected),
                    row.chart_verified.to_string(),
                    "ok".into(),
                ]);
            }
            Err(e) => {
                let mut r = vec![cell(*l)];
                r.extend(std::iter::repeat_n(String::new(), 8));
                r.push(e.to_string());
                summary.push(r);
                first_err.get_or_insert(e);
            }
        }
    }
    w.table(
        "solve",
        &[
            col("l", "t", "half neck length"),
            col("residual_W", "weighted L2", "final W residual"),
            col("residual_gauge", "weighted L2", "final gauge residual"),
            col("positivity_margin", "dimensionless", "final positivity margin"),
            col("correction_weighted", "weighted L2", "w(l)-weighted norm of the final correction h"),
            col("quadratic_tail", "bool", "≥ 3 iterates above 1e-12 with order ≥ 1.5"),
            col("chart_floor", "curvature", "chart discretization floor on g(l)"),
            col("chart_corrected", "curvature", "chart-pipeline sup ‖W‖ on g(l)(1+h)"),
            col("chart_verified", "bool", "corrected ≤ 2 × floor"),
            col("status", "text", "ok or the failure for this row"),
        ],
        &summary,
    )?;
    match first_err {
        Some(e) => Err(e),
        None => Ok(format!("{} solves converged", ls.len())),
    }
}

/// One sweep point; failures are recorded in `status`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub l: f64,
    pub delta: f64,
    pub residual_unweighted: Option<f64>,
    pub residual_weighted: Option<f64>,
    pub sigma_min_restricted: Option<f64>,
    pub sigma_min_unrestricted: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSlope {
    pub delta: f64,
    pub slope_unweighted: Option<f64>,
    pub slope_weighted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub slopes: Vec<SweepSlope>,
    pub status: String,
}

fn sweep_row(spec: &GlueSpec, bases: &LazyBases, l: f64) -> SweepRow {
    let mut row = SweepRow {
        l,
        delta: spec.delta,
        residual_unweighted: None,
        residual_weighted: None,
        sigma_min_restricted: None,
        sigma_min_unrestricted: None,
        status: "ok".into(),
    };
    let mut errs = Vec::new();
    match residual_row(spec, l) {
        Ok(r) => {
            row.residual_unweighted = Some(r.unweighted);
            row.residual_weighted = Some(r.weighted);
        }
        Err(e) => errs.push(format!("residual: {e}")),
    }
    match bases.get().and_then(|b| min_sv_row(spec, b, TransversalOptions::default(), l)) {
        Ok(s) => {
            row.sigma_min_restricted = Some(s.restricted);
            row.sigma_min_unrestricted = Some(s.unrestricted);
        }
        Err(e) => errs.push(format!("sigma_min: {e}")),
    }
    if !errs.is_empty() {
        row.status = errs.join("; ");
    }
    row
}

fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    (points.len() >= 2 && points.iter().all(|p| p.1 > RESIDUAL_FLOOR))
        .then(|| linear_fit(&points.iter().map(|&(l, r)| (l, r.ln())).collect::<Vec<_>>()).0)
}

/// Rows over the (δ, l) grid computed in the rayon pool; assembly is serial and ordered.
pub fn sweep_table(cfg: &RunConfig, base: &Path) -> Result<SweepReport> {
    let deltas = cfg.deltas();
    let ls = cfg.ls();
    let specs: Vec<GlueSpec> = deltas.iter().map(|&d| cfg.glue_spec(base, d)).collect::<Result<_>>()?;
    let lazies: Vec<LazyBases> = specs.iter().map(LazyBases::new).collect();
    let points: Vec<(usize, f64)> = (0..deltas.len()).flat_map(|i| ls.iter().map(move |&l| (i, l))).collect();
    let rows: Vec<SweepRow> = points.par_iter().map(|&(i, l)| sweep_row(&specs[i], &lazies[i], l)).collect();
    let slopes = deltas
        .iter()
        .map(|&d| {
            let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.delta == d).collect();
            let pts = |f: fn(&SweepRow) -> Option<f64>| -> Vec<(f64, f64)> {
                mine.iter().filter_map(|r| f(r).map(|v| (r.l, v))).collect()
            };
            SweepSlope {
                delta: d,
                slope_unweighted: fit_slope(&pts(|r| r.residual_unweighted)),
                slope_weighted: fit_slope(&pts(|r| r.residual_weighted)),
            }
        })
        .collect();
    let ok = rows.iter().filter(|r| r.status == "ok").count();
    let any = rows.iter().filter(|r| r.residual_weighted.is_some() || r.sigma_min_restricted.is_some()).count();
    let status = format!("{ok}/{} rows complete, {any} with data", rows.len());
    Ok(SweepReport { rows, slopes, status })
}

fn sweep(cfg: &RunConfig, base: &Path, w: &mut ArtifactWriter) -> Result<SweepReport> {
    let report = sweep_table(cfg, base)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                cell(r.l),
                cell(r.delta),
                opt_cell(r.residual_unweighted),
                opt_cell(r.residual_weighted),
                opt_cell(r.sigma_min_restricted),
                opt_cell(r.sigma_min_unrestricted),
                r.status.clone(),
            ]
        })
        .collect();
    w.table(
        "sweep",
        &[
            col("l", "t", "half neck length"),
            col("delta", "1/t", "neck weight rate"),
            col("residual_unweighted", "curvature", "L² norm of W[g(l)]"),
            col("residual_weighted", "curvature", "L² norm of w(l)·W[g(l)]"),
            col("sigma_min_restricted", "dimensionless", "smallest singular value of the scaled operator on U⊥(l)"),
            col("sigma_min_unrestricted", "dimensionless", "smallest singular value without constraints"),
            col("status", "text", "ok or the failures for this row"),
        ],
        &rows,
    )?;
    w.json("sweep_summary", &report.slopes)?;
    let all_failed = report.rows.iter().all(|r| r.residual_weighted.is_none() && r.sigma_min_restricted.is_none());
    if all_failed {
        return Err(Error::Inconclusive(format!("every sweep row failed: {}", report.rows[0].status)));
    }
    Ok(report)
}
