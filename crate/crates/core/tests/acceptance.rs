//! Acceptance criteria 1–10, one PASS/FAIL line each, plus supplementary runs.
//!
//! Criteria 7 and 9 fail in the reduced ansatz (see README). The binary exits
//! nonzero only when a criterion fails for a reason other than the recorded one.

use std::process::ExitCode;

use asd_glue::cohom_one::{
    cylindrify, hopf_chart, pipeline_discrepancy, weyl_block, Berger, CompactifiedEguchiHanson, EguchiHanson,
    FlatCone, FubiniStudy, HopfBox, Jet, ProfileFn, RadialProfile, RoundCylinder, RoundS4,
};
use asd_glue::cyl_spectral::{
    exceptional_weights, glued_model_additivity, indicial_spectrum, jump_count, model_index, norm_equivalence_probe,
    s3_scalar_discrete, shrinking_family, Domain, ModelOperator, WeightProfile, WeightSpec,
};
use asd_glue::frame_curvature::{
    christoffel, conformal_deviation, interior_nodes, random_factors, self_dual_parts_at, RiemannOrder,
};
use asd_glue::ift_solver::{
    chart_verification, linearized_invariance, quadratic_tail, solve_asd, weighted_norm, SolverOptions, SolverState,
    Strip,
};
use asd_glue::neck_glue::{kernel_bases, min_sv_probe, residual_report, Body, GlueGrid, GlueSpec, TransversalOptions};
use asd_glue::{Error, Result};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn radial_jet<P: RadialProfile>(p: &P, r: f64) -> Jet {
    let (a, da, dda) = p.b(r);
    let (q, dq) = p.q(r);
    Jet { q, dq, a, da, dda }
}

fn sup_block<P: ProfileFn>(p: &P, ts: impl Iterator<Item = f64>, s: f64) -> f64 {
    ts.map(|t| weyl_block(&p.jet(t), s).norm()).fold(0.0, f64::max)
}

fn c1() -> Result<Verdict> {
    let grid = |a: f64, b: f64| (0..=200).map(move |i| a + (b - a) * i as f64 / 200.0);
    let flat = sup_block(&FlatCone, grid(0.1, 3.0), 1.0).max(sup_block(&FlatCone, grid(0.1, 3.0), -1.0));
    let cyl = sup_block(&RoundCylinder, grid(-3.0, 3.0), 1.0).max(sup_block(&RoundCylinder, grid(-3.0, 3.0), -1.0));
    let eh = sup_block(&EguchiHanson::new(1.0, 6.0)?, grid(0.05, 3.0), -1.0);
    let s4 = |r: f64| radial_jet(&RoundS4, r);
    let err = |n: usize| -> Result<f64> {
        let b = HopfBox { t: (0.8, 2.0, n), theta: (0.9, 1.9, n), psi: (0.0, 0.0, 1) };
        let m = hopf_chart(&s4, &b, 1)?;
        let nodes = interior_nodes(&m.grid, 2);
        let parts = self_dual_parts_at(&m, &christoffel(&m)?, RiemannOrder::Second, &nodes)?;
        Ok(parts.iter().map(|p| p.0.norm()).fold(0.0, f64::max))
    };
    let (e1, e2, e3) = (err(33)?, err(65)?, err(129)?);
    let (o1, o2) = ((e1 / e2).log2(), (e2 / e3).log2());
    let closed = flat.max(cyl).max(eh);
    let pass = closed < 1e-8 && (o1 - 2.0).abs() <= 0.3 && (o2 - 2.0).abs() <= 0.3;
    verdict(
        pass,
        format!(
            "closed-form sup ‖W⁺‖: flat {flat:.1e}, cylinder {cyl:.1e}, EH {eh:.1e}; S⁴ chart {e1:.2e}/{e2:.2e}/{e3:.2e}, orders {o1:.2} {o2:.2}"
        ),
    )
}

fn c2() -> Result<Verdict> {
    let fs = |r: f64| radial_jet(&FubiniStudy { quotient_k: 1 }, r);
    let n = 25;
    let b = HopfBox { t: (0.6, 1.2, n), theta: (0.9, 1.9, n), psi: (0.0, 0.0, 1) };
    let m = hopf_chart(&fs, &b, -1)?;
    let nodes = interior_nodes(&m.grid, 2);
    let order = RiemannOrder::Second;
    let parts = self_dual_parts_at(&m, &christoffel(&m)?, order, &nodes)?;
    let mut gap: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (&node, (wp, _)) in nodes.iter().zip(&parts) {
        let exact = weyl_block(&fs(m.grid.coords(m.grid.multi(node))[0]), -1.0).norm();
        gap = gap.max((wp.norm() - exact).abs());
        scale = scale.max(exact);
    }
    let tol = gap / scale;
    let devs: Vec<f64> = random_factors(&m.grid, 5, 0.3, 2024)
        .iter()
        .map(|f| conformal_deviation(&m, f, order, &nodes))
        .collect::<Result<_>>()?;
    let worst = devs.iter().cloned().fold(0.0, f64::max);
    let t: Vec<f64> = (0..41).map(|i| 0.4 + 0.02 * i as f64).collect();
    let strip = Strip::new(t.clone(), t.iter().map(|&r| fs(r)).collect(), vec![1.0; 41], -1.0, (false, false))?;
    let phi = |t: f64| (0.2 * (2.0 * t).cos(), -0.4 * (2.0 * t).sin(), -0.8 * (2.0 * t).cos());
    let lin = linearized_invariance(&strip, phi, 5, 0.05, 2024)?;
    let bound = 10.0 * tol;
    let pass = worst < bound && lin.l_deviation < bound && lin.d_deviation < bound;
    verdict(
        pass,
        format!(
            "discretization tol {tol:.2e}; max W⁺ deviation over 5 factors {worst:.2e}; L {:.1e}, D {:.1e} (bound {bound:.2e})",
            lin.l_deviation, lin.d_deviation
        ),
    )
}

fn c3() -> Result<Verdict> {
    let p = Berger { a3: 0.3 };
    let err = |n: usize| {
        let b = HopfBox { t: (0.0, 0.0, 1), theta: (0.8, 2.0, n), psi: (0.0, 0.0, 1) };
        pipeline_discrepancy(&p, &b, RiemannOrder::Second)
    };
    let (e1, e2, e3) = (err(33)?, err(65)?, err(129)?);
    let (o1, o2) = ((e1 / e2).log2(), (e2 / e3).log2());
    verdict(
        (o1 - 2.0).abs() <= 0.3 && (o2 - 2.0).abs() <= 0.3,
        format!("Berger a3 = 0.3: max frame-Riemann gap {e1:.2e}/{e2:.2e}/{e3:.2e}, orders {o1:.2} {o2:.2}"),
    )
}

fn c4() -> Result<Verdict> {
    let s4 = cylindrify(RoundS4, 1.0, 0.0, 12.0, 241, 1)?;
    let eh = cylindrify(CompactifiedEguchiHanson { a: 1.0 }, 1.0, 0.0, 12.0, 241, -1)?;
    verdict(
        (s4.eta - 2.0).abs() <= 0.05 && (eh.eta - 2.0).abs() <= 0.05,
        format!("η(S⁴) = {:.4}, η(compactified EH) = {:.4}", s4.eta, eh.eta),
    )
}

fn c5() -> Result<Verdict> {
    let exact = indicial_spectrum(&ModelOperator::s3_scalar_exact(3), (-3.0, 3.0))?;
    let disc = indicial_spectrum(&s3_scalar_discrete(600, 3.0, 1.0)?, (-3.0, 3.0))?;
    let (we, wd) = (exceptional_weights(&exact), exceptional_weights(&disc));
    let want = [-(8f64.sqrt()), -(3f64.sqrt()), 0.0, 3f64.sqrt(), 8f64.sqrt()];
    let err = if wd.len() == want.len() {
        wd.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let zero = exact.entries.iter().find(|e| e.im == 0.0 && e.re == 0.0);
    let chain_ok = zero.is_some_and(|z| z.d == 2 && z.chains == vec![2]);
    let n1 = jump_count(&exact, -0.5, 0.5)?;
    let n2 = jump_count(&exact, 0.1, 1.7)?;
    let pass = we.len() == 5 && err < 1e-3 && chain_ok && n1 == 2 && n2 == 0;
    verdict(
        pass,
        format!("discrete weights max err {err:.1e}; d(0), chains = {:?}; n(−0.5,0.5) = {n1}, n(0.1,1.7) = {n2}", zero.map(|z| (z.d, z.chains.clone()))),
    )
}

fn c6() -> Result<Verdict> {
    let s3 = ModelOperator::s3_scalar_exact(2);
    let asd = ModelOperator::reduced_asd(1.0);
    let full = Domain::FullLine { half_length: 14.0 };
    let uni = model_index(&s3, &WeightSpec::l2(1.0, WeightProfile::Uniform), full, 0.1)?;
    let uni2 = model_index(&asd, &WeightSpec::l2(1.0, WeightProfile::Uniform), full, 0.1)?;
    let dec = model_index(&s3, &WeightSpec::l2(1.0, WeightProfile::SymmetricDecaying), full, 0.1)?;
    let gro = model_index(&s3, &WeightSpec::l2(1.0, WeightProfile::SymmetricGrowing), full, 0.1)?;
    let jump = |op: &ModelOperator, d: f64, dp: f64, len: f64| -> Result<(i64, usize)> {
        let half = Domain::HalfLine { length: len, dirichlet: true };
        let a = model_index(op, &WeightSpec::l2(d, WeightProfile::Uniform), half, 0.1)?;
        let b = model_index(op, &WeightSpec::l2(dp, WeightProfile::Uniform), half, 0.1)?;
        let n = jump_count(&indicial_spectrum(op, (d.min(dp) - 1.0, d.max(dp) + 1.0))?, d, dp)?;
        Ok((a.index - b.index, n))
    };
    let j1 = jump(&s3, -0.5, 0.5, 40.0)?;
    let j2 = jump(&asd, -3.0, -1.0, 24.0)?;
    let mut add = Vec::new();
    for (op, d) in [(asd.clone(), 1.0), (ModelOperator::reduced_asd(-1.0), 1.0), (ModelOperator::s3_scalar_exact(1), 1.0)] {
        add.push(glued_model_additivity(&op, d, 12.0, 0.1)?.residual);
    }
    let pass = uni.index == 0
        && uni2.index == 0
        && gro.index == -dec.index
        && j1.0 == j1.1 as i64
        && j2.0 == j2.1 as i64
        && add.iter().all(|&r| r == 0);
    verdict(
        pass,
        format!(
            "uniform index {}/{}; symmetric ±: {}/{}; jumps (ind diff, n) {:?} {:?}; additivity residuals {:?}",
            uni.index, uni2.index, dec.index, gro.index, j1, j2, add
        ),
    )
}

const LS: [f64; 5] = [4.0, 5.0, 6.0, 7.0, 8.0];
const DELTAS: [f64; 3] = [1.0 / 3.0, 0.5, 2.0 / 3.0];

fn slopes_within(spec_of: impl Fn(f64) -> Result<GlueSpec>) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for d in DELTAS {
        let r = residual_report(&spec_of(d)?, &LS)?;
        match (r.slope_unweighted, r.slope_weighted) {
            (Some(u), Some(w)) => {
                let want = -(2.0 - d);
                ok &= ((u + 2.0) / 2.0).abs() <= 0.1 && ((w - want) / want).abs() <= 0.1;
                parts.push(format!("δ={d:.3}: {u:.3}/{w:.3}"));
            }
            _ => {
                ok = false;
                let sup = r.rows.iter().map(|x| x.sup).fold(0.0, f64::max);
                parts.push(format!("δ={d:.3}: unmeasurable (sup ‖W⁺[g(l)]‖ = {sup:.1e})"));
            }
        }
    }
    Ok((ok, parts.join(", ")))
}

fn spec(b1: &Body, b2: &Body, delta: f64) -> GlueSpec {
    GlueSpec { body1: b1.clone(), body2: b2.clone(), delta, grid: GlueGrid::default() }
}

fn c7() -> Result<Verdict> {
    let s4 = Body::round_s4()?;
    let (pass, detail) = slopes_within(|d| Ok(spec(&s4, &s4, d)))?;
    verdict(pass, format!("S⁴♯S⁴ slopes unweighted/weighted: {detail}"))
}

fn c7_supplementary() -> Result<Verdict> {
    let (s4, fs) = (Body::round_s4()?, Body::fubini_study()?);
    let (pass, detail) = slopes_within(|d| Ok(spec(&s4, &fs, d)))?;
    verdict(pass, format!("S⁴♯CP² slopes unweighted/weighted: {detail}"))
}

fn c8() -> Result<Verdict> {
    let s = spec(&Body::round_s4()?, &Body::fubini_study()?, 2.0 / 3.0);
    let h0 = kernel_bases(&s)?.h0.len();
    let rows = min_sv_probe(&s, TransversalOptions::default(), &[4.0, 8.0, 16.0])?;
    let r: Vec<f64> = rows.iter().map(|x| x.restricted).collect();
    let u: Vec<f64> = rows.iter().map(|x| x.unrestricted).collect();
    let spread = r.iter().cloned().fold(0.0, f64::max) / r.iter().cloned().fold(f64::INFINITY, f64::min);
    let monotone = u.windows(2).all(|w| w[1] < w[0]);
    let drop = u[0] / u[2];
    verdict(
        h0 > 0 && spread < 2.0 && monotone && drop > 5.0,
        format!(
            "S⁴♯CP², l = 4/8/16, dim H₀ = {h0}: restricted {:.3}/{:.3}/{:.3} (max/min {spread:.2}); unrestricted {:.2e}/{:.2e}/{:.2e} (drop {drop:.0}×)",
            r[0], r[1], r[2], u[0], u[1], u[2]
        ),
    )
}

struct NewtonRun {
    pass: bool,
    /// Everything except the quadratic-tail requirement holds.
    rest: bool,
    detail: String,
}

fn newton_run(s: &GlueSpec, eta: f64) -> Result<NewtonRun> {
    let opts = SolverOptions::default();
    let mut bases = None;
    let mut rest = true;
    let mut quadratic = true;
    let mut norms = Vec::new();
    let mut tails = Vec::new();
    let mut charts = Vec::new();
    let mut worst = (0.0f64, 0.0f64, f64::INFINITY);
    for l in [5.0, 6.0, 7.0, 8.0] {
        let cfg = s.at(l)?;
        let strip = cfg.strip()?;
        let start = SolverState::at(&strip, asd_glue::ift_solver::ReducedPerturbation::zeros(cfg.n()));
        let st = if start.residual() < opts.stop {
            start
        } else {
            if bases.is_none() {
                bases = Some(kernel_bases(s)?);
            }
            solve_asd(&cfg, bases.as_ref().unwrap(), &opts)?
        };
        worst = (worst.0.max(st.residual_w), worst.1.max(st.residual_gauge), worst.2.min(st.positivity_margin));
        norms.push((l, weighted_norm(&strip, &st.h)));
        let tail = quadratic_tail(&st.iterates, 1e-12);
        tails.push(tail.above_floor);
        quadratic &= tail.quadratic;
        let chart = chart_verification(&cfg, &st.h)?;
        charts.push(chart.verified);
        rest &= chart.verified;
    }
    rest &= worst.0 <= 1e-9 && worst.1 <= 1e-9 && worst.2 > 0.0;
    let want = -(eta - s.delta);
    let measured = if norms.iter().all(|n| n.1 > 0.0) {
        Some(slope(&norms.iter().map(|&(l, n)| (l, n.ln())).collect::<Vec<_>>()))
    } else {
        None
    };
    rest &= measured.is_some_and(|m| ((m - want) / want).abs() <= 0.15);
    let detail = format!(
        "residual_W ≤ {:.1e}, gauge ≤ {:.1e}, margin ≥ {:.3}; iterates above floor {tails:?}; correction slope {} vs {want:.3}; chart verified {charts:?}",
        worst.0,
        worst.1,
        worst.2,
        measured.map_or("undefined (h = 0)".into(), |m| format!("{m:.3}"))
    );
    Ok(NewtonRun { pass: rest && quadratic, rest, detail })
}

fn c9() -> Result<Verdict> {
    let s4 = Body::round_s4()?;
    let a = newton_run(&spec(&s4, &s4, 2.0 / 3.0), s4.eta)?;
    let eh = Body::compactified_eguchi_hanson(1.0)?;
    let b = match newton_run(&spec(&eh, &eh, 2.0 / 3.0), eh.eta) {
        Ok(r) => r,
        Err(e @ Error::Orientation(_)) => NewtonRun { pass: false, rest: false, detail: e.to_string() },
        Err(e) => return Err(e),
    };
    verdict(a.pass && b.pass, format!("S⁴♯S⁴: {}; EH♯EH: {}", a.detail, b.detail))
}

fn c9_supplementary() -> Result<Verdict> {
    let (s4, fs) = (Body::round_s4()?, Body::fubini_study()?);
    let r = newton_run(&spec(&s4, &fs, 2.0 / 3.0), fs.eta)?;
    let note = if r.rest && !r.pass { "; quadratic tail unmeasurable" } else { "" };
    verdict(r.pass, format!("S⁴♯CP²: {}{note}", r.detail))
}

fn c10() -> Result<Verdict> {
    let fam = shrinking_family(6);
    let good = norm_equivalence_probe(RoundS4, &fam, 3.0, Some(2.0 / 3.0))?;
    let ctrl = norm_equivalence_probe(RoundS4, &fam, 3.0, Some(1.5))?;
    let steps: Vec<f64> = ctrl.ratios.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let geometric = steps.iter().all(|&s| !(1.0 / 1.5..=1.5).contains(&s))
        && steps.windows(2).all(|w| (w[1] / w[0] - 1.0).abs() < 0.05);
    verdict(
        good.spread() < 1.1 && geometric && ctrl.spread() > 10.0,
        format!(
            "δ = 2/3: max/min {:.4}; control δ = 1.5: max/min {:.1}, per-level factor {:.3}–{:.3}",
            good.spread(),
            ctrl.spread(),
            steps.iter().cloned().fold(f64::INFINITY, f64::min),
            steps.iter().cloned().fold(0.0, f64::max)
        ),
    )
}

/// Criteria whose failure is expected, with a check that the failure has the recorded cause.
fn expected_failure(id: &str, detail: &str) -> bool {
    match id {
        "7" => detail.matches("unmeasurable").count() == DELTAS.len(),
        "9" => detail.contains("orientation clash") && detail.contains("undefined (h = 0)"),
        "9s" => detail.ends_with("quadratic tail unmeasurable"),
        _ => false,
    }
}

fn main() -> ExitCode {
    type Check = fn() -> Result<Verdict>;
    let criteria: Vec<(&str, &str, Check)> = vec![
        ("1", "vanishing suite", c1),
        ("2", "conformal invariance", c2),
        ("3", "two-pipeline agreement", c3),
        ("4", "cylindrification decay", c4),
        ("5", "indicial spectrum", c5),
        ("6", "index identities", c6),
        ("7", "residual decay (S⁴ pair)", c7),
        ("7s", "residual decay, supplementary S⁴♯CP²", c7_supplementary),
        ("8", "main-estimate probe", c8),
        ("9", "Newton solve (S⁴♯S⁴, EH♯EH)", c9),
        ("9s", "Newton solve, supplementary S⁴♯CP²", c9_supplementary),
        ("10", "norm-equivalence probe", c10),
    ];
    let mut unexpected = 0;
    for (id, name, f) in criteria {
        let start = std::time::Instant::now();
        let (pass, detail) = match f() {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let tag = if pass { "PASS" } else { "FAIL" };
        let note = match (pass, expected_failure(id, &detail)) {
            (false, true) if id == "9s" => " [expected: Newton reaches round-off within two steps]",
            (false, true) => " [expected: not representable in the reduced ansatz]",
            _ => "",
        };
        if !pass && note.is_empty() {
            unexpected += 1;
        }
        println!("criterion {id:>2} {tag}: {name} ({:.1}s){note}\n    {detail}", start.elapsed().as_secs_f64());
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
