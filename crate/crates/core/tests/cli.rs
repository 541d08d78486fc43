use std::path::Path;

use asd_glue::cli_reports::{run, RunConfig, EXIT_OK, EXIT_VALIDATION};
use asd_glue::Error;

fn cfg(s: &str) -> RunConfig {
    RunConfig::from_toml(s).unwrap()
}

const SWEEP: &str = r#"
command = "sweep"
[inputs]
body1 = "builtin:round-s4"
body2 = "builtin:fubini-study"
[params]
l = [4, 5, 6, 7]
delta = [0.5, 0.6666666666666666]
"#;

#[test]
fn sweep_is_byte_identical_across_runs_and_thread_counts() {
    let d = tempfile::tempdir().unwrap();
    let c = cfg(SWEEP);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let a = one.install(|| run(&c, Path::new("."), &d.path().join("a"))).unwrap();
    let b = run(&c, Path::new("."), &d.path().join("b")).unwrap();
    assert_eq!((a.exit_code, b.exit_code), (EXIT_OK, EXIT_OK));
    for f in ["sweep.csv", "sweep.schema.json", "sweep_summary.json"] {
        let x = std::fs::read(d.path().join("a").join(f)).unwrap();
        let y = std::fs::read(d.path().join("b").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
    let body = std::fs::read_to_string(d.path().join("a/sweep.csv")).unwrap();
    assert!(body.starts_with(
        "l,delta,residual_unweighted,residual_weighted,sigma_min_restricted,sigma_min_unrestricted,status\n"
    ));
    assert_eq!(body.lines().count(), 9);
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["params"]["p"], 3.0);
    assert_eq!(m["inputs_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn invalid_config_writes_nothing() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("out");
    let c = cfg("command = \"glue\"\n[inputs]\nbody1 = \"builtin:round-s4\"\nbody2 = \"builtin:round-s4\"\n[params]\nl = 1\n");
    let e = run(&c, Path::new("."), &out).unwrap_err();
    assert_eq!(asd_glue::cli_reports::exit_code(&e), EXIT_VALIDATION);
    assert!(!out.exists());
}

#[test]
fn half_cylinders_solve_with_zero_correction() {
    let d = tempfile::tempdir().unwrap();
    let c = cfg("command = \"solve\"\n[inputs]\nbody1 = \"builtin:half-cylinder\"\nbody2 = \"builtin:half-cylinder\"\n[params]\nl = 5\ndelta = 0.5\n");
    let o = run(&c, Path::new("."), d.path()).unwrap();
    assert_eq!(o.exit_code, EXIT_OK);
    let it = std::fs::read_to_string(d.path().join("iterations_l5.csv")).unwrap();
    assert_eq!(it, "iter,step_norm,residual_W,residual_gauge,damping,positivity_margin\n0,0e0,0e0,0e0,0e0,1e0\n");
}

#[test]
fn spectrum_lists_s3_weights() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&cfg("command = \"spectrum\"\n"), Path::new("."), d.path()).unwrap();
    assert_eq!(o.exit_code, EXIT_OK);
    let w: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("weights.json")).unwrap()).unwrap();
    let got: Vec<f64> = w["exceptional_weights"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let want = [-(8f64.sqrt()), -(3f64.sqrt()), 0.0, 3f64.sqrt(), 8f64.sqrt()];
    assert_eq!(got.len(), 5);
    assert!(got.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-9));
}

#[test]
fn orientation_clash_is_a_validation_exit() {
    let d = tempfile::tempdir().unwrap();
    let c = cfg("command = \"glue\"\n[inputs]\nbody1 = \"builtin:eguchi-hanson\"\nbody2 = \"builtin:eguchi-hanson\"\n");
    let o = run(&c, Path::new("."), d.path()).unwrap();
    assert_eq!(o.exit_code, EXIT_VALIDATION);
    let m = std::fs::read_to_string(d.path().join("manifest.json")).unwrap();
    assert!(m.contains("\"exit_code\": 2"));
}

#[test]
fn stored_profile_is_a_file_input() {
    let d = tempfile::tempdir().unwrap();
    let c = cfg("command = \"cylindrify\"\n[inputs]\nprofile = \"builtin:round-s4\"\n[params]\nt_range = [-1.0, 12.0]\nsamples = 261\n");
    assert_eq!(run(&c, Path::new("."), &d.path().join("cyl")).unwrap().exit_code, EXIT_OK);
    std::fs::copy(d.path().join("cyl/ce_profile.json"), d.path().join("s4.json")).unwrap();
    let g = cfg("command = \"glue\"\n[inputs]\nbody1 = \"s4.json\"\nbody2 = \"builtin:fubini-study\"\n");
    let o = run(&g, d.path(), &d.path().join("glue")).unwrap();
    assert_eq!(o.exit_code, EXIT_OK, "{}", o.status);
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("glue/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["inputs"]["body1"]["sha256"].as_str().unwrap().len(), 64);
    assert!(matches!(RunConfig::from_toml("command = 3"), Err(Error::Format(_))));
}

#[test]
fn curvature_reads_a_metric_file_and_reports_invariance() {
    use asd_glue::cohom_one::{hopf_chart, FubiniStudy, HopfBox, Jet, RadialProfile};
    let d = tempfile::tempdir().unwrap();
    let fs = |r: f64| {
        let (a, da, dda) = FubiniStudy { quotient_k: 1 }.b(r);
        Jet { q: 1.0, dq: 0.0, a, da, dda }
    };
    let b = HopfBox { t: (0.6, 1.2, 13), theta: (0.9, 1.9, 13), psi: (0.0, 0.0, 1) };
    asd_glue::frame_curvature::io::save_metric(&d.path().join("fs.grid"), &hopf_chart(&fs, &b, -1).unwrap()).unwrap();
    let c = cfg("command = \"curvature\"\n[inputs]\nmetric = \"fs.grid\"\n[params]\nconformal_factors = 2\nseed = 5\n");
    let o = run(&c, d.path(), &d.path().join("out")).unwrap();
    assert_eq!(o.exit_code, EXIT_OK, "{}", o.status);
    let conf = std::fs::read_to_string(d.path().join("out/conformal.csv")).unwrap();
    assert_eq!(conf.lines().count(), 3);
    let rows = std::fs::read_to_string(d.path().join("out/wplus.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 13 * 13);
}
