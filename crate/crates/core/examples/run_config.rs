//! Driving a sweep from a TOML configuration, as the CLI does.

use asd_glue::cli_reports::{run, RunConfig};

const CONFIG: &str = r#"
command = "sweep"

[inputs]
body1 = "builtin:round-s4"
body2 = "builtin:fubini-study"

[params]
p = 3.0
l = [4, 5, 6, 7, 8]
"#;

fn main() -> asd_glue::Result<()> {
    let cfg = RunConfig::from_toml(CONFIG)?;
    let out = std::env::temp_dir().join("asd-glue-sweep");
    let o = run(&cfg, std::path::Path::new("."), &out)?;
    println!("exit {} ({}), artifacts in {}", o.exit_code, o.status, out.display());
    print!("{}", std::fs::read_to_string(out.join("sweep.csv"))?);
    Ok(())
}
