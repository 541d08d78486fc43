use std::path::PathBuf;
use std::process::ExitCode;

use asd_glue::cli_reports::{exit_code, run, Command, RunConfig, EXIT_FAILURE, EXIT_VALIDATION};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "asd-glue", version, about = "Gluing anti-self-dual conformal structures along cylindrical necks")]
struct Cli {
    #[command(subcommand)]
    command: Option<Sub>,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweep rows (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Overrides params.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    Curvature,
    Spectrum,
    Index,
    Cylindrify,
    Glue,
    Probe,
    Solve,
    Sweep,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Curvature => Command::Curvature,
            Sub::Spectrum => Command::Spectrum,
            Sub::Index => Command::Index,
            Sub::Cylindrify => Command::Cylindrify,
            Sub::Glue => Command::Glue,
            Sub::Probe => Command::Probe,
            Sub::Solve => Command::Solve,
            Sub::Sweep => Command::Sweep,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(path) = cli.config.as_ref() else {
        eprintln!("error: --config is required");
        return ExitCode::from(EXIT_VALIDATION as u8);
    };
    let mut cfg = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    if let Some(sub) = cli.command {
        let want = Command::from(sub);
        if want != cfg.command {
            eprintln!("error: subcommand {} does not match config command {}", want.name(), cfg.command.name());
            return ExitCode::from(EXIT_VALIDATION as u8);
        }
    }
    if let Some(s) = cli.seed {
        cfg.params.seed = s;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE as u8);
        }
    };
    let base = path.parent().map(|p| p.to_path_buf()).unwrap_or_default();
    match pool.install(|| run(&cfg, &base, &cli.out)) {
        Ok(o) => {
            println!("{}: {} ({} artifacts in {})", cfg.command.name(), o.status, o.artifacts.len(), cli.out.display());
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
