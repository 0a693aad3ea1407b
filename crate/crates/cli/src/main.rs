use std::path::PathBuf;
use std::process::ExitCode;

use anisoreach_cli::{load, run, CheckKind};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "anisoreach", version, about = "Anisotropic curvature measures and tube formulas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Duality and Gauss-map residuals of the declared norms.
    NormCheck(Common),
    /// Strata, volume and φ-perimeter of the declared shapes.
    ShapeInfo(Common),
    /// Global reach estimates with near-multiplicity witnesses.
    Reach(Common),
    /// Steiner predictions against voxel tube volumes.
    Tube(Common),
    /// Curvature measure totals.
    Measures(Common),
    /// Integral identities, inequalities and the bubble classifier.
    Verify(Common),
    /// Every configured check.
    RunAll(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment file (TOML, or JSON).
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Same as `--config`.
    #[arg(conflicts_with = "config")]
    path: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory, overriding `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, kinds): (Common, Option<Vec<CheckKind>>) = match cli.command {
        Command::NormCheck(c) => (c, Some(vec![CheckKind::NormCheck])),
        Command::ShapeInfo(c) => (c, Some(vec![CheckKind::ShapeInfo])),
        Command::Reach(c) => (c, Some(vec![CheckKind::Reach])),
        Command::Tube(c) => (c, Some(vec![CheckKind::Tube])),
        Command::Measures(c) => (c, Some(vec![CheckKind::Measures])),
        Command::Verify(c) => (c, Some(vec![CheckKind::Verify])),
        Command::RunAll(c) => (c, None),
    };
    let Some(path) = common.config.or(common.path) else {
        eprintln!("error: no experiment file given (use --config <path>)");
        return ExitCode::from(2);
    };
    let mut config = match load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = common.out {
        config.output_dir = out;
    }
    if let Some(n) = common.threads {
        if n == 1 {
            config.settings.execution = anisoreach::Execution::Sequential;
        } else if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: cannot size the thread pool: {e}");
        }
    }
    let summary = match run(&config, kinds.as_deref()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    for c in &summary.checks {
        let status = if c.ok { "ok  " } else { "FAIL" };
        let detail = c.error.clone().unwrap_or_else(|| c.summary.to_string());
        println!("{status} {:<10} {} (pass={}, expect={:?}): {detail}", c.kind, c.name, c.pass, c.expect);
    }
    println!("reports written to {}", config.output_dir.display());
    if summary.all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
