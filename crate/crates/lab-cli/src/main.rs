//! `lab`: runs experiment manifests and renders their artifacts.
//!
//! Exit status: 0 when everything passed (or there was nothing to do),
//! 1 for computation failures or failed certificates, 2 for validation
//! errors in a manifest, config block, or index file.

mod experiments;
mod manifest;
mod render;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use experiments::{run_manifest, RunError};
use manifest::Manifest;

#[derive(Parser)]
#[command(name = "lab", version, about = "drift-diffusion experiment runner")]
struct Cli {
    /// Worker threads; the LAB_THREADS environment variable takes precedence
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a manifest and write its artifacts plus an index file
    Run {
        /// Path to a JSON manifest describing one experiment kind
        manifest: PathBuf,
        /// Override the manifest seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the manifest output directory
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Render SVG plots for every plottable artifact in an index file
    Render {
        /// Path to an index.json produced by `lab run`
        index: PathBuf,
        /// Directory for the plots (default: next to the index)
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn configure_threads(flag: Option<usize>) -> Result<(), RunError> {
    let from_env = match std::env::var("LAB_THREADS") {
        Ok(s) => Some(
            s.parse::<usize>()
                .map_err(|_| RunError::Validation(format!("LAB_THREADS: `{s}` is not a thread count")))?,
        ),
        Err(_) => None,
    };
    let Some(n) = from_env.or(flag) else {
        return Ok(());
    };
    if n == 0 {
        return Err(RunError::Validation("thread count must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| RunError::Computation(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<ExitCode, RunError> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Run {
            manifest,
            seed,
            out_dir,
        } => {
            let text = std::fs::read_to_string(&manifest).map_err(|e| {
                RunError::Validation(format!("manifest {}: {e}", manifest.display()))
            })?;
            let parsed: Manifest = serde_json::from_str(&text)
                .map_err(|e| RunError::Validation(format!("manifest: {e}")))?;
            let (index, out) = run_manifest(&parsed, seed, out_dir)?;
            for a in &index.artifacts {
                let status = if a.pass { "pass" } else { "FAIL" };
                println!("[{status}] {} {} -> {}", a.kind, a.label, a.path);
            }
            println!("index: {}", out.join("index.json").display());
            if index.pass_all {
                Ok(ExitCode::SUCCESS)
            } else {
                let failed = index.artifacts.iter().filter(|a| !a.pass).count();
                eprintln!("{failed} artifact(s) failed");
                Ok(ExitCode::from(1))
            }
        }
        Command::Render { index, out_dir } => {
            let summary = render::render_index(&index, out_dir)?;
            for p in &summary.plots {
                println!("plot: {p}");
            }
            for s in &summary.skipped {
                println!("skipped: {s}");
            }
            if summary.plots.is_empty() && summary.skipped.is_empty() {
                println!("nothing to plot");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(RunError::Validation(msg)) => {
            eprintln!("validation error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Computation(msg)) => {
            eprintln!("computation error: {msg}");
            ExitCode::from(1)
        }
    }
}
