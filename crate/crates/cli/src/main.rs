use clap::{Parser, Subcommand};
use gmc_cli::config::describe_keys;
use gmc_cli::error::CliError;
use gmc_cli::manifest::Invocation;
use gmc_cli::{execute, replay, resolve_config};
use std::path::PathBuf;
use std::process::ExitCode;

/// Simulate log-correlated fields and their chaos measures, run statistical
/// checks, and render heatmaps. Every run writes a manifest that `replay`
/// reproduces byte for byte.
#[derive(Parser)]
#[command(name = "gmc", version)]
struct Cli {
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides run.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "gmc-out")]
    out: PathBuf,
    /// Worker threads; overrides runtime.workers (0 = machine parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write field snapshots for every replica.
    Sample,
    /// Write per-cell measure CSVs for every replica.
    Measure,
    /// Run one named experiment, or the configured `experiments` list.
    Analyze { test: Option<String> },
    /// Render a d=2 measure CSV as a PPM heatmap with a log color bar.
    Render { input: PathBuf },
    /// Rerun a manifest and verify every output hash.
    Replay { manifest: PathBuf },
    /// List configuration keys with defaults and accepted values.
    Keys,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let text = match &cli.config {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?),
        None => None,
    };
    let (mut cfg, master) = resolve_config(text.as_deref(), cli.seed)?;
    if let Some(w) = cli.workers {
        cfg.set("runtime.workers", w.to_string())?;
    }
    let workers: usize = cfg.get("runtime.workers")?;
    if workers > 0 {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }
    let invocation = |subcommand: &str, argument: Option<String>| Invocation {
        subcommand: subcommand.into(),
        argument,
        input_sha256: None,
    };
    let manifest = match cli.command {
        Command::Keys => {
            print!("{}", describe_keys());
            return Ok(());
        }
        Command::Replay { manifest } => {
            let out = cli.out.clone();
            let explicit = std::env::args().any(|a| a == "--out" || a.starts_with("--out="));
            let m = replay(&manifest, explicit.then_some(out))?;
            println!("replay identical: {} outputs", m.outputs.len());
            return Ok(());
        }
        Command::Sample => execute(&invocation("sample", None), &cfg, master, &cli.out)?,
        Command::Measure => execute(&invocation("measure", None), &cfg, master, &cli.out)?,
        Command::Analyze { test } => execute(&invocation("analyze", test), &cfg, master, &cli.out)?,
        Command::Render { input } => {
            let abs = std::path::absolute(&input).map_err(|e| CliError::io(&input, e))?;
            execute(&invocation("render", Some(abs.display().to_string())), &cfg, master, &cli.out)?
        }
    };
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "wrote {} outputs and {}",
        manifest.outputs.len(),
        cli.out.join(gmc_cli::manifest::MANIFEST_FILE).display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
