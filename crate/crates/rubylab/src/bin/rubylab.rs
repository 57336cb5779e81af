use clap::{Parser, Subcommand};
use rubylab::config::{default_config, ExperimentConfig};
use rubylab::pipeline::{run, Stage};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rubylab", version, about = "Ruby-lattice spin liquid workbench")]
struct Cli {
    /// Experiment config (JSON); defaults to the built-in working point.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config's RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for artifacts and the manifest.
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ground-state solve: spectrum, residuals, amplitude dump, COO export.
    Gs,
    /// Detuning sweep with phase classification per point.
    Sweep,
    /// String observables on the low manifold, CSV + classification.
    Strings,
    /// Compile a braid word and report the logical unitary.
    Braid {
        /// Braid word, e.g. "R2 R2"; overrides the config.
        word: Option<String>,
    },
    /// Puncture-code oracle: reference table plus seeded prep runs.
    Codesim,
    /// Check the config, geometry, and dual-evolution factorization.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let mut cfg = match &cli.config {
        Some(path) => match ExperimentConfig::from_file(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
        None => default_config(),
    };
    if let Some(seed) = cli.seed {
        cfg.solver.seed = seed;
    }
    let stage = match &cli.cmd {
        Cmd::Gs => Stage::Gs,
        Cmd::Sweep => Stage::Sweep,
        Cmd::Strings => Stage::Strings,
        Cmd::Braid { word } => {
            if let Some(w) = word {
                cfg.braid.word = w.clone();
            }
            Stage::Braid
        }
        Cmd::Codesim => Stage::Codesim,
        Cmd::Validate => Stage::Validate,
    };
    match run(&cfg, stage, &cli.out) {
        Ok(manifest) => {
            println!("{}", serde_json::to_string_pretty(&manifest.summary).unwrap());
            eprintln!(
                "wrote {} files to {} in {:.2}s",
                manifest.files.len(),
                cli.out.display(),
                manifest.wall_seconds
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
