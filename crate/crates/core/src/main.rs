use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use thinshell::cli::{self, ConfigPresence, ExperimentConfig, Suite};
use thinshell::Result;

#[derive(Parser)]
#[command(name = "thinshell", version, about = "Thin-shell, Berry-Esseen, transport and spectral experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config (`key = value` lines in `[experiment]` and `[body]` sections).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for report.csv, report.json and plots.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write SVG plots.
    #[arg(long)]
    plot: bool,
    /// Directory receiving the raw sample matrices of the thin-shell suite.
    #[arg(long, value_name = "PATH")]
    dump_samples: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    Thinshell(RunArgs),
    Clt(RunArgs),
    BerryEsseen(RunArgs),
    Transport(RunArgs),
    Spectral(RunArgs),
    Identities(RunArgs),
    All(RunArgs),
    /// Print version, RNG id and build metadata.
    Version,
}

fn execute(suite: Suite, args: RunArgs) -> Result<bool> {
    let (mut cfg, presence) = match &args.config {
        Some(path) => {
            let (file, presence) = ExperimentConfig::load(path)?;
            (file.for_suite(suite, presence.bodies, presence.n_grid), presence)
        }
        None => (ExperimentConfig::defaults(suite), ConfigPresence::default()),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    cfg.plot |= args.plot;
    let summary = cli::run(&cfg, presence, args.dump_samples.as_deref())?;
    for a in summary.failures() {
        eprintln!("FAIL {} [{}]: measured {} vs {} {}", a.id, a.anchor, a.measured, a.bound, a.note);
    }
    println!(
        "{} rows, {}/{} assertions passed; reports in {}",
        summary.rows,
        summary.assertions.iter().filter(|a| a.passed).count(),
        summary.assertions.len(),
        cfg.output_dir.display()
    );
    Ok(summary.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (suite, args) = match cli.command {
        Command::Version => {
            println!("{}", cli::version_info());
            return ExitCode::SUCCESS;
        }
        Command::Thinshell(a) => (Suite::ThinShell, a),
        Command::Clt(a) => (Suite::Clt, a),
        Command::BerryEsseen(a) => (Suite::BerryEsseen, a),
        Command::Transport(a) => (Suite::Transport, a),
        Command::Spectral(a) => (Suite::Spectral, a),
        Command::Identities(a) => (Suite::Identities, a),
        Command::All(a) => (Suite::All, a),
    };
    match execute(suite, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
