use std::path::PathBuf;
use std::process::ExitCode;

use carpet::config::{load_config, Experiment};
use carpet::experiment::{default_out_dir, replay, resolve_workers, run_experiment, MANIFEST_FILE};
use carpet::Error;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

/// Rolling-carpet eradication experiments.
#[derive(Parser)]
#[command(name = "carpet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file, or `preset:reference` for the bundled sweep.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default `runs/<experiment>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to CARPET_WORKERS, then to one per core.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal killing-zone width Λ(c) for each configured speed.
    LambdaSweep(RunArgs),
    /// One killing-zone simulation to steady state.
    KillingRun(RunArgs),
    /// One sterile-release simulation.
    SterileRun(RunArgs),
    /// Minimal release density for a fixed window width.
    PiSearch(RunArgs),
    /// Minimal window width for a fixed release density.
    WidthSearch(RunArgs),
    /// Steady sterile density profile, closed form against quadrature.
    MsProfile(RunArgs),
    /// Homogeneous against two-step release profiles.
    HeteroCompare(RunArgs),
    /// Natural front speed of the uncontrolled population.
    SpeedCheck(RunArgs),
    /// Verify a run directory against its manifest and rerun it.
    Replay {
        /// Run directory or its manifest.json.
        path: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn execute(command: Command) -> carpet::Result<serde_json::Value> {
    let (experiment, args) = match command {
        Command::Replay { path, workers } => {
            let report = replay(&path, resolve_workers(workers)?)?;
            return Ok(json!({ "status": "match", "report": report }));
        }
        Command::LambdaSweep(a) => (Experiment::LambdaSweep, a),
        Command::KillingRun(a) => (Experiment::KillingRun, a),
        Command::SterileRun(a) => (Experiment::SterileRun, a),
        Command::PiSearch(a) => (Experiment::PiSearch, a),
        Command::WidthSearch(a) => (Experiment::WidthSearch, a),
        Command::MsProfile(a) => (Experiment::MsProfile, a),
        Command::HeteroCompare(a) => (Experiment::HeteroCompare, a),
        Command::SpeedCheck(a) => (Experiment::SpeedCheck, a),
    };
    let workers = resolve_workers(args.workers)?;
    let cfg = load_config(&args.config, Some(experiment))?;
    let out = args.out.unwrap_or_else(|| default_out_dir(experiment));
    let manifest = run_experiment(&cfg, &out, workers)?;
    Ok(json!({
        "status": "ok",
        "experiment": experiment.name(),
        "manifest": out.join(MANIFEST_FILE),
        "files": manifest.files,
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let detail = match &e {
                Error::Parse { line, .. } => json!({ "line": line }),
                Error::Validation(field) | Error::InvalidParameter { field, .. } => json!({ "field": field }),
                Error::Mismatch(files) => json!({ "files": files }),
                _ => json!({}),
            };
            let obj = json!({
                "error": e.kind(),
                "message": e.to_string(),
                "exit_code": e.exit_code(),
                "detail": detail,
            });
            eprintln!("{obj}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
