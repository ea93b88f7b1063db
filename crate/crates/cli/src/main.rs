use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sfwm_cli::{run, run_preset, CliError, CliResult, Command, Preset, Report, RunConfig};

#[derive(Parser)]
#[command(name = "sfwm", version, about = "Biphoton joint amplitudes with a delayed Raman response")]
struct Cli {
    /// Run configuration (`section.key = value unit` lines); defaults apply when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Accepted for interface stability; the model has no randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dump chi, W, F and the source kernel for the configured point.
    Respond,
    /// Split-step run: JTA/JSA grids and a summary.
    Propagate,
    /// Long-format CSV over the sweep axes.
    Sweep,
    /// Error against a Richardson reference for several step counts.
    Converge,
    /// Run one of the figure presets.
    Preset {
        #[arg(value_enum)]
        name: Preset,
    },
}

fn execute(cli: &Cli) -> CliResult<Report> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    if cli.seed.is_some() {
        log::info!("--seed has no effect: every computation is deterministic");
    }
    let command = match &cli.command {
        Cmd::Preset { name } => {
            if cli.config.is_some() {
                log::warn!("--config is ignored by presets");
            }
            return run_preset(*name, &cli.out);
        }
        Cmd::Respond => Command::Respond,
        Cmd::Propagate => Command::Propagate,
        Cmd::Sweep => Command::Sweep,
        Cmd::Converge => Command::Converge,
    };
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    run(command, &cfg, &cli.out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report.summary).expect("json values serialize"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
