//! Configuration-driven driver for `sfwm-core`: single runs, figure presets,
//! parameter sweeps and convergence studies.

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;
pub mod table;
pub mod units;

use std::path::Path;

pub use commands::Report;
pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use presets::{preset, Command, Preset};

pub fn run(command: Command, cfg: &RunConfig, out: &Path) -> CliResult<Report> {
    match command {
        Command::Respond => commands::cmd_respond(cfg, out),
        Command::Propagate => commands::cmd_propagate(cfg, out),
        Command::Sweep => commands::cmd_sweep(cfg, out),
        Command::Converge => commands::cmd_converge(cfg, out),
    }
}

/// Runs a preset after saving its configuration as `preset.conf` in `out`.
pub fn run_preset(p: Preset, out: &Path) -> CliResult<Report> {
    let (cfg, command) = preset(p);
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    std::fs::write(out.join("preset.conf"), cfg.to_text())?;
    run(command, &cfg, out)
}
