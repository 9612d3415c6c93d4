//! Batch front end for `su11-core`: state export, photon statistics, PPT grid
//! scans and self-verification.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod verify;

pub use args::{Cli, Command};
pub use error::{CliError, CliResult};

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Build(a) => commands::build(a),
        Command::PhotonStats(a) => commands::photon_stats(a),
        Command::PptScan(a) => commands::ppt_scan(a),
        Command::Verify(a) => verify::verify(a),
    }
}
