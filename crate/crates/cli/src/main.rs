mod commands;
mod config;

use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use pdm_core::PdmError;

use config::{Cli, RunConfig};

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<PdmError>() {
        Some(e) if e.is_convergence() => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn main_inner() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let cfg = RunConfig::from_cli(&cli)?;
    if cli.emit_config {
        print!("{}", cfg.to_json());
        return Ok(());
    }
    let text = commands::run(&cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
