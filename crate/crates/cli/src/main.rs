mod args;
mod commands;
mod config;
mod error;

use args::Cli;
use clap::Parser;
use commands::Context;
use config::Config;
use error::ExitStatus;
use std::process::ExitCode;

fn main() -> ExitCode {
    // clap prints usage errors to stderr and exits with status 2
    let cli = Cli::parse();
    let status = match Config::load(cli.config.as_deref()) {
        Ok(config) => {
            let ctx = Context {
                json: cli.json,
                timestamps: cli.timestamps,
                config,
            };
            commands::run(&ctx, &cli.command).unwrap_or_else(|e| {
                ctx.note(format_args!("error: {e}"));
                e.status()
            })
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.status()
        }
    };
    debug_assert!(status.0 <= ExitStatus::INPUT.0);
    ExitCode::from(status.0)
}
