mod args;
mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::Globals;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<qlink_core::Error>() {
        Some(qlink_core::Error::Internal(_)) => 2,
        _ => 1,
    }
}

fn execute(cli: &Cli) -> anyhow::Result<()> {
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let globals = Globals {
        seed: cli.seed,
        workers,
        mode: cli.mode,
    };
    let report = commands::run(&cli.command, globals)?;
    let text = report.render(cli.format)?;
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match std::panic::catch_unwind(|| execute(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => ExitCode::from(2),
    }
}
