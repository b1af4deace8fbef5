mod cli;
mod commands;
mod config;
mod error;
mod grid;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::cli::{Cli, Command, Common};
use crate::commands::Outcome;
use crate::error::CliError;

fn common(cmd: &Command) -> Option<&Common> {
    match cmd {
        Command::Table1(a) => Some(&a.common),
        Command::Profile(a) => Some(&a.common),
        Command::Sweep(a) => Some(&a.common),
        Command::Jump(a) => Some(&a.common),
        Command::Fit(a) => Some(&a.common),
        Command::Qscan(a) => Some(&a.common),
        Command::Kink(a) => Some(&a.common),
        Command::Run(_) => None,
    }
}

fn dispatch(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Table1(a) => commands::cmd_table1(a),
        Command::Profile(a) => commands::cmd_profile(a),
        Command::Sweep(a) => commands::cmd_sweep(a),
        Command::Jump(a) => commands::cmd_jump(a),
        Command::Fit(a) => commands::cmd_fit(a),
        Command::Qscan(a) => commands::cmd_qscan(a),
        Command::Kink(a) => commands::cmd_kink(a),
        Command::Run(_) => unreachable!("config files are expanded before dispatch"),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let cli = match cli.command {
        Command::Run(run) => {
            let argv = config::load(&run.config)?;
            Cli::try_parse_from(&argv).map_err(|e| CliError::Usage(e.to_string()))?
        }
        _ => cli,
    };
    let opts = common(&cli.command).expect("subcommand carries output options").clone();
    if let Some(n) = opts.workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Compute(format!("thread pool: {e}")))?;
    }

    let outcome = dispatch(&cli.command)?;
    let text = outcome.table.render(opts.format)?;
    match &opts.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Compute(outcome.failures.join("\n")))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
