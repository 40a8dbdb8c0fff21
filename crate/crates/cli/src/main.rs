//! `coneweights`: batch front end for the cone-weights library.
//!
//! Exit status: 0 success, 1 a check failed, 2 usage or input error,
//! 3 the link spectrum does not reach far enough.

mod args;
mod commands;
mod link;
mod output;

use std::io::Write;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use args::{Cli, Command, Format, ProblemArgs, ProblemCmd};
use commands::Problem;
use output::Report;

/// Bad flags, config files or combinations of options.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn exit_status(err: &anyhow::Error) -> u8 {
    use cone_weights::Error as E;
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<E>() {
        Some(E::InsufficientSpectrum { .. }) => 3,
        Some(
            E::GridTooShort { .. } | E::IllConditioned(_) | E::Precondition(_) | E::NoVerdict(_) | E::DegenerateSeed(_),
        ) => 1,
        _ => 2,
    }
}

fn load_problem(cmd: ProblemCmd) -> anyhow::Result<(Problem, Format)> {
    let problem = match &cmd.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let file: ProblemArgs = toml::from_str(&text)
                .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            cmd.problem.merged_over(file)
        }
        None => cmd.problem,
    };
    Ok((Problem::new(problem), cmd.format))
}

fn run(cli: Cli) -> anyhow::Result<(Report, Format)> {
    let with_problem = |cmd: ProblemCmd, f: fn(&Problem) -> anyhow::Result<Report>| {
        let (problem, format) = load_problem(cmd)?;
        Ok((f(&problem)?, format))
    };
    match cli.command {
        Command::Roots(cmd) => with_problem(cmd, commands::roots),
        Command::Windows(cmd) => with_problem(cmd, commands::windows),
        Command::Ladder(cmd) => with_problem(cmd, commands::ladder),
        Command::Witt(cmd) => with_problem(cmd, commands::witt),
        Command::Extension(cmd) => with_problem(cmd, commands::extension),
        Command::Solve(cmd) => with_problem(cmd, commands::solve),
        Command::Mellin(cmd) => Ok((commands::mellin(&cmd)?, cmd.format)),
        Command::Verify(cmd) => Ok((commands::verify(&cmd)?, cmd.format)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(cli).and_then(|(report, format)| Ok((report.render(format)?, report.failed)));
    match outcome {
        Ok((rendered, failed)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(rendered.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(if failed { 1 } else { 0 })
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_status(&err))
        }
    }
}
