use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use platedual::{emit_report, exit, run_config, run_gradcheck, CliError, ReportFormat, ScenarioConfig, Solution, Start};

#[derive(Parser)]
#[command(name = "platedual", version, about = "Solve and verify nonlinear plate and 3D elasticity scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Directory for the report, solution snapshot and history.
    #[arg(long, default_value = "platedual-out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: ReportFormat,
    /// Zero wall-clock timings so identical runs give identical reports.
    #[arg(long)]
    normalize_timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the energy and run every enabled check.
    Solve {
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Central-difference check of the analytic gradient.
    Gradcheck {
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Re-run the checks on a stored solution.
    VerifyDuality {
        config: PathBuf,
        #[arg(long)]
        from: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

fn finish(mut report: platedual::VerificationReport, output: &Output) -> Result<(), CliError> {
    if output.normalize_timings {
        report.normalize_timings();
    }
    print!("{}", report.text());
    let path = emit_report(&report, output.format, &output.out)?;
    eprintln!("report written to {}", path.display());
    Ok(())
}

fn solve(config: &Path, start: impl FnOnce() -> Result<Start, CliError>, output: &Output) -> Result<i32, CliError> {
    let cfg = ScenarioConfig::load(config)?;
    let outcome = run_config(&cfg, start()?)?;
    let code = outcome.exit_code();
    if let Some(sol) = &outcome.solution {
        std::fs::create_dir_all(&output.out).map_err(|e| CliError::io(&output.out, e))?;
        sol.save(&output.out.join("solution.json"))?;
    }
    platedual::run::write_history(&outcome, &output.out)?;
    finish(outcome.report, output)?;
    Ok(code)
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Solve { config, output } => solve(&config, || Ok(Start::Solve), &output),
        Command::VerifyDuality { config, from, output } => {
            solve(&config, || Ok(Start::Stored(Solution::load(&from)?)), &output)
        }
        Command::Gradcheck { config, output } => {
            let report = run_gradcheck(&ScenarioConfig::load(&config)?)?;
            let code = if report.passed() { exit::OK } else { exit::CHECK_FAILED };
            finish(report, &output)?;
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let code = match dispatch(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
