//! Batch front end for `lcusim`: integral tables from geometries, evolution
//! runs checked against the dense oracle, parameter sweeps, and the
//! cross-oracle self-check.
//!
//! Every command produces a JSON [`report::Report`] with a top-level
//! `schema` field. Reports depend only on the resolved configuration, so
//! repeated runs and different worker counts produce identical bytes.

pub mod args;
pub mod commands;
pub mod report;

use std::io::Write as _;

use lcusim::Error;

pub use args::{Cli, Command};
pub use report::Report;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// The command ran but a validation check failed.
    pub const VALIDATION: i32 = 1;
    /// Reserved by clap for usage errors.
    pub const USAGE: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const PLAN: i32 = 4;
    pub const SIZE_GUARD: i32 = 5;
    pub const CONVERGENCE: i32 = 6;
    pub const CONFIG: i32 = 7;
    pub const IO: i32 = 8;
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => exit::PARSE,
        Error::Plan(_) => exit::PLAN,
        Error::SizeGuard(_) => exit::SIZE_GUARD,
        Error::Convergence { .. } => exit::CONVERGENCE,
        Error::Io(_) => exit::IO,
        Error::Validation(_) => exit::VALIDATION,
        Error::Dimension { .. } | Error::IndexOutOfRange { .. } | Error::Range { .. } | Error::Config(_) => {
            exit::CONFIG
        }
    }
}

/// Runs one command on a pool of the requested size.
pub fn execute(cli: &Cli) -> lcusim::Result<Report> {
    let workers = cli.command.workers();
    lcusim::reduce::with_workers(workers, || match &cli.command {
        Command::Build(a) => commands::build::run(a),
        Command::Simulate(a) => commands::simulate::run(a),
        Command::Sweep(a) => commands::sweep::run(a),
        Command::Verify(a) => commands::verify::run(a),
    })
}

/// Executes, writes the report, and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let report = match execute(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let text = report.to_json();
    let written = match cli.command.report_path() {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return exit::IO;
    }
    for v in &report.validations {
        let mark = if v.passed { "ok  " } else { "FAIL" };
        eprintln!("{mark} {}: {}", v.name, v.detail);
    }
    if report.passed {
        exit::OK
    } else {
        exit::VALIDATION
    }
}
