//! Command-line driver for the factored low-rank recovery toolkit.
//!
//! The `lrno` binary wraps [`lrno_core`] behind six subcommands:
//!
//! - `gen`     — materialize a sensing instance and write it as JSON;
//! - `solve`   — run (perturbed) gradient descent from seeded starts,
//!   classify every terminal, and write traces plus a summary;
//! - `bounds`  — evaluate one closed-form distance cap;
//! - `contour` — invert a cap over a (distance, probability) grid;
//! - `verify`  — replay solver artifacts through the verification suites;
//! - `fig2`    — reproduce the two-step-size convergence experiment.
//!
//! Every command that writes artifacts also writes a `*.manifest.json`
//! (or `manifest.json` inside its output directory) recording the resolved
//! configuration, the seeds consumed, and SHA-256 hashes of all inputs and
//! outputs, so a run can be replayed bit-for-bit from its manifest alone.
//!
//! Exit codes: `0` success (verification passed where applicable), `1`
//! failed run or failed verification, `2` usage error, `3` I/O error.

pub mod args;
pub mod commands;
pub mod manifest;
pub mod svg;

use std::fmt;

/// CLI-level failure, bucketed by exit code.
#[derive(Debug)]
pub enum AppError {
    /// Bad flags or parameters — exit 2.
    Usage(String),
    /// Reading or writing an artifact failed — exit 3.
    Io(String),
    /// A computation or solver run failed — exit 1.
    Run(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 2,
            AppError::Io(_) => 3,
            AppError::Run(_) => 1,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Usage(m) | AppError::Io(m) | AppError::Run(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for AppError {}

pub(crate) fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}

/// Maps a core error into the CLI buckets, keeping I/O distinct so the
/// exit code survives the translation.
pub(crate) fn core_err(context: &str, e: lrno_core::Error) -> AppError {
    match e {
        lrno_core::Error::Io(inner) => AppError::Io(format!("{context}: {inner}")),
        other => AppError::Run(format!("{context}: {other}")),
    }
}

pub(crate) fn io_err(context: &str, e: std::io::Error) -> AppError {
    AppError::Io(format!("{context}: {e}"))
}

/// Builds the global rayon pool from `--threads`, falling back to the
/// `LRNO_THREADS` environment variable. Results are identical at any
/// thread count; this only controls wall-clock parallelism.
fn init_threads(flag: Option<usize>) -> Result<(), AppError> {
    let requested = match flag {
        Some(t) => Some(t),
        None => match std::env::var("LRNO_THREADS") {
            Ok(s) => Some(s.trim().parse::<usize>().map_err(|_| {
                usage(format!(
                    "LRNO_THREADS must be a positive integer; got {s:?}"
                ))
            })?),
            Err(_) => None,
        },
    };
    if let Some(t) = requested {
        if t == 0 {
            return Err(usage("thread count must be at least 1"));
        }
        // A second initialization (e.g. library callers running several
        // commands in-process) is harmless: the first pool wins.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    Ok(())
}

/// Runs one parsed command line to completion and returns the process
/// exit code, printing any error to stderr.
pub fn run(cli: args::Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: args::Cli) -> Result<i32, AppError> {
    init_threads(cli.threads)?;
    match cli.command {
        args::Command::Gen(a) => commands::gen::run(a),
        args::Command::Solve(a) => commands::solve::run(a),
        args::Command::Bounds(a) => commands::bounds::run(a),
        args::Command::Contour(a) => commands::contour::run(a),
        args::Command::Verify(a) => commands::verify::run(a),
        args::Command::Fig2(a) => commands::fig2::run(a),
    }
}
