//! Command-line driver for `dcoset-core`: instance files, canonical JSON
//! reports and the randomized self-test.

pub mod commands;
pub mod exit;
pub mod gen;
pub mod instance;
pub mod report;
pub mod selftest;

use std::ffi::OsString;
use std::time::Instant;

use clap::Parser;

use commands::{execute, status_code, Cli};

/// Parses `args`, runs the command, writes the report and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    let start = Instant::now();
    let mut report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if cli.timing {
        report.timing_ms = Some(start.elapsed().as_millis());
    }
    let text = report.to_canonical_string();
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return exit::IO;
    }
    status_code(report.status)
}
