//! Front end for the `mflow` binary: flag and config handling, the
//! experiments behind each subcommand, and artifact writing.

pub mod check;
pub mod config;
pub mod experiments;

use std::ffi::OsString;
use std::path::Path;

use clap::Parser;

use config::{Cli, ExperimentConfig};
use experiments::Outcome;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Writes `<out>/<subcommand>.json` and the extra artifacts.
pub fn write_outcome(dir: &Path, name: &str, outcome: &Outcome) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{name}.json")), &outcome.json)?;
    for (file, contents) in &outcome.files {
        std::fs::write(dir.join(file), contents)?;
    }
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn main_with<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let (exp, flags) = cli.command.split();
    let cfg = match ExperimentConfig::resolve(exp, &flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = match experiments::run_experiment(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = write_outcome(&cfg.out, exp.as_str(), &outcome) {
        eprintln!("error: cannot write to {}: {e}", cfg.out.display());
        return EXIT_FAIL;
    }
    for c in outcome.checks.iter().filter(|c| !c.pass) {
        eprintln!("check failed: {} = {:?} (required {})", c.name, c.value, c.requirement);
    }
    println!("{exp}: {}", if outcome.pass { "pass" } else { "FAIL" });
    if outcome.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
