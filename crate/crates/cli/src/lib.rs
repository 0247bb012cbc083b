//! Command-line front end for the newsvendor library: scenario files in,
//! reports out.

pub mod commands;
pub mod error;
pub mod scenario;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use newsvendor::randopt::{write_trace_csv, RhsMode};
use serde::Serialize;

pub use error::CliError;
use scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Search,
    Validate,
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub json: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub dump_normalized: Option<PathBuf>,
    pub rhs_mode: Option<RhsMode>,
    pub inject_bias: f64,
}

fn output_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| output_err(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| output_err(path, e))
}

/// Run one command and return the text for standard output. A failed
/// validation still writes its JSON report; the error carries the table.
pub fn run(command: Command, scenario_path: &Path, opts: &Options) -> Result<String, CliError> {
    let s = Scenario::load(scenario_path)?;
    if let Some(p) = &opts.dump_normalized {
        let mut text = s.file.to_json();
        text.push('\n');
        std::fs::write(p, text).map_err(|e| output_err(p, e))?;
    }
    let mode = opts.rhs_mode.unwrap_or(s.file.rhs_mode);
    match command {
        Command::Solve => {
            let r = commands::solve(&s, mode)?;
            if let Some(p) = &opts.json {
                write_json(p, &r)?;
            }
            Ok(commands::render_solve(&r))
        }
        Command::Search => {
            let r = commands::search(&s, mode)?;
            if let Some(p) = &opts.json {
                write_json(p, &r)?;
            }
            if let Some(p) = &opts.trace {
                let f = File::create(p).map_err(|e| output_err(p, e))?;
                write_trace_csv(&r.search_trace, BufWriter::new(f)).map_err(|e| output_err(p, e))?;
            }
            Ok(commands::render_search(&r))
        }
        Command::Validate => {
            let r = commands::validate(&s, opts.inject_bias)?;
            if let Some(p) = &opts.json {
                write_json(p, &r)?;
            }
            let text = commands::render_validate(&r);
            if r.passed {
                Ok(text)
            } else {
                Err(CliError::ValidationFailed {
                    failed: r.rows.iter().filter(|x| !x.pass).count(),
                    total: r.rows.len(),
                    table: text,
                })
            }
        }
    }
}
