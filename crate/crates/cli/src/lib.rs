//! Scan driver emitting CSV grids of the `uhlmann-core` diagnostics.

pub mod args;
pub mod error;
pub mod scan;
pub mod spec;
pub mod summary;

use std::fs::File;
use std::io::{BufWriter, Write};

use clap::Parser;

pub use args::{Cli, CommandArgs, Format, ScanArgs, SummarizeArgs};
pub use error::{CliError, Result};
pub use scan::{run_scan, Table};
pub use spec::{Command, ScanSpec};

/// Parse an argument vector (program name first) into a validated scan.
pub fn parse_scan<I, T>(argv: I) -> Result<ScanSpec>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::InvalidSpec(e.to_string()))?;
    match cli.command.into_scan() {
        Ok((command, args)) => ScanSpec::from_args(command, args),
        Err(_) => Err(CliError::InvalidSpec("summarize is not a scan".into())),
    }
}

/// Execute a parsed command line. Scan output goes to `--out` or `stdout`;
/// `summarize` always writes to `stdout`.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let (command, args) = match cli.command.into_scan() {
        Ok(scan) => scan,
        Err(s) => {
            let records = summary::summarize_file(&s.csv, s.delta_threshold)?;
            let text = match s.format {
                Format::Text => summary::render_text(&records),
                Format::Jsonl => summary::render_jsonl(&records),
            };
            return stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io("<stdout>", e));
        }
    };
    let spec = ScanSpec::from_args(command, args)?;
    let table = run_scan(&spec)?;
    match &spec.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut w = BufWriter::new(file);
            table.write_csv(&mut w).map_err(|e| match e {
                CliError::Io { source, .. } => CliError::io(path, source),
                other => other,
            })?;
            w.flush().map_err(|e| CliError::io(path, e))?;
        }
        None => table.write_csv(&mut *stdout)?,
    }
    if !table.rows.is_empty() && table.failed == table.rows.len() {
        return Err(CliError::AllCellsFailed(table.rows.len()));
    }
    Ok(())
}
