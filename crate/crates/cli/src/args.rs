use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::spec::Command;

/// Scan driver for fidelity, Uhlmann holonomy, edge-state and BCS gap
/// diagnostics. Every scan writes one CSV row per grid cell.
#[derive(Debug, Parser)]
#[command(name = "uhlmann", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// F, F density, Tr sqrt(rho) sqrt(rho') and Delta between probe pairs
    FidelityScan(ScanArgs),
    /// Delta = F - Tr sqrt(rho) sqrt(rho') between probe pairs
    DeltaScan(ScanArgs),
    /// Holonomy angle, Uhlmann phase and winding over (param, T)
    HolonomyScan(ScanArgs),
    /// Uhlmann phase against temperature at fixed parameters
    PhaseScan(ScanArgs),
    /// Edge and bulk occupation of an open chain over (param, T)
    EdgeScan(ScanArgs),
    /// Shell fidelity of the BCS model with solved gaps over (param, T)
    BcsScan(ScanArgs),
    /// Self-consistent BCS gap against temperature
    GapCurve(ScanArgs),
    /// Transition report for a CSV written by one of the scans
    Summarize(SummarizeArgs),
}

impl CommandArgs {
    /// Split into a scan command and its arguments, or hand back the
    /// `summarize` arguments.
    pub fn into_scan(self) -> Result<(Command, ScanArgs), SummarizeArgs> {
        Ok(match self {
            CommandArgs::FidelityScan(a) => (Command::FidelityScan, a),
            CommandArgs::DeltaScan(a) => (Command::DeltaScan, a),
            CommandArgs::HolonomyScan(a) => (Command::HolonomyScan, a),
            CommandArgs::PhaseScan(a) => (Command::PhaseScan, a),
            CommandArgs::EdgeScan(a) => (Command::EdgeScan, a),
            CommandArgs::BcsScan(a) => (Command::BcsScan, a),
            CommandArgs::GapCurve(a) => (Command::GapCurve, a),
            CommandArgs::Summarize(s) => return Err(s),
        })
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScanArgs {
    /// creutz, ssh, kitaev or bcs
    #[arg(long)]
    pub model: Option<String>,
    /// Swept parameter, `name=lo:hi:steps`
    #[arg(long)]
    pub param: Option<String>,
    /// Temperature axis, `lo:hi:steps` (or a single value)
    #[arg(long)]
    pub temp: Option<String>,
    /// Parameter offset of the probe state
    #[arg(long, allow_hyphen_values = true)]
    pub dparam: Option<f64>,
    /// Temperature offset of the probe state
    #[arg(long, allow_hyphen_values = true)]
    pub dtemp: Option<f64>,
    /// Momentum grid size
    #[arg(long)]
    pub nk: Option<usize>,
    /// Open chain length in unit cells
    #[arg(long)]
    pub sites: Option<usize>,
    /// Output CSV path (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads
    #[arg(long)]
    pub workers: Option<usize>,
    /// Plain-text `key = value` file; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Fixed model parameter, `name=value` (repeatable)
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
    /// Quasi-particle chemical potential for edge scans
    #[arg(long, allow_hyphen_values = true)]
    pub mu_qp: Option<f64>,
    /// Number of boundary cells averaged into the edge occupation
    #[arg(long)]
    pub edge_window: Option<usize>,
    /// Gauss-Legendre nodes sampling the BCS shell
    #[arg(long)]
    pub shell_nodes: Option<usize>,
    /// Edge scans: emit the occupation of every cell instead of the ratio
    #[arg(long)]
    pub profile: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Jsonl,
}

#[derive(Debug, Clone, Args)]
pub struct SummarizeArgs {
    /// CSV produced by a scan
    pub csv: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Delta above which a cell counts as positive
    #[arg(long, default_value_t = 1e-3)]
    pub delta_threshold: f64,
}
