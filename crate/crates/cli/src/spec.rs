use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use uhlmann_core::bcs::DEFAULT_SHELL_NODES;
use uhlmann_core::{BcsParams, Model};

use crate::args::ScanArgs;
use crate::error::{CliError, Result};

pub const DEFAULT_NK: usize = 501;
pub const DEFAULT_SITES: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    FidelityScan,
    DeltaScan,
    HolonomyScan,
    PhaseScan,
    EdgeScan,
    BcsScan,
    GapCurve,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FidelityScan => "fidelity-scan",
            Command::DeltaScan => "delta-scan",
            Command::HolonomyScan => "holonomy-scan",
            Command::PhaseScan => "phase-scan",
            Command::EdgeScan => "edge-scan",
            Command::BcsScan => "bcs-scan",
            Command::GapCurve => "gap-curve",
        }
    }
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Range {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Range> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(CliError::InvalidSpec(format!("non-finite range {lo}:{hi}")));
        }
        if steps == 0 {
            return Err(CliError::InvalidSpec("range needs at least one step".into()));
        }
        if steps == 1 && lo != hi {
            return Err(CliError::InvalidSpec(format!("single-step range {lo}:{hi} must have lo = hi")));
        }
        Ok(Range { lo, hi, steps })
    }

    /// `lo:hi:steps`, or a single value.
    pub fn parse(s: &str) -> Result<Range> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |p: &str| -> Result<f64> {
            p.parse()
                .map_err(|_| CliError::InvalidSpec(format!("'{p}' in range '{s}' is not a number")))
        };
        match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                Range::new(v, v, 1)
            }
            [lo, hi, steps] => {
                let steps = steps
                    .parse()
                    .map_err(|_| CliError::InvalidSpec(format!("bad step count in range '{s}'")))?;
                Range::new(num(lo)?, num(hi)?, steps)
            }
            _ => Err(CliError::InvalidSpec(format!("range '{s}' is not lo:hi:steps"))),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let n = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i == self.steps - 1 {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * (i as f64 / n)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamAxis {
    pub name: String,
    pub range: Range,
}

impl ParamAxis {
    pub fn parse(s: &str) -> Result<ParamAxis> {
        let (name, range) = s
            .split_once('=')
            .ok_or_else(|| CliError::InvalidSpec(format!("--param '{s}' is not name=lo:hi:steps")))?;
        Ok(ParamAxis {
            name: name.trim().to_string(),
            range: Range::parse(range)?,
        })
    }
}

/// Validated scan description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub command: Command,
    /// Model with all fixed parameters applied.
    pub model: Model,
    pub param: Option<ParamAxis>,
    pub temp: Option<Range>,
    pub dparam: f64,
    pub dtemp: f64,
    pub nk: usize,
    pub sites: usize,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub mu_qp: Option<f64>,
    pub edge_window: usize,
    pub shell_nodes: usize,
    pub profile: bool,
}

/// Default parameter set for each model family.
pub fn base_model(name: &str) -> Result<Model> {
    match name {
        "creutz" => Ok(Model::creutz(0.5)),
        "ssh" => Ok(Model::ssh(0.5, 1.0)),
        "kitaev" => Ok(Model::kitaev(0.5)),
        "bcs" => Ok(Model::Bcs(BcsParams::default())),
        other => Err(CliError::InvalidSpec(format!(
            "unknown model '{other}' (expected creutz, ssh, kitaev or bcs)"
        ))),
    }
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::InvalidSpec(format!("config line {}: expected key = value", i + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| CliError::InvalidSpec(format!("config key '{key}': cannot parse '{v}'")))
}

/// Fill unset flags from a config map. Keys are the long flag names; `set`
/// takes a comma-separated list of `name=value`.
pub fn apply_config(args: &mut ScanArgs, config: &BTreeMap<String, String>) -> Result<()> {
    for (k, v) in config {
        match k.as_str() {
            "model" => {
                args.model.get_or_insert_with(|| v.clone());
            }
            "param" => {
                args.param.get_or_insert_with(|| v.clone());
            }
            "temp" => {
                args.temp.get_or_insert_with(|| v.clone());
            }
            "dparam" => set_if_none(&mut args.dparam, parse_value(k, v)?),
            "dtemp" => set_if_none(&mut args.dtemp, parse_value(k, v)?),
            "nk" => set_if_none(&mut args.nk, parse_value(k, v)?),
            "sites" => set_if_none(&mut args.sites, parse_value(k, v)?),
            "out" => set_if_none(&mut args.out, PathBuf::from(v)),
            "workers" => set_if_none(&mut args.workers, parse_value(k, v)?),
            "mu_qp" | "mu-qp" => set_if_none(&mut args.mu_qp, parse_value(k, v)?),
            "edge_window" | "edge-window" => set_if_none(&mut args.edge_window, parse_value(k, v)?),
            "shell_nodes" | "shell-nodes" => set_if_none(&mut args.shell_nodes, parse_value(k, v)?),
            "profile" => args.profile |= parse_value::<bool>(k, v)?,
            "set" => {
                // flag values come later so they win
                let mut from_file: Vec<String> =
                    v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
                from_file.append(&mut args.set);
                args.set = from_file;
            }
            other => return Err(CliError::InvalidSpec(format!("unknown config key '{other}'"))),
        }
    }
    Ok(())
}

fn set_if_none<T>(slot: &mut Option<T>, v: T) {
    if slot.is_none() {
        *slot = Some(v);
    }
}

impl ScanSpec {
    /// Merge the optional config file into `args` and validate.
    pub fn from_args(command: Command, mut args: ScanArgs) -> Result<ScanSpec> {
        if let Some(path) = args.config.clone() {
            apply_config(&mut args, &load_config(&path)?)?;
        }
        ScanSpec::build(command, args)
    }

    fn build(command: Command, args: ScanArgs) -> Result<ScanSpec> {
        let default_model = match command {
            Command::BcsScan | Command::GapCurve => Some("bcs"),
            _ => None,
        };
        let model_name = args
            .model
            .as_deref()
            .or(default_model)
            .ok_or_else(|| CliError::InvalidSpec("--model is required".into()))?;
        let mut model = base_model(model_name)?;
        for item in &args.set {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::InvalidSpec(format!("--set '{item}' is not name=value")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| CliError::InvalidSpec(format!("--set '{item}': bad value")))?;
            model = model
                .with_param(name.trim(), value)
                .map_err(|e| CliError::InvalidSpec(e.to_string()))?;
        }
        let param = args.param.as_deref().map(ParamAxis::parse).transpose()?;
        let temp = args.temp.as_deref().map(Range::parse).transpose()?;

        let spec = ScanSpec {
            command,
            model,
            param,
            temp,
            dparam: args.dparam.unwrap_or(0.0),
            dtemp: args.dtemp.unwrap_or(0.0),
            nk: args.nk.unwrap_or(DEFAULT_NK),
            sites: args.sites.unwrap_or(DEFAULT_SITES),
            out: args.out,
            workers: args.workers,
            mu_qp: args.mu_qp,
            edge_window: args.edge_window.unwrap_or(1),
            shell_nodes: args.shell_nodes.unwrap_or(DEFAULT_SHELL_NODES),
            profile: args.profile,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn invalid<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(CliError::InvalidSpec(format!("{}: {}", self.command.name(), msg.into())))
    }

    pub fn validate(&self) -> Result<()> {
        let is_bcs = matches!(self.model, Model::Bcs(_));
        let two_axes = matches!(
            self.command,
            Command::FidelityScan | Command::DeltaScan | Command::HolonomyScan | Command::EdgeScan | Command::BcsScan
        );
        if two_axes && (self.param.is_none() || self.temp.is_none()) {
            return self.invalid("needs both --param and --temp");
        }
        if !two_axes && self.param.is_some() {
            return self.invalid("sweeps temperature only; drop --param (use --set for fixed values)");
        }
        if self.command == Command::PhaseScan && self.temp.is_none() {
            return self.invalid("needs --temp");
        }
        match self.command {
            Command::FidelityScan | Command::DeltaScan | Command::BcsScan => {
                if self.dparam == 0.0 && self.dtemp == 0.0 {
                    return self.invalid("probe offsets --dparam and --dtemp are both zero");
                }
                if !self.dparam.is_finite() || !self.dtemp.is_finite() {
                    return self.invalid("probe offsets must be finite");
                }
            }
            _ => {}
        }
        match self.command {
            Command::BcsScan | Command::GapCurve if !is_bcs => return self.invalid("requires --model bcs"),
            Command::HolonomyScan | Command::PhaseScan | Command::EdgeScan if is_bcs => {
                return self.invalid("not available for the bcs model")
            }
            _ => {}
        }
        if self.nk < 3 {
            return self.invalid(format!("--nk {} is below 3", self.nk));
        }
        if self.command == Command::EdgeScan {
            if self.sites < 8 {
                return self.invalid(format!("--sites {} is below 8", self.sites));
            }
            if self.edge_window == 0 || self.edge_window > self.sites / 2 {
                return self.invalid(format!("--edge-window {} out of range", self.edge_window));
            }
        }
        if self.shell_nodes < 2 {
            return self.invalid("--shell-nodes must be at least 2");
        }
        if self.workers == Some(0) {
            return self.invalid("--workers must be positive");
        }
        if let Some(p) = &self.param {
            for v in [p.range.lo, p.range.hi, p.range.lo + self.dparam, p.range.hi + self.dparam] {
                if let Err(e) = self.model.with_param(&p.name, v) {
                    return self.invalid(e.to_string());
                }
            }
        }
        if let Some(t) = &self.temp {
            if t.lo.min(t.hi) < 0.0 || t.lo.min(t.hi) + self.dtemp < 0.0 {
                return self.invalid("temperatures must be >= 0");
            }
        }
        Ok(())
    }

    /// Model at parameter value `p` of the swept axis (the fixed model when
    /// there is no axis).
    pub fn model_at(&self, p: Option<f64>) -> uhlmann_core::Result<Model> {
        match (&self.param, p) {
            (Some(axis), Some(v)) => self.model.with_param(&axis.name, v),
            _ => Ok(self.model),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let r = Range::parse("0.5:1.5:3").unwrap();
        assert_eq!(r.values(), vec![0.5, 1.0, 1.5]);
        assert_eq!(Range::parse("0.2").unwrap().values(), vec![0.2]);
        assert!(Range::parse("1:2").is_err());
        assert!(Range::parse("1:2:0").is_err());
        assert!(Range::parse("a:2:3").is_err());
        assert_eq!(Range::parse("0:1:201").unwrap().values().len(), 201);
    }

    #[test]
    fn param_axis() {
        let p = ParamAxis::parse("M=0.5:1.5:201").unwrap();
        assert_eq!(p.name, "M");
        assert_eq!(p.range.steps, 201);
        assert!(ParamAxis::parse("0.5:1.5:3").is_err());
    }

    #[test]
    fn config_parsing() {
        let m = parse_config("# scan\nmodel = ssh\n\nnk=101 # grid\n").unwrap();
        assert_eq!(m["model"], "ssh");
        assert_eq!(m["nk"], "101");
        assert!(parse_config("oops").is_err());
    }

    #[test]
    fn flags_override_config() {
        let mut args = ScanArgs {
            nk: Some(51),
            set: vec!["w=2".into()],
            ..Default::default()
        };
        let cfg = parse_config("model = ssh\nnk = 101\nset = v=0.1, w=3").unwrap();
        apply_config(&mut args, &cfg).unwrap();
        assert_eq!(args.nk, Some(51));
        assert_eq!(args.model.as_deref(), Some("ssh"));
        assert_eq!(args.set, vec!["v=0.1", "w=3", "w=2"]);
        let err = apply_config(&mut args, &parse_config("colour = red").unwrap());
        assert!(err.is_err());
    }

    #[test]
    fn validation() {
        let args = |param: Option<&str>, dparam| ScanArgs {
            model: Some("creutz".into()),
            param: param.map(String::from),
            temp: Some("0.01:1:5".into()),
            dparam,
            ..Default::default()
        };
        assert!(ScanSpec::from_args(Command::FidelityScan, args(Some("M=0.5:1.5:11"), Some(0.01))).is_ok());
        assert!(ScanSpec::from_args(Command::FidelityScan, args(Some("M=0.5:1.5:11"), None)).is_err());
        assert!(ScanSpec::from_args(Command::FidelityScan, args(None, Some(0.01))).is_err());
        assert!(ScanSpec::from_args(Command::FidelityScan, args(Some("Q=0:1:3"), Some(0.01))).is_err());
        assert!(ScanSpec::from_args(Command::PhaseScan, args(Some("M=0.5:1.5:11"), None)).is_err());
        assert!(ScanSpec::from_args(Command::PhaseScan, args(None, None)).is_ok());
        assert!(ScanSpec::from_args(Command::GapCurve, args(None, None)).is_err());
        let gap = ScanArgs::default();
        assert!(ScanSpec::from_args(Command::GapCurve, gap).is_ok());
    }
}
