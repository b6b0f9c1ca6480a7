use std::io::Write;

use rayon::prelude::*;

use uhlmann_core::bcs::{critical_temperature, shell_fidelity, solve_gap, EnergyShell};
use uhlmann_core::fidelity::fidelity_total;
use uhlmann_core::holonomy::holonomy;
use uhlmann_core::realspace::{default_mu_qp, edge_bulk_ratio_window, ChainSpectrum};
use uhlmann_core::{Error as CoreError, FidelityReport, Model, ModelParams, MomentumGrid};

use crate::error::{CliError, Result};
use crate::spec::{Command, Range, ScanSpec};

/// Buffered scan output in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Rows with a non-empty `error` column.
    pub failed: usize,
}

impl Table {
    fn new(header: &[&str], rows: Vec<Vec<String>>) -> Table {
        let failed = rows.iter().filter(|r| r.last().is_some_and(|e| !e.is_empty())).count();
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
            failed,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        let io = |e: csv::Error| CliError::io("<csv>", std::io::Error::other(e));
        out.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            out.write_record(row).map_err(io)?;
        }
        out.flush().map_err(|e| CliError::io("<csv>", e))
    }

    /// Numeric values of a column, `None` for empty or non-numeric cells.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let c = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r.get(c).and_then(|s| s.parse().ok())).collect())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// One cell: values (empty strings where unavailable) and an error message.
type Cell = (Vec<String>, Option<String>);

fn row(keys: &[f64], width: usize, cell: Cell) -> Vec<String> {
    let (mut values, err) = cell;
    values.resize(width, String::new());
    let mut r: Vec<String> = keys.iter().map(|&k| fmt_f64(k)).collect();
    r.extend(values);
    r.push(err.unwrap_or_default());
    r
}

fn failed(e: impl std::fmt::Display) -> Cell {
    (Vec::new(), Some(e.to_string()))
}

fn grid2(spec: &ScanSpec) -> Vec<(f64, f64)> {
    let ps = spec.param.as_ref().map(|p| p.range.values()).unwrap_or_default();
    let ts = spec.temp.map(|t| t.values()).unwrap_or_default();
    ps.iter().flat_map(|&p| ts.iter().map(move |&t| (p, t))).collect()
}

/// Run the scan on a worker pool of `spec.workers` threads (rayon's default
/// when unset). Rows come back in grid order regardless of worker count.
pub fn run_scan(spec: &ScanSpec) -> Result<Table> {
    spec.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = spec.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::InvalidSpec(format!("cannot start worker pool: {e}")))?;
    let table = pool.install(|| match spec.command {
        Command::FidelityScan => probe_scan(spec, ProbeColumns::Fidelity),
        Command::DeltaScan => probe_scan(spec, ProbeColumns::Delta),
        Command::BcsScan => probe_scan(spec, ProbeColumns::Bcs),
        Command::HolonomyScan => Ok(holonomy_scan(spec)),
        Command::PhaseScan => Ok(phase_scan(spec)),
        Command::EdgeScan => Ok(edge_scan(spec)),
        Command::GapCurve => gap_curve(spec),
    })?;
    Ok(table)
}

#[derive(Clone, Copy, PartialEq)]
enum ProbeColumns {
    Fidelity,
    Delta,
    Bcs,
}

struct ProbeResult {
    report: FidelityReport,
    gaps: Option<(f64, f64)>,
}

fn probe_cell(spec: &ScanSpec, grid: &MomentumGrid, p: f64, t: f64) -> std::result::Result<ProbeResult, CoreError> {
    let a = spec.model_at(Some(p))?;
    let b = spec.model_at(Some(p + spec.dparam))?;
    let t2 = t + spec.dtemp;
    match (a, b) {
        (Model::Bcs(pa), Model::Bcs(pb)) => {
            if pa.cutoff != pb.cutoff {
                return Err(CoreError::InvalidParameter("probe pair must share omega_D".into()));
            }
            let shell = EnergyShell::new(pa.cutoff, spec.shell_nodes)?;
            let ga = solve_gap(t, &pa)?;
            let gb = solve_gap(t2, &pb)?;
            if !ga.converged || !gb.converged {
                return Err(CoreError::NoConvergence(ga.iterations.max(gb.iterations)));
            }
            Ok(ProbeResult {
                report: shell_fidelity(&shell, (ga.delta, t), (gb.delta, t2))?,
                gaps: Some((ga.delta, gb.delta)),
            })
        }
        _ => Ok(ProbeResult {
            report: fidelity_total(&ModelParams::new(a, t)?, &ModelParams::new(b, t2)?, grid)?,
            gaps: None,
        }),
    }
}

fn probe_scan(spec: &ScanSpec, columns: ProbeColumns) -> Result<Table> {
    let grid = MomentumGrid::new(spec.nk).map_err(|e| CliError::InvalidSpec(e.to_string()))?;
    let header: &[&str] = match columns {
        ProbeColumns::Fidelity => &["param", "T", "F", "F_density", "trace_sqrt", "delta", "error"],
        ProbeColumns::Delta => &["param", "T", "delta", "F", "trace_sqrt", "error"],
        ProbeColumns::Bcs => &["param", "T", "gap", "gap_probe", "F", "F_density", "trace_sqrt", "delta", "error"],
    };
    let width = header.len() - 3;
    let rows = grid2(spec)
        .par_iter()
        .map(|&(p, t)| {
            let cell = match probe_cell(spec, &grid, p, t) {
                Ok(ProbeResult { report: r, gaps }) => {
                    let f = |x: f64| fmt_f64(x);
                    let values = match columns {
                        ProbeColumns::Fidelity => {
                            vec![f(r.fidelity), f(r.fidelity_density), f(r.trace_sqrt), f(r.delta)]
                        }
                        ProbeColumns::Delta => vec![f(r.delta), f(r.fidelity), f(r.trace_sqrt)],
                        ProbeColumns::Bcs => {
                            let (ga, gb) = gaps.unwrap_or((f64::NAN, f64::NAN));
                            vec![
                                f(ga),
                                f(gb),
                                f(r.fidelity),
                                f(r.fidelity_density),
                                f(r.trace_sqrt),
                                f(r.delta),
                            ]
                        }
                    };
                    (values, None)
                }
                Err(e) => failed(e),
            };
            row(&[p, t], width, cell)
        })
        .collect();
    Ok(Table::new(header, rows))
}

fn holonomy_scan(spec: &ScanSpec) -> Table {
    let header = ["param", "T", "theta", "phase", "winding", "error"];
    let grid = MomentumGrid::new(spec.nk).expect("validated nk");
    let rows = grid2(spec)
        .par_iter()
        .map(|&(p, t)| {
            let cell = spec
                .model_at(Some(p))
                .and_then(|m| holonomy(&m, t, &grid))
                .map(|h| {
                    let values = vec![
                        fmt_f64(h.theta),
                        h.phase.map(fmt_f64).unwrap_or_default(),
                        h.winding.to_string(),
                    ];
                    let err = h
                        .phase
                        .is_none()
                        .then(|| CoreError::DegeneratePhase(h.trace.norm()).to_string());
                    (values, err)
                })
                .unwrap_or_else(failed);
            row(&[p, t], 3, cell)
        })
        .collect();
    Table::new(&header, rows)
}

fn phase_scan(spec: &ScanSpec) -> Table {
    let header = ["T", "theta", "phase", "trace", "error"];
    let grid = MomentumGrid::new(spec.nk).expect("validated nk");
    let temps = spec.temp.expect("validated temp").values();
    let rows = temps
        .par_iter()
        .map(|&t| {
            let cell = holonomy(&spec.model, t, &grid)
                .map(|h| {
                    let values = vec![
                        fmt_f64(h.theta),
                        h.phase.map(fmt_f64).unwrap_or_default(),
                        fmt_f64(h.trace.re),
                    ];
                    let err = h
                        .phase
                        .is_none()
                        .then(|| CoreError::DegeneratePhase(h.trace.norm()).to_string());
                    (values, err)
                })
                .unwrap_or_else(failed);
            row(&[t], 3, cell)
        })
        .collect();
    Table::new(&header, rows)
}

fn edge_scan(spec: &ScanSpec) -> Table {
    let params = spec.param.as_ref().expect("validated param").range.values();
    let temps = spec.temp.expect("validated temp").values();
    let n = spec.sites;
    let sites: Vec<usize> = if spec.profile {
        (0..n).collect()
    } else {
        let mut s: Vec<usize> = (0..spec.edge_window).collect();
        s.push(n / 2);
        s.sort_unstable();
        s.dedup();
        s
    };
    let blocks: Vec<Vec<Vec<String>>> = params
        .par_iter()
        .map(|&p| {
            let model = spec.model_at(Some(p));
            let spectrum = model.and_then(|m| ChainSpectrum::new(&m, n, Some(&sites)).map(|s| (m, s)));
            let mut out = Vec::new();
            for &t in &temps {
                let (m, sp) = match &spectrum {
                    Ok(x) => x,
                    Err(e) => {
                        if spec.profile {
                            out.push(row(&[p, t], 2, failed(e)));
                        } else {
                            out.push(row(&[p, t], 3, failed(e)));
                        }
                        continue;
                    }
                };
                let mu = spec.mu_qp.unwrap_or_else(|| default_mu_qp(m));
                match sp.occupations(t, mu) {
                    Ok(profile) if spec.profile => {
                        for (i, &occ) in profile.occupation.iter().enumerate() {
                            out.push(row(&[p, t], 2, (vec![profile.sites[i].to_string(), fmt_f64(occ)], None)));
                        }
                    }
                    Ok(profile) => {
                        let edge: f64 =
                            (0..spec.edge_window).map(|i| profile.at(i).unwrap_or(f64::NAN)).sum::<f64>()
                                / spec.edge_window as f64;
                        let bulk = profile.at(profile.middle()).unwrap_or(f64::NAN);
                        let cell = match edge_bulk_ratio_window(&profile, spec.edge_window) {
                            Ok(r) => (vec![fmt_f64(edge), fmt_f64(bulk), fmt_f64(r)], None),
                            Err(e) => (vec![fmt_f64(edge), fmt_f64(bulk)], Some(e.to_string())),
                        };
                        out.push(row(&[p, t], 3, cell));
                    }
                    Err(e) => out.push(row(&[p, t], if spec.profile { 2 } else { 3 }, failed(e))),
                }
            }
            out
        })
        .collect();
    let header: &[&str] = if spec.profile {
        &["param", "T", "site", "n", "error"]
    } else {
        &["param", "T", "n_edge", "n_bulk", "ratio", "error"]
    };
    Table::new(header, blocks.into_iter().flatten().collect())
}

fn gap_curve(spec: &ScanSpec) -> Result<Table> {
    let Model::Bcs(params) = spec.model else {
        return Err(CliError::InvalidSpec("gap-curve requires --model bcs".into()));
    };
    let temps = match spec.temp {
        Some(r) => r.values(),
        None => {
            let tc = critical_temperature(&params).map_err(|e| CliError::InvalidSpec(e.to_string()))?;
            if tc > 0.0 {
                Range::new(0.0, tc, 101)?.values()
            } else {
                vec![0.0]
            }
        }
    };
    let rows = temps
        .par_iter()
        .map(|&t| {
            let cell = solve_gap(t, &params)
                .map(|g| {
                    (
                        vec![
                            fmt_f64(g.delta),
                            g.converged.to_string(),
                            g.iterations.to_string(),
                            fmt_f64(g.residual),
                        ],
                        None,
                    )
                })
                .unwrap_or_else(failed);
            row(&[t], 4, cell)
        })
        .collect();
    Ok(Table::new(&["T", "gap", "converged", "iterations", "residual", "error"], rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, 1.0, 0.1, 1e-5, 123456.789, 1e-300, 6.02e23, -3.5e-7, 0.9633] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(0.01), "0.01");
        assert_eq!(fmt_f64(1e-5), "1e-5");
    }

    #[test]
    fn row_padding() {
        let r = row(&[0.5, 0.1], 3, failed("boom"));
        assert_eq!(r, vec!["0.5", "0.1", "", "", "", "boom"]);
    }
}
