use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, Result};
use crate::scan::fmt_f64;

/// One line of a transition report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    /// `depth = 1 - min_param F` at one temperature.
    Drop {
        #[serde(rename = "T")]
        t: f64,
        depth: f64,
        argmin: f64,
        f_min: f64,
        cells: usize,
    },
    /// Whether the drop depth falls strictly with temperature.
    DropTrend { strictly_decreasing: bool },
    /// Cells with `delta` above the threshold, in parameter order.
    DeltaMask {
        #[serde(rename = "T")]
        t: f64,
        positive: usize,
        cells: usize,
        mask: String,
    },
    /// Jump of the Uhlmann phase between adjacent temperatures.
    PhaseStep {
        param: Option<f64>,
        t_u: f64,
        t_below: f64,
        t_above: f64,
        phase_below: f64,
        phase_above: f64,
    },
    /// Temperatures bracketing the first vanishing gap.
    GapClosing { t_below: f64, t_above: f64 },
    FailedCells { failed: usize, cells: usize },
}

struct Columns {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Columns {
    fn index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn number(&self, row: usize, col: usize) -> Result<Option<f64>> {
        let s = self.rows[row].get(col).map(|s| s.trim()).unwrap_or("");
        if s.is_empty() {
            return Ok(None);
        }
        s.parse()
            .map(Some)
            .map_err(|_| CliError::MalformedCsv(format!("row {}: '{s}' is not a number", row + 2)))
    }
}

fn read(text: &str) -> Result<Columns> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::MalformedCsv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::MalformedCsv(e.to_string()))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(Columns { header, rows })
}

pub fn summarize_file(path: &Path, delta_threshold: f64) -> Result<Vec<Record>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    summarize(&text, delta_threshold)
}

/// Transition report for the CSV text of a scan.
pub fn summarize(text: &str, delta_threshold: f64) -> Result<Vec<Record>> {
    let cols = read(text)?;
    let t_col = cols
        .index("T")
        .ok_or_else(|| CliError::MalformedCsv("no T column".into()))?;
    let param_col = cols.index("param");
    let mut out = Vec::new();
    let mut recognised = false;

    if let (Some(pc), Some(fc)) = (param_col, cols.index("F")) {
        recognised = true;
        let mut by_t: BTreeMap<u64, (f64, f64, f64, usize)> = BTreeMap::new();
        let mut order = Vec::new();
        for r in 0..cols.rows.len() {
            let (Some(t), Some(p), Some(f)) = (cols.number(r, t_col)?, cols.number(r, pc)?, cols.number(r, fc)?) else {
                continue;
            };
            let e = by_t.entry(t.to_bits()).or_insert_with(|| {
                order.push(t);
                (t, f64::INFINITY, f64::NAN, 0)
            });
            e.3 += 1;
            if f < e.1 {
                e.1 = f;
                e.2 = p;
            }
        }
        order.sort_by(f64::total_cmp);
        let mut depths = Vec::new();
        for t in order {
            let (t, f_min, argmin, cells) = by_t[&t.to_bits()];
            depths.push(1.0 - f_min);
            out.push(Record::Drop {
                t,
                depth: 1.0 - f_min,
                argmin,
                f_min,
                cells,
            });
        }
        if depths.len() > 1 {
            out.push(Record::DropTrend {
                strictly_decreasing: depths.windows(2).all(|w| w[1] < w[0]),
            });
        }
    }

    if let (Some(_), Some(dc)) = (param_col, cols.index("delta")) {
        recognised = true;
        let mut by_t: BTreeMap<u64, (f64, String)> = BTreeMap::new();
        for r in 0..cols.rows.len() {
            let Some(t) = cols.number(r, t_col)? else { continue };
            let bit = match cols.number(r, dc)? {
                Some(d) if d > delta_threshold => '1',
                Some(_) => '0',
                None => '-',
            };
            by_t.entry(t.to_bits()).or_insert_with(|| (t, String::new())).1.push(bit);
        }
        let mut masks: Vec<(f64, String)> = by_t.into_values().collect();
        masks.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (t, mask) in masks {
            out.push(Record::DeltaMask {
                t,
                positive: mask.chars().filter(|&c| c == '1').count(),
                cells: mask.len(),
                mask,
            });
        }
    }

    if let Some(phc) = cols.index("phase") {
        recognised = true;
        let mut series: BTreeMap<Option<u64>, Vec<(f64, f64)>> = BTreeMap::new();
        let mut params: BTreeMap<Option<u64>, Option<f64>> = BTreeMap::new();
        for r in 0..cols.rows.len() {
            let p = match param_col {
                Some(pc) => cols.number(r, pc)?,
                None => None,
            };
            let (Some(t), Some(ph)) = (cols.number(r, t_col)?, cols.number(r, phc)?) else {
                continue;
            };
            let key = p.map(f64::to_bits);
            params.insert(key, p);
            series.entry(key).or_default().push((t, ph));
        }
        for (key, mut s) in series {
            s.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in s.windows(2) {
                if (w[1].1 - w[0].1).abs() > FRAC_PI_2 {
                    out.push(Record::PhaseStep {
                        param: params[&key],
                        t_u: 0.5 * (w[0].0 + w[1].0),
                        t_below: w[0].0,
                        t_above: w[1].0,
                        phase_below: w[0].1,
                        phase_above: w[1].1,
                    });
                }
            }
        }
    }

    if let (None, Some(gc)) = (param_col, cols.index("gap")) {
        recognised = true;
        let mut s = Vec::new();
        for r in 0..cols.rows.len() {
            if let (Some(t), Some(g)) = (cols.number(r, t_col)?, cols.number(r, gc)?) {
                s.push((t, g));
            }
        }
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = s.windows(2).find(|w| w[0].1 > 0.0 && w[1].1 == 0.0) {
            out.push(Record::GapClosing {
                t_below: w[0].0,
                t_above: w[1].0,
            });
        }
    }

    if !recognised {
        return Err(CliError::MalformedCsv(format!(
            "no known scan columns in header {:?}",
            cols.header
        )));
    }
    if let Some(ec) = cols.index("error") {
        let failed = cols.rows.iter().filter(|r| r.get(ec).is_some_and(|e| !e.is_empty())).count();
        if failed > 0 {
            out.push(Record::FailedCells {
                failed,
                cells: cols.rows.len(),
            });
        }
    }
    Ok(out)
}

/// Human-readable lines, one per record.
pub fn render_text(records: &[Record]) -> String {
    let mut s = String::new();
    let f = |x: f64| fmt_f64(x);
    for r in records {
        let line = match r {
            Record::Drop {
                t,
                depth,
                argmin,
                f_min,
                cells,
            } => format!(
                "drop      T={:<12} D={:<24} argmin={:<12} F_min={:<24} cells={cells}",
                f(*t),
                f(*depth),
                f(*argmin),
                f(*f_min)
            ),
            Record::DropTrend { strictly_decreasing } => {
                format!("trend     D(T) strictly decreasing: {strictly_decreasing}")
            }
            Record::DeltaMask {
                t,
                positive,
                cells,
                mask,
            } => format!("delta>0   T={:<12} {positive:>5}/{cells:<5} {mask}", f(*t)),
            Record::PhaseStep {
                param,
                t_u,
                t_below,
                t_above,
                phase_below,
                phase_above,
            } => format!(
                "step      param={:<12} T_U={:<12} in [{}, {}] phase {} -> {}",
                param.map(f).unwrap_or_else(|| "-".into()),
                f(*t_u),
                f(*t_below),
                f(*t_above),
                f(*phase_below),
                f(*phase_above)
            ),
            Record::GapClosing { t_below, t_above } => {
                format!("gap=0     between T={} and T={}", f(*t_below), f(*t_above))
            }
            Record::FailedCells { failed, cells } => format!("failed    {failed}/{cells} cells"),
        };
        s.push_str(line.trim_end());
        s.push('\n');
    }
    s
}

pub fn render_jsonl(records: &[Record]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
        .collect()
}
