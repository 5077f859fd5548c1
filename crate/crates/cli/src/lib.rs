//! Front end for `rabi`: configuration, dispatch and deterministic output.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rabi_core::criticality::{run_sweep, SlopeSeries};
use rabi_core::eigensolver::{converge_ground_state, solve_sectors, DEFAULT_SEED};
use rabi_core::semiclassics::{SemiclassicalPrediction, Side};
use rabi_core::ModelSpec;
use rayon::prelude::*;

pub use config::{parse_config, Format, RunConfig, SweepConfig};
use output::{comment_line, emit_records, fmt_f64, read_table, write_table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error(transparent)]
    Core(#[from] rabi_core::Error),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Exit status of a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    Unconverged,
}

impl Outcome {
    fn from_flags(mut flags: impl Iterator<Item = bool>) -> Self {
        if flags.all(|c| c) {
            Self::Converged
        } else {
            Self::Unconverged
        }
    }

    pub fn code(self) -> i32 {
        match self {
            Self::Converged => 0,
            Self::Unconverged => 2,
        }
    }
}

/// Caps the global rayon pool from `RABI_THREADS`.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("RABI_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("RABI_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg {
        RunConfig::Sweep(s) | RunConfig::Thermal(s) => {
            let records = run_sweep(&s.grid, &s.trunc)?;
            emit_records(&records, s.format, &s.out, s.seed)?;
            Ok(Outcome::from_flags(records.iter().map(|r| r.converged)))
        }
        RunConfig::Spectrum { sweep, levels } => spectrum(sweep, *levels),
        RunConfig::Slope { input, out } => slope(input, out),
        RunConfig::Semiclassical { grid, out } => semiclassical(grid, out.as_deref()),
    }
}

fn spectrum(s: &SweepConfig, levels: usize) -> Result<Outcome, CliError> {
    let g = &s.grid;
    let mut items = Vec::new();
    for &ratio in &g.ratios {
        for &n_q in &g.n_qubits_list {
            for &lr in &g.lambda_points {
                items.push((ratio, n_q, lr));
            }
        }
    }
    let blocks: Vec<(Vec<Vec<String>>, bool)> = items
        .par_iter()
        .map(|&(ratio, n_q, lr)| {
            let solved = ModelSpec::from_ratios(ratio, lr, n_q).and_then(|spec| {
                let c = converge_ground_state(&spec, &s.trunc, g.solver, g.seed)?;
                let n_max = c.record.n_max_used;
                let (merged, parities) = solve_sectors(&spec, n_max, levels, g.solver, false, g.seed)?.merged(levels);
                Ok((merged.eigenvalues, parities, n_max, c.record.converged && merged.converged))
            });
            let head = [fmt_f64(ratio), fmt_f64(lr), n_q.to_string()];
            match solved {
                Ok((values, parities, n_max, conv)) => {
                    let rows = values
                        .iter()
                        .zip(&parities)
                        .enumerate()
                        .map(|(i, (e, p))| {
                            let mut row = head.to_vec();
                            row.extend([i.to_string(), fmt_f64(*e), p.to_string(), n_max.to_string(), conv.to_string()]);
                            row
                        })
                        .collect();
                    (rows, conv)
                }
                Err(_) => {
                    let mut row = head.to_vec();
                    row.extend(["0".into(), fmt_f64(f64::NAN), String::new(), "0".into(), "false".into()]);
                    (vec![row], false)
                }
            }
        })
        .collect();
    let header: Vec<String> = ["ratio", "lambda_rel", "n_qubits", "level", "energy", "parity", "n_max_used", "converged"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let flags: Vec<bool> = blocks.iter().map(|b| b.1).collect();
    let rows: Vec<Vec<String>> = blocks.into_iter().flat_map(|b| b.0).collect();
    write_table(&s.out, &comment_line(s.seed), &header, &rows)?;
    Ok(Outcome::from_flags(flags.into_iter()))
}

fn slope(input: &Path, out: &Path) -> Result<Outcome, CliError> {
    let (comment, mut header, mut rows) = read_table(input)?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("{}: missing column {name}", input.display())))
    };
    let (ci_ratio, ci_n, ci_t) = (col("ratio")?, col("n_qubits")?, col("temperature")?);
    let (ci_l, ci_s, ci_conv) = (col("lambda_rel")?, col("entropy_S")?, col("converged")?);
    let num = |row: &[String], i: usize| -> Result<f64, CliError> {
        row[i]
            .parse()
            .map_err(|_| CliError::Usage(format!("{}: cannot parse `{}`", input.display(), row[i])))
    };
    let mut groups: BTreeMap<(String, String, String), Vec<usize>> = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        let key = (row[ci_ratio].clone(), row[ci_n].clone(), row[ci_t].clone());
        groups.entry(key).or_default().push(i);
    }
    let mut extra = vec![[f64::NAN; 3]; rows.len()];
    for idx in groups.values() {
        let mut pts = Vec::new();
        for &i in idx {
            let (l, s) = (num(&rows[i], ci_l)?, num(&rows[i], ci_s)?);
            if l > 1.0 && s > 0.0 {
                extra[i][0] = (l - 1.0).log10();
                extra[i][1] = s.log10();
                pts.push((l, i));
            }
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        let owners: Vec<usize> = pts.iter().map(|p| p.1).collect();
        let series = SlopeSeries::new(
            owners.iter().map(|&i| extra[i][0]).collect(),
            owners.iter().map(|&i| extra[i][1]).collect(),
        );
        if let Ok(series) = series {
            for (k, s) in series.slopes.iter().enumerate() {
                extra[owners[k + 1]][2] = *s;
            }
        }
    }
    let conv = rows.iter().map(|r| r[ci_conv] == "true").collect::<Vec<_>>();
    header.extend(["log_distance", "log_entropy", "slope_S"].map(String::from));
    for (row, e) in rows.iter_mut().zip(&extra) {
        row.extend(e.iter().map(|&v| fmt_f64(v)));
    }
    let comment = comment.unwrap_or_else(|| comment_line(DEFAULT_SEED));
    write_table(out, &comment, &header, &rows)?;
    Ok(Outcome::from_flags(conv.into_iter()))
}

fn semiclassical(grid: &rabi_core::criticality::SweepGrid, out: Option<&Path>) -> Result<Outcome, CliError> {
    let header: Vec<String> = [
        "ratio",
        "lambda_rel",
        "n_qubits",
        "lambda_c",
        "side",
        "gap_below",
        "gap_above",
        "alpha_full",
        "alpha_near",
        "theta",
        "overlap",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let opt = |v: Option<f64>| v.map_or_else(String::new, fmt_f64);
    let mut rows = Vec::new();
    for &ratio in &grid.ratios {
        for &n_q in &grid.n_qubits_list {
            for &lr in &grid.lambda_points {
                let p = SemiclassicalPrediction::new(&ModelSpec::from_ratios(ratio, lr, n_q)?)?;
                let side = match p.valid_side {
                    Side::Below => "below",
                    Side::At => "at",
                    Side::Above => "above",
                };
                rows.push(vec![
                    fmt_f64(ratio),
                    fmt_f64(lr),
                    n_q.to_string(),
                    fmt_f64(p.lambda_c),
                    side.to_string(),
                    opt(p.gap_below),
                    opt(p.gap_above),
                    fmt_f64(p.alpha_full),
                    fmt_f64(p.alpha_near),
                    fmt_f64(p.theta),
                    fmt_f64(p.overlap),
                ]);
            }
        }
    }
    match out {
        Some(path) => write_table(path, &comment_line(grid.seed), &header, &rows)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            writeln!(lock, "{}", comment_line(grid.seed))?;
            let mut w = csv::Writer::from_writer(lock);
            w.write_record(&header)?;
            for r in &rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
    }
    Ok(Outcome::Converged)
}
