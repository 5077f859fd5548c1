//! CSV and JSON-lines writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rabi_core::observables::{ObservableRecord, N_GAPS};

use crate::config::Format;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column names of a record row.
pub fn record_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "ratio",
        "lambda_rel",
        "n_qubits",
        "temperature",
        "entropy_S",
        "corr_C",
        "squeeze_sp1",
        "alpha_cond",
        "e0",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend((1..=N_GAPS).map(|i| format!("gap{i}")));
    h.push("n_max_used".into());
    h.push("converged".into());
    h
}

/// Shortest round-trip decimal.
pub fn fmt_f64(v: f64) -> String {
    ryu::Buffer::new().format(v).to_string()
}

pub fn record_row(r: &ObservableRecord) -> Vec<String> {
    let mut row = vec![
        fmt_f64(r.ratio),
        fmt_f64(r.lambda_rel),
        r.n_qubits.to_string(),
        fmt_f64(r.temperature),
        fmt_f64(r.entropy_s),
        fmt_f64(r.corr_c),
        fmt_f64(r.squeeze_sp1),
        fmt_f64(r.alpha_cond),
        fmt_f64(r.e0),
    ];
    row.extend(r.gaps.iter().map(|&g| fmt_f64(g)));
    row.push(r.n_max_used.to_string());
    row.push(r.converged.to_string());
    row
}

pub fn comment_line(seed: u64) -> String {
    format!("# seed={seed} version={VERSION}")
}

/// Writes a comment line, a header and rows as CSV.
pub fn write_table(path: &Path, comment: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "{comment}")?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_records(records: &[ObservableRecord], format: Format, path: &Path, seed: u64) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = records.iter().map(record_row).collect();
            write_table(path, &comment_line(seed), &record_header(), &rows)
        }
        Format::Jsonl => {
            let mut file = BufWriter::new(File::create(path)?);
            for r in records {
                serde_json::to_writer(&mut file, r)?;
                writeln!(file)?;
            }
            file.flush()?;
            Ok(())
        }
    }
}

/// Header, leading comment and string rows of a CSV written by [`write_table`].
pub fn read_table(path: &Path) -> Result<(Option<String>, Vec<String>, Vec<Vec<String>>), CliError> {
    let text = std::fs::read_to_string(path)?;
    let comment = text.lines().next().filter(|l| l.starts_with('#')).map(str::to_string);
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok((comment, header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_schema() {
        assert_eq!(
            record_header().join(","),
            "ratio,lambda_rel,n_qubits,temperature,entropy_S,corr_C,squeeze_sp1,alpha_cond,e0,\
             gap1,gap2,gap3,gap4,gap5,gap6,gap7,gap8,gap9,gap10,n_max_used,converged"
        );
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1e-7, -0.5000000554343299, 1.0 / 3.0, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(1e-7), "1e-7");
    }

    #[test]
    fn empty_sweep_is_comment_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        emit_records(&[], Format::Csv, &p, 7).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], format!("# seed=7 version={VERSION}"));
        assert!(lines[1].starts_with("ratio,lambda_rel"));
    }
}
