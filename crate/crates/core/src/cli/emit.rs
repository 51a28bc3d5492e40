use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{BenchmarkRow, BenchmarkTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    Csv,
    Markdown,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config { key: "format".into(), reason: format!("unknown format `{s}`") }),
        }
    }
}

pub const CSV_HEADER: [&str; 12] = [
    "scenario", "selector", "V", "C", "overpen", "C_or", "se_or", "C_path_or", "se_path_or",
    "C_prime_or", "N", "drops",
];

/// Row labels in table order; anything else follows in input order.
pub const TABLE_ORDER: [&str; 21] = [
    "epenid", "epenid+", "mal", "mal+", "mal*", "mal*+", "2fcv", "5fcv", "10fcv", "20fcv", "loo",
    "pen2f", "pen5f", "pen10f", "pen20f", "penloo", "pen2f+", "pen5f+", "pen10f+", "pen20f+",
    "penloo+",
];

fn table_rank(label: &str) -> usize {
    TABLE_ORDER.iter().position(|l| *l == label).unwrap_or(TABLE_ORDER.len())
}

/// `x` rounded to four significant digits.
pub fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (3 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new digit (9.9996 -> 10.000)
    let rounded: f64 = s.parse().unwrap_or(x);
    let m2 = rounded.abs().log10().floor() as i32;
    if m2 != magnitude {
        let decimals = (3 - m2).max(0) as usize;
        return format!("{x:.decimals$}");
    }
    s
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_row(r: &BenchmarkRow) -> String {
    [
        r.scenario.clone(),
        r.selector.clone(),
        opt(r.v),
        opt(r.c),
        r.overpen.to_string(),
        r.c_or.to_string(),
        r.se_or.to_string(),
        r.c_path_or.to_string(),
        r.se_path_or.to_string(),
        r.c_prime_or.to_string(),
        r.n_reps.to_string(),
        r.drops.to_string(),
    ]
    .join(",")
}

pub fn to_csv(tables: &[BenchmarkTable]) -> String {
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    for t in tables {
        for r in &t.rows {
            out.push_str(&csv_row(r));
            out.push('\n');
        }
    }
    out
}

/// One column per scenario, `C_or ± se` in each cell, rows in table order.
pub fn to_markdown(tables: &[BenchmarkTable]) -> String {
    let mut labels: Vec<&str> = Vec::new();
    for t in tables {
        for r in &t.rows {
            if !labels.contains(&r.selector.as_str()) {
                labels.push(&r.selector);
            }
        }
    }
    labels.sort_by_key(|l| table_rank(l));

    let mut out = String::from("| selector |");
    for t in tables {
        let _ = write!(out, " {} (N={}) |", t.scenario, t.n_reps);
    }
    out.push_str("\n|---|");
    for _ in tables {
        out.push_str("---|");
    }
    out.push('\n');
    for label in labels {
        let _ = write!(out, "| {label} |");
        for t in tables {
            match t.rows.iter().find(|r| r.selector == label) {
                Some(r) => {
                    let _ = write!(out, " {} ± {} |", sig4(r.c_or), sig4(r.se_or));
                }
                None => out.push_str("  |"),
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct JsonRow<'a> {
    #[serde(flatten)]
    row: &'a BenchmarkRow,
    display: JsonDisplay,
}

#[derive(Serialize)]
struct JsonDisplay {
    c_or: String,
    se_or: String,
    c_path_or: String,
    se_path_or: String,
    c_prime_or: String,
}

#[derive(Serialize)]
struct JsonTable<'a> {
    scenario: &'a str,
    seed: u64,
    n_reps: usize,
    rows: Vec<JsonRow<'a>>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    tables: Vec<JsonTable<'a>>,
}

/// Parsed form of [`to_json`] output; the rounded `display` strings are ignored.
#[derive(Debug, Deserialize)]
pub struct JsonInput {
    pub tables: Vec<BenchmarkTable>,
}

/// Full-precision fields plus a `display` object with rounded strings.
pub fn to_json(tables: &[BenchmarkTable]) -> String {
    let report = JsonReport {
        tables: tables
            .iter()
            .map(|t| JsonTable {
                scenario: &t.scenario,
                seed: t.seed,
                n_reps: t.n_reps,
                rows: t
                    .rows
                    .iter()
                    .map(|r| JsonRow {
                        row: r,
                        display: JsonDisplay {
                            c_or: sig4(r.c_or),
                            se_or: sig4(r.se_or),
                            c_path_or: sig4(r.c_path_or),
                            se_path_or: sig4(r.se_path_or),
                            c_prime_or: sig4(r.c_prime_or),
                        },
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("tables serialize");
    s.push('\n');
    s
}

pub fn parse_json(s: &str) -> Result<Vec<BenchmarkTable>> {
    let input: JsonInput = serde_json::from_str(s).map_err(|e| Error::InvalidData(e.to_string()))?;
    Ok(input.tables)
}

pub fn emit_table(tables: &[BenchmarkTable], format: Format) -> Vec<u8> {
    match format {
        Format::Csv => to_csv(tables),
        Format::Markdown => to_markdown(tables),
        Format::Json => to_json(tables),
    }
    .into_bytes()
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(selector: &str) -> BenchmarkRow {
        BenchmarkRow {
            scenario: "S1".into(),
            selector: selector.into(),
            v: Some(5),
            c: Some(4.0),
            overpen: 1.25,
            c_or: 1.9281234567,
            se_or: 0.0412345,
            c_path_or: 2.1,
            se_path_or: 0.05,
            c_prime_or: 1.5,
            n_reps: 100,
            drops: 0,
        }
    }

    fn table(rows: Vec<BenchmarkRow>) -> BenchmarkTable {
        BenchmarkTable { scenario: "S1".into(), seed: 1, n_reps: 100, rows }
    }

    #[test]
    fn sig4_examples() {
        assert_eq!(sig4(1.9281234), "1.928");
        assert_eq!(sig4(0.0412345), "0.04123");
        assert_eq!(sig4(12.3456), "12.35");
        assert_eq!(sig4(9.99996), "10.00");
        assert_eq!(sig4(1234.6), "1235");
        assert_eq!(sig4(0.0), "0");
    }

    #[test]
    fn csv_shapes() {
        assert_eq!(to_csv(&[]), CSV_HEADER.join(",") + "\n");
        assert_eq!(to_csv(&[table(vec![])]).lines().count(), 1);
        let csv = to_csv(&[table(vec![row("pen5f+")])]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].split(',').count(), 12);
        assert!(lines[1].starts_with("S1,pen5f+,5,4,1.25,1.9281234567,"));
    }

    #[test]
    fn markdown_follows_table_order() {
        let md = to_markdown(&[table(vec![row("penloo+"), row("custom"), row("2fcv"), row("mal")])]);
        let labels: Vec<&str> = md.lines().skip(2).map(|l| l.split('|').nth(1).unwrap().trim()).collect();
        assert_eq!(labels, vec!["mal", "2fcv", "penloo+", "custom"]);
        assert!(md.contains("1.928 ± 0.04123"));
    }

    #[test]
    fn json_round_trip() {
        let t = vec![table(vec![row("mal"), BenchmarkRow { v: None, c: None, ..row("epenid") }])];
        let s = to_json(&t);
        assert!(s.contains("\"display\""));
        assert_eq!(parse_json(&s).unwrap(), t);
    }

    #[test]
    fn atomic_write() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"a,b\n").unwrap();
        write_atomic(&p, b"c,d\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "c,d\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn formats_parse() {
        assert_eq!("md".parse::<Format>().unwrap(), Format::Markdown);
        assert!(matches!("xml".parse::<Format>(), Err(Error::Config { .. })));
    }
}
