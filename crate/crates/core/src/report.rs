//! JSON report and CSV table emission.
//!
//! Floats are written in shortest round-trip form, CSV uses `,` and `\n`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::Result;

/// Full report: library version, resolved configuration and results.
#[derive(Debug, Serialize)]
pub struct Report<'a, C: Serialize, R: Serialize> {
    pub experiment: &'a str,
    pub version: &'a str,
    pub config: &'a C,
    pub result: &'a R,
}

pub fn report_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, ".report.json")
}

pub fn data_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, ".data.csv")
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Serialize `rows` as CSV with a header row.
pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Write `<prefix>.report.json` and `<prefix>.data.csv` (already rendered).
pub fn write_outputs<C: Serialize, R: Serialize>(
    prefix: &Path,
    experiment: &str,
    config: &C,
    result: &R,
    csv: &str,
) -> Result<(PathBuf, PathBuf)> {
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let report = Report {
        experiment,
        version: crate::VERSION,
        config,
        result,
    };
    let (rp, dp) = (report_path(prefix), data_path(prefix));
    fs::File::create(&rp)?.write_all(json_string(&report)?.as_bytes())?;
    fs::File::create(&dp)?.write_all(csv.as_bytes())?;
    Ok((rp, dp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Row {
        n: u64,
        v: f64,
        flag: bool,
        t: Option<f64>,
    }

    #[test]
    fn csv_round_trips_floats_exactly() {
        let rows: Vec<Row> = [0.1, 1.0 / 3.0, 1e-300, -2.5e17, f64::MIN_POSITIVE, 0.30000000000000004]
            .iter()
            .enumerate()
            .map(|(i, &v)| Row {
                n: i as u64,
                v,
                flag: i % 2 == 0,
                t: (i % 3 == 0).then_some(v),
            })
            .collect();
        let s = csv_string(&rows).unwrap();
        assert!(s.starts_with("n,v,flag,t\n"));
        assert!(!s.contains('\r'));
        let back: Vec<Row> = csv::Reader::from_reader(s.as_bytes())
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn output_names() {
        let p = Path::new("out/rate-seed7");
        assert_eq!(report_path(p), Path::new("out/rate-seed7.report.json"));
        assert_eq!(data_path(p), Path::new("out/rate-seed7.data.csv"));
    }
}
