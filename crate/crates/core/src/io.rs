//! Run persistence: CSV tables, key-value summaries, and atomic output directories
//! stamped with the effective configuration, its hash and the crate version.

use crate::error::{Error, Result};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

/// Environment variable naming the output root.
pub const OUT_ENV: &str = "PMLAB_OUT";

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

pub fn output_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"))
}

/// Shortest round-trip representation, so identical values give identical bytes.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(file: &str, header: &[&str]) -> Self {
        CsvTable { file: file.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&v| fmt_f64(v)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            if r.len() != self.header.len() {
                return Err(Error::State(format!("{}: row has {} fields, header {}", self.file, r.len(), self.header.len())));
            }
            w.write_record(r).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::State(format!("csv flush: {e}")))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::State(format!("csv: {e}"))
}

/// Read `(t, value)` pairs from a CSV with a header, picking the named value
/// column (or the second column) and the column `t` (or the first).
pub fn read_series(path: &Path, column: Option<&str>) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let header = r.headers().map_err(csv_err)?.clone();
    let find = |name: &str| header.iter().position(|h| h.trim() == name);
    let ti = find("t").unwrap_or(0);
    let vi = match column {
        Some(c) => find(c).ok_or_else(|| Error::Config(format!("column '{c}' not in {}", path.display())))?,
        None if header.len() >= 2 => {
            if ti == 0 {
                1
            } else {
                0
            }
        }
        None => return Err(Error::Config(format!("{} needs at least two columns", path.display()))),
    };
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::Config("short record".into()))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number in {}: {e}", path.display())))
        };
        out.push((parse(ti)?, parse(vi)?));
    }
    Ok(out)
}

/// Everything a command writes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunArtifacts {
    pub config_echo: String,
    pub summary: Vec<(String, String)>,
    pub tables: Vec<CsvTable>,
}

impl RunArtifacts {
    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.summary {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(v);
            s.push('\n');
        }
        s
    }
}

pub fn config_hash(echo: &str) -> String {
    hex::encode(Sha256::digest(echo.as_bytes()))
}

/// Write into a sibling temporary directory, then rename over `dir`. A failure
/// leaves no directory at `dir` other than whatever was there before.
pub fn write_run(dir: &Path, art: &RunArtifacts) -> Result<PathBuf> {
    if art.tables.is_empty() {
        return Err(Error::State("a run must produce at least one data file".into()));
    }
    let parent = dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(parent)?;
    let name = dir.file_name().ok_or_else(|| Error::Config(format!("output dir {} has no name", dir.display())))?;
    let tmp = parent.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    if tmp.exists() {
        fs::remove_dir_all(&tmp)?;
    }
    let result = (|| -> Result<()> {
        fs::create_dir(&tmp)?;
        fs::write(tmp.join("config.toml"), &art.config_echo)?;
        fs::write(tmp.join("config.sha256"), format!("{}\n", config_hash(&art.config_echo)))?;
        fs::write(tmp.join("VERSION"), format!("{VERSION}\n"))?;
        fs::write(tmp.join("summary.txt"), art.summary_text())?;
        for t in &art.tables {
            if t.file.contains('/') || t.file.contains("..") {
                return Err(Error::State(format!("bad table name {}", t.file)));
            }
            fs::write(tmp.join(&t.file), t.to_bytes()?)?;
        }
        Ok(())
    })();
    if let Err(e) = result {
        let _ = fs::remove_dir_all(&tmp);
        return Err(e);
    }
    if dir.exists() {
        fs::remove_dir_all(dir)?;
    }
    fs::rename(&tmp, dir)?;
    Ok(dir.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunArtifacts {
        let mut t = CsvTable::new("series.csv", &["t", "value"]);
        t.push_f64(&[0.0, 1.0]);
        t.push_f64(&[0.5, 1e-300]);
        let mut a = RunArtifacts { config_echo: "seed = 1\n".into(), ..Default::default() };
        a.note("status", "PASS");
        a.tables.push(t);
        a
    }

    #[test]
    fn run_dir_has_stamps_and_is_reproducible() {
        let root = tempfile::tempdir().unwrap();
        let d = root.path().join("run");
        write_run(&d, &sample()).unwrap();
        for f in ["config.toml", "config.sha256", "VERSION", "summary.txt", "series.csv"] {
            assert!(d.join(f).exists(), "{f}");
        }
        let first = fs::read(d.join("series.csv")).unwrap();
        write_run(&d, &sample()).unwrap();
        assert_eq!(first, fs::read(d.join("series.csv")).unwrap());
        let back = read_series(&d.join("series.csv"), None).unwrap();
        assert_eq!(back, vec![(0.0, 1.0), (0.5, 1e-300)]);
    }

    #[test]
    fn failed_write_leaves_nothing() {
        let root = tempfile::tempdir().unwrap();
        let d = root.path().join("run");
        let mut a = sample();
        a.tables[0].rows.push(vec!["1".into()]);
        assert!(write_run(&d, &a).is_err());
        assert_eq!(fs::read_dir(root.path()).unwrap().count(), 0);
        assert!(write_run(&d, &RunArtifacts::default()).is_err());
    }
}
