//! Run bookkeeping: CSV tables, pass/fail criteria and the JSON summary.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qvalued::{csv_error, fmt as fmt_float};

/// Version written in the first line of every CSV.
pub const CSV_SCHEMA: u32 = 1;
/// Version of the `summary.json` layout.
pub const SUMMARY_SCHEMA: u32 = 1;
pub const SUMMARY_FILE: &str = "summary.json";

/// Comparison a criterion value must satisfy. NaN never passes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "threshold", rename_all = "kebab-case")]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Below(f64),
    Above(f64),
}

impl Bound {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost(t) => v <= t,
            Bound::AtLeast(t) => v >= t,
            Bound::Below(t) => v < t,
            Bound::Above(t) => v > t,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::AtMost(t) => write!(f, "<= {t:e}"),
            Bound::AtLeast(t) => write!(f, ">= {t:e}"),
            Bound::Below(t) => write!(f, "< {t:e}"),
            Bound::Above(t) => write!(f, "> {t:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    /// What `value` measures.
    pub description: String,
    pub value: f64,
    pub bound: Bound,
    pub pass: bool,
    /// CSV the value is recomputed from.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema: u32,
    pub scenario: String,
    pub seed: i64,
    pub pass: bool,
    pub criteria: Vec<CriterionResult>,
    /// Headline numbers, keyed by name.
    pub numbers: BTreeMap<String, f64>,
    /// CSVs written, relative to the output directory.
    pub files: Vec<String>,
    pub wall_time_s: f64,
    /// Set when the run stopped on a numerical failure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunSummary {
    pub fn criterion(&self, name: &str) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.name == name)
    }
}

/// A CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => fmt_float(*v),
            Cell::I(v) => v.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

/// Shorthand for a row of cells.
#[macro_export]
#[doc(hidden)]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::scenarios::Cell::from($x)),*] };
}

/// Collects outputs of one run into a directory.
#[derive(Debug)]
pub struct Recorder {
    dir: PathBuf,
    criteria: Vec<CriterionResult>,
    numbers: BTreeMap<String, f64>,
    files: Vec<String>,
}

impl Recorder {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), criteria: vec![], numbers: BTreeMap::new(), files: vec![] })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes `name` as a comment line `# varilab <kind> csv-schema N`, a
    /// header and the rows.
    pub fn csv(&mut self, name: &str, kind: &str, columns: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
        let mut file = BufWriter::new(File::create(self.dir.join(name))?);
        writeln!(file, "# varilab {kind} csv-schema {CSV_SCHEMA}")?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(columns).map_err(csv_error)?;
        for r in rows {
            debug_assert_eq!(r.len(), columns.len(), "{name}");
            w.write_record(r.iter().map(Cell::render)).map_err(csv_error)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Raw writer for large tables; the caller writes the schema line.
    pub fn raw(&mut self, name: &str) -> Result<BufWriter<File>> {
        let f = BufWriter::new(File::create(self.dir.join(name))?);
        self.files.push(name.to_string());
        Ok(f)
    }

    pub fn criterion(&mut self, name: &str, description: &str, value: f64, bound: Bound, source: &str) {
        self.criteria.push(CriterionResult {
            name: name.to_string(),
            description: description.to_string(),
            value,
            pass: bound.holds(value),
            bound,
            source: source.to_string(),
        });
    }

    pub fn number(&mut self, key: &str, value: f64) {
        self.numbers.insert(key.to_string(), value);
    }

    pub fn finish(self, scenario: &str, seed: i64, wall_time_s: f64, error: Option<String>) -> Result<RunSummary> {
        let summary = RunSummary {
            schema: SUMMARY_SCHEMA,
            scenario: scenario.to_string(),
            seed,
            pass: error.is_none() && self.criteria.iter().all(|c| c.pass),
            criteria: self.criteria,
            numbers: self.numbers,
            files: self.files,
            wall_time_s,
            error,
        };
        let file = BufWriter::new(File::create(self.dir.join(SUMMARY_FILE))?);
        serde_json::to_writer_pretty(file, &summary).map_err(std::io::Error::other)?;
        Ok(summary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert!(Bound::AtMost(1.0).holds(1.0));
        assert!(!Bound::Below(1.0).holds(1.0));
        assert!(!Bound::AtLeast(0.0).holds(f64::NAN));
        assert!(Bound::Above(0.05).holds(0.1));
    }

    #[test]
    fn csv_has_schema_line_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let mut rec = Recorder::new(dir.path()).unwrap();
        rec.csv("t.csv", "test", &["a", "b"], &[row![1.5, 2usize], row![0.25, 3usize]]).unwrap();
        rec.criterion("c", "a", 1.5, Bound::AtMost(2.0), "t.csv");
        let s = rec.finish("x", 0, 0.0, None).unwrap();
        assert!(s.pass);
        let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# varilab test csv-schema 1"));
        assert_eq!(lines.next(), Some("a,b"));
        let back: RunSummary =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
