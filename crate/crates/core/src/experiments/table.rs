// SPDX-License-Identifier: MIT OR Apache-2.0

use super::config::RunConfig;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One table entry. `value` is `None` when the computation failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// Coordinate of the cell: the threshold u, or ρ₁ in power tables.
    pub u: f64,
    pub value: Option<f64>,
    pub se: Option<f64>,
}

impl Cell {
    pub fn exact(u: f64, value: f64) -> Self {
        Self { u, value: Some(value), se: None }
    }

    pub fn estimate(u: f64, value: f64, se: f64) -> Self {
        Self { u, value: Some(value), se: Some(se) }
    }

    pub fn failed(u: f64) -> Self {
        Self { u, value: None, se: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub method: String,
    pub cells: Vec<Cell>,
}

/// A named scalar reported alongside the table (fitted slopes and the like).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub value: f64,
    pub se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub command: String,
    pub version: String,
    pub seed: u64,
    /// Hash of the output-determining inputs, see [`input_hash`].
    pub input_hash: String,
    /// Resolved defaults and modelling assumptions.
    pub assumptions: Vec<String>,
    pub warnings: Vec<String>,
    /// Labels of cells whose computation failed.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub title: String,
    /// Column labels, typically the offsets u − ρ₀.
    pub columns: Vec<String>,
    pub config: RunConfig,
    pub rows: Vec<Row>,
    pub summary: Vec<Summary>,
    pub provenance: Provenance,
}

/// Git-style content hash: SHA-256 over `blob <len>\0<content>`, where the
/// content is the canonical config followed by any series file bytes.
pub fn input_hash(cfg: &RunConfig, extra: &[u8]) -> String {
    let mut content = cfg.canonical_inputs().into_bytes();
    if !extra.is_empty() {
        content.push(b'\n');
        content.extend_from_slice(extra);
    }
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(&content);
    hex::encode(h.finalize())
}

impl ResultTable {
    pub fn new(title: impl Into<String>, columns: Vec<String>, cfg: &RunConfig, extra_input: &[u8]) -> Self {
        Self {
            title: title.into(),
            columns,
            config: cfg.clone(),
            rows: Vec::new(),
            summary: Vec::new(),
            provenance: Provenance {
                command: cfg.command.name().to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: cfg.seed_or_default(),
                input_hash: input_hash(cfg, extra_input),
                assumptions: Vec::new(),
                warnings: Vec::new(),
                failures: Vec::new(),
            },
        }
    }

    /// Appends a row, recording failed cells by label.
    pub fn push(&mut self, method: impl Into<String>, cells: Vec<Cell>) {
        let method = method.into();
        for (c, label) in cells.iter().zip(&self.columns) {
            if c.value.is_none() {
                self.provenance.failures.push(format!("{method} @ {label}"));
            }
        }
        self.rows.push(Row { method, cells });
    }

    pub fn row(&self, method: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn values(&self, method: &str) -> Option<Vec<f64>> {
        self.row(method).map(|r| r.cells.iter().map(|c| c.value.unwrap_or(f64::NAN)).collect())
    }

    pub fn assume(&mut self, note: impl Into<String>) {
        self.provenance.assumptions.push(note.into());
    }

    pub fn warn(&mut self, note: impl Into<String>) {
        self.provenance.warnings.push(note.into());
    }

    pub fn has_failures(&self) -> bool {
        !self.provenance.failures.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// CSV body with `# key: json` header lines carrying everything that is
    /// not a cell. Each column contributes value, `_se` and `_u` fields.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(&format!("# title: {}\n", to_json_line(&self.title)?));
        out.push_str(&format!("# columns: {}\n", to_json_line(&self.columns)?));
        out.push_str(&format!("# config: {}\n", to_json_line(&self.config)?));
        out.push_str(&format!("# summary: {}\n", to_json_line(&self.summary)?));
        out.push_str(&format!("# provenance: {}\n", to_json_line(&self.provenance)?));
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["method".to_string()];
        for c in &self.columns {
            header.extend([c.clone(), format!("{c}_se"), format!("{c}_u")]);
        }
        w.write_record(&header).map_err(csv_err)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            if r.cells.len() != self.columns.len() {
                return Err(Error::invalid(format!("row '{}' has {} cells for {} columns", r.method, r.cells.len(), self.columns.len())));
            }
            let mut rec = vec![r.method.clone()];
            for c in &r.cells {
                rec.extend([opt(c.value), opt(c.se), c.u.to_string()]);
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(body).map_err(|e| Error::Parse(e.to_string()))?);
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut meta = std::collections::BTreeMap::new();
        let mut body = String::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("# ") {
                let (k, v) = rest.split_once(": ").ok_or_else(|| Error::Parse(format!("bad header line '{line}'")))?;
                meta.insert(k.to_string(), v.to_string());
            } else {
                body.push_str(line);
                body.push('\n');
            }
        }
        fn field<T: serde::de::DeserializeOwned>(meta: &std::collections::BTreeMap<String, String>, k: &str) -> Result<T> {
            let v = meta.get(k).ok_or_else(|| Error::Parse(format!("missing '# {k}:' header")))?;
            serde_json::from_str(v).map_err(|e| Error::Parse(format!("{k}: {e}")))
        }
        let columns: Vec<String> = field(&meta, "columns")?;
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| Error::Parse(format!("bad number '{s}'")))
            }
        };
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != 1 + 3 * columns.len() {
                return Err(Error::Parse(format!("row has {} fields, expected {}", rec.len(), 1 + 3 * columns.len())));
            }
            let cells = (0..columns.len())
                .map(|j| {
                    let u = opt(&rec[3 + 3 * j])?.ok_or_else(|| Error::Parse("missing cell coordinate".into()))?;
                    Ok(Cell { u, value: opt(&rec[1 + 3 * j])?, se: opt(&rec[2 + 3 * j])? })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(Row { method: rec[0].to_string(), cells });
        }
        Ok(Self {
            title: field(&meta, "title")?,
            columns,
            config: field(&meta, "config")?,
            rows,
            summary: field(&meta, "summary")?,
            provenance: field(&meta, "provenance")?,
        })
    }

    /// Fixed-width rendering for terminals.
    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.method.len()).max().unwrap_or(6).max(6);
        let mut s = format!("{}\n{:width$}", self.title, "");
        for c in &self.columns {
            s.push_str(&format!(" {c:>10}"));
        }
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!("{:width$}", r.method));
            for c in &r.cells {
                match c.value {
                    Some(v) => s.push_str(&format!(" {v:>10.4}")),
                    None => s.push_str(&format!(" {:>10}", "failed")),
                }
            }
            s.push('\n');
        }
        for m in &self.summary {
            match m.se {
                Some(se) => s.push_str(&format!("{} = {:.4} (se {:.4})\n", m.name, m.value, se)),
                None => s.push_str(&format!("{} = {:.4}\n", m.name, m.value)),
            }
        }
        for w in &self.provenance.warnings {
            s.push_str(&format!("warning: {w}\n"));
        }
        s
    }
}

fn to_json_line<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Parse(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::Command;
    use proptest::prelude::*;

    fn sample_table(values: &[(f64, Option<f64>, Option<f64>)]) -> ResultTable {
        let mut cfg = RunConfig::new(Command::Table1);
        cfg.set("n", "39").unwrap();
        let cols: Vec<String> = values.iter().map(|v| format!("+{}", v.0)).collect();
        let mut t = ResultTable::new("demo, with comma", cols, &cfg, b"");
        t.push("U saddlepoint", values.iter().map(|&(u, v, se)| Cell { u, value: v, se }).collect());
        t.push("quoted \"row\", b", values.iter().map(|&(u, _, _)| Cell::exact(u, 1.0 / 3.0)).collect());
        t.summary.push(Summary { name: "slope".into(), value: 4.1, se: Some(0.3) });
        t.assume("level 0.05");
        t
    }

    #[test]
    fn failed_cells_are_listed() {
        let t = sample_table(&[(0.55, Some(0.3), None), (0.6, None, None)]);
        assert!(t.has_failures());
        assert_eq!(t.provenance.failures, vec!["U saddlepoint @ +0.6".to_string()]);
    }

    #[test]
    fn hash_depends_on_series_bytes() {
        let cfg = RunConfig::new(Command::Tail);
        assert_ne!(input_hash(&cfg, b""), input_hash(&cfg, b"1.0\n"));
        assert_eq!(input_hash(&cfg, b"x").len(), 64);
    }

    proptest! {
        #[test]
        fn csv_and_json_round_trip(cells in proptest::collection::vec(
            (-1.0f64..1.0, proptest::option::of(any::<f64>().prop_filter("finite", |x| x.is_finite())),
             proptest::option::of(0.0f64..1.0)), 1..6)) {
            let t = sample_table(&cells);
            prop_assert_eq!(&ResultTable::from_csv(&t.to_csv().unwrap()).unwrap(), &t);
            prop_assert_eq!(&ResultTable::from_json(&t.to_json().unwrap()).unwrap(), &t);
        }
    }
}
