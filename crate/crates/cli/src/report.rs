//! `report.json` sections and tab-separated plot data.

use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};
use crate::{io, names};

/// Replaces section `key` of `out/report.json`, keeping the others.
pub fn upsert_section<T: Serialize>(out: &Path, key: &str, section: &T) -> CliResult<()> {
    let path = out.join(names::REPORT);
    let mut root = if path.is_file() {
        match io::read_json::<Value>(&path)? {
            Value::Object(map) => map,
            _ => return Err(CliError::Data(format!("{}: expected a JSON object", path.display()))),
        }
    } else {
        Map::new()
    };
    let value = serde_json::to_value(section).map_err(|e| CliError::Data(e.to_string()))?;
    root.insert(key.to_string(), value);
    io::write_json(&path, &Value::Object(root))
}

/// A TSV table under `out/plots/`.
pub struct PlotTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl PlotTable {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_text(&self) -> String {
        let mut out = self.header.join("\t");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, out: &Path, file: &str) -> CliResult<()> {
        io::write_text(&out.join(names::PLOTS_DIR).join(file), &self.to_text())
    }
}

/// `NA` for a missing value.
pub fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "NA".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_are_merged_not_replaced() {
        let dir = tempfile::tempdir().unwrap();
        upsert_section(dir.path(), "b", &1).unwrap();
        upsert_section(dir.path(), "a", &vec![2, 3]).unwrap();
        upsert_section(dir.path(), "b", &4).unwrap();
        let text = std::fs::read_to_string(dir.path().join(names::REPORT)).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v, serde_json::json!({"a": [2, 3], "b": 4}));
        assert!(text.find("\"a\"").unwrap() < text.find("\"b\"").unwrap());
    }

    #[test]
    fn tsv_layout() {
        let mut t = PlotTable::new(&["x", "y"]);
        t.push(vec!["15".into(), cell(Some(0.5))]);
        t.push(vec!["25".into(), cell(None)]);
        assert_eq!(t.to_text(), "x\ty\n15\t0.5\n25\tNA\n");
    }
}
