//! Machine-readable reports: JSON, CSV and a plain text view.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{OutputFormat, RunConfig};
use crate::error::{Error, Result};
use crate::verdict::{Status, Verdict};

#[derive(Debug, Clone, Serialize)]
pub struct VerdictRow {
    pub item: String,
    pub status: Status,
    pub evidence: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub results: Vec<Value>,
    pub verdicts: Vec<VerdictRow>,
    /// Wall times and version; left out of determinism comparisons.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Value>,
}

impl Report {
    pub fn new(command: impl Into<String>, config: &RunConfig) -> Report {
        Report { command: command.into(), config: config.clone(), results: Vec::new(), verdicts: Vec::new(), metadata: None }
    }

    pub fn result(&mut self, r: &impl Serialize) -> Result<()> {
        let v = serde_json::to_value(r).map_err(|e| Error::InvalidArgument(format!("serialize: {e}")))?;
        self.results.push(v);
        Ok(())
    }

    pub fn verdict(&mut self, item: impl Into<String>, v: &Verdict) {
        self.verdicts.push(VerdictRow { item: item.into(), status: v.status, evidence: v.evidence.clone() });
    }

    pub fn any_falsified(&self) -> bool {
        self.verdicts.iter().any(|v| v.status == Status::Falsified)
    }

    pub fn render(&self, fmt: OutputFormat) -> Result<String> {
        match fmt {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::InvalidArgument(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            OutputFormat::Csv => self.csv(),
            OutputFormat::Plain => Ok(self.plain()),
        }
    }

    fn csv(&self) -> Result<String> {
        let mut rows: Vec<Vec<(String, String)>> = Vec::new();
        for (i, r) in self.results.iter().enumerate() {
            for mut row in result_rows(r) {
                row.insert(0, ("result".into(), i.to_string()));
                rows.push(row);
            }
        }
        let mut header: Vec<String> = Vec::new();
        for row in &rows {
            for (k, _) in row {
                if !header.contains(k) {
                    header.push(k.clone());
                }
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&header).map_err(io)?;
        for row in &rows {
            let rec: Vec<&str> = header
                .iter()
                .map(|h| row.iter().find(|(k, _)| k == h).map_or("", |(_, v)| v.as_str()))
                .collect();
            w.write_record(&rec).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    fn plain(&self) -> String {
        let mut s = format!("{}\n", self.command);
        for r in &self.results {
            let mut flat = Vec::new();
            flatten("", r, &mut flat);
            for (k, v) in flat {
                s.push_str(&format!("  {k}: {v}\n"));
            }
            s.push('\n');
        }
        for v in &self.verdicts {
            s.push_str(&format!("{:<12} {}: {}\n", format!("{:?}", v.status).to_lowercase(), v.item, v.evidence));
        }
        s
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        Value::Array(a) => a.iter().map(scalar).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

/// One row per probe point. Arrays of objects give one row per element;
/// equal-length numeric arrays (a grid with its values) give one row per
/// index; anything else is a single row.
fn result_rows(r: &Value) -> Vec<Vec<(String, String)>> {
    let Value::Object(m) = r else {
        return vec![vec![("value".into(), scalar(r))]];
    };
    let base: Vec<(String, String)> = m
        .iter()
        .filter(|(_, v)| !matches!(v, Value::Array(_) | Value::Object(_)))
        .map(|(k, v)| (k.clone(), scalar(v)))
        .collect();
    if let Some((key, items)) = m.iter().find_map(|(k, v)| match v {
        Value::Array(a) if !a.is_empty() && a.iter().all(Value::is_object) => Some((k.clone(), a)),
        _ => None,
    }) {
        return items
            .iter()
            .map(|it| {
                let mut row = base.clone();
                let mut f = Vec::new();
                flatten(&key, it, &mut f);
                row.extend(f);
                row
            })
            .collect();
    }
    let grid: Vec<(&String, &Vec<Value>)> = m
        .iter()
        .filter_map(|(k, v)| match v {
            Value::Array(a) if a.len() > 1 && a.iter().all(|x| x.is_number() || x.is_string()) => Some((k, a)),
            _ => None,
        })
        .collect();
    if let Some(n) = grid.first().map(|(_, a)| a.len()) {
        let cols: Vec<_> = grid.into_iter().filter(|(_, a)| a.len() == n).collect();
        if cols.len() > 1 {
            return (0..n)
                .map(|i| {
                    let mut row = base.clone();
                    row.extend(cols.iter().map(|(k, a)| ((*k).clone(), scalar(&a[i]))));
                    row
                })
                .collect();
        }
    }
    let mut row = Vec::new();
    flatten("", &Value::Object(Map::clone(m)), &mut row);
    vec![row]
}

/// The report JSON without its metadata block, for comparing runs.
pub fn strip_metadata(json: &str) -> Result<String> {
    let mut v: Value = serde_json::from_str(json).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    if let Value::Object(m) = &mut v {
        m.remove("metadata");
    }
    serde_json::to_string_pretty(&v).map_err(|e| Error::InvalidArgument(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_one_row_per_probe() {
        let mut r = Report::new("t", &RunConfig::default());
        r.results.push(json!({"entry": "abs", "rows": [{"x": [0.5], "status": "verified"}, {"x": [0.1], "status": "falsified"}]}));
        r.results.push(json!({"points": [0.0, 0.5], "values": [1.0, "inf"], "mode": "oracle"}));
        let s = r.render(OutputFormat::Csv).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 5, "{s}");
        assert!(lines[0].starts_with("result,entry,rows.status,rows.x"));
        assert!(s.contains(",inf"));
    }

    #[test]
    fn metadata_is_stripped() {
        let a = strip_metadata(r#"{"command":"x","metadata":{"t":1}}"#).unwrap();
        let b = strip_metadata(r#"{"command":"x","metadata":{"t":2}}"#).unwrap();
        assert_eq!(a, b);
    }
}
