//! Tabular results rendered as CSV or JSON.
//!
//! CSV: measures with 9 fixed decimals, parameters in shortest round-trip
//! form, LF line endings. JSON: `{"meta": ..., "rows": [...]}` with every
//! real number written as `{:.16e}` (17 significant digits).

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    /// Input parameter or grid value.
    Param(f64),
    /// Computed quantity.
    Measure(f64),
    Empty,
}

/// Parameter echoed in the JSON `meta` object.
#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Float(f64),
    Floats(Vec<f64>),
    Int(i64),
    Ints(Vec<usize>),
    Pairs(Vec<(usize, usize)>),
    Text(String),
    Bool(bool),
}

#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub params: Vec<(&'static str, Param)>,
}

impl Table {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Self {
            command,
            columns: columns.to_vec(),
            rows: Vec::new(),
            params: Vec::new(),
        }
    }

    pub fn param(&mut self, name: &'static str, value: Param) -> &mut Self {
        self.params.push((name, value));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    fn csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Compute(format!("csv: {e}"));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(csv_cell)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Compute(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
    }

    fn json(&self) -> Result<String, CliError> {
        #[derive(Serialize)]
        struct Meta<'a> {
            command: &'a str,
            version: &'a str,
            params: Ordered,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            meta: Meta<'a>,
            rows: Vec<Ordered>,
        }
        let params = self
            .params
            .iter()
            .map(|(k, v)| Ok((k.to_string(), raw_value(&param_json(v))?)))
            .collect::<Result<_, CliError>>()
            .map(Ordered)?;
        let rows = self
            .rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .zip(row)
                    .map(|(k, c)| Ok((k.to_string(), raw_value(&cell_json(c))?)))
                    .collect::<Result<_, CliError>>()
                    .map(Ordered)
            })
            .collect::<Result<_, CliError>>()?;
        let doc = Doc {
            meta: Meta {
                command: self.command,
                version: env!("CARGO_PKG_VERSION"),
                params,
            },
            rows,
        };
        let mut text = serde_json::to_string_pretty(&doc)
            .map_err(|e| CliError::Compute(format!("json: {e}")))?;
        text.push('\n');
        Ok(text)
    }
}

/// Shortest representation that parses back to the same value.
pub fn short(x: f64) -> String {
    format!("{x}")
}

fn sci(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Param(x) => short(*x),
        Cell::Measure(x) => format!("{x:.9}"),
        Cell::Empty => String::new(),
    }
}

fn cell_json(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Param(x) | Cell::Measure(x) => sci(*x),
        Cell::Empty => "null".into(),
    }
}

fn param_json(p: &Param) -> String {
    let list = |items: Vec<String>| format!("[{}]", items.join(","));
    match p {
        Param::Float(x) => sci(*x),
        Param::Floats(xs) => list(xs.iter().map(|&x| sci(x)).collect()),
        Param::Int(i) => i.to_string(),
        Param::Ints(xs) => list(xs.iter().map(|x| x.to_string()).collect()),
        Param::Pairs(ps) => list(ps.iter().map(|(a, b)| format!("[{a},{b}]")).collect()),
        Param::Text(s) => serde_json::to_string(s).expect("string serializes"),
        Param::Bool(b) => b.to_string(),
    }
}

/// JSON object with keys in insertion order and values written verbatim.
/// `serde_json::Value` would re-render floats in shortest form.
struct Ordered(Vec<(String, Box<RawValue>)>);

impl Serialize for Ordered {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

fn raw_value(text: &str) -> Result<Box<RawValue>, CliError> {
    RawValue::from_string(text.to_owned()).map_err(|e| CliError::Compute(format!("json: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("demo", &["L", "h", "concurrence"]);
        t.param("delta", Param::Float(1.5)).param("L", Param::Ints(vec![6, 8]));
        t.push(vec![Cell::Int(6), Cell::Param(0.6), Cell::Measure(0.5995099334)]);
        t.push(vec![Cell::Int(8), Cell::Param(5.0), Cell::Empty]);
        t
    }

    #[test]
    fn csv_layout() {
        let text = sample().render(Format::Csv).unwrap();
        assert_eq!(text, "L,h,concurrence\n6,0.6,0.599509933\n8,5,\n");
    }

    #[test]
    fn json_layout() {
        let text = sample().render(Format::Json).unwrap();
        assert!(text.contains("\"concurrence\": 5.995099334"));
        assert!(text.contains("\"delta\": 1.5000000000000000e0"));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["meta"]["command"], "demo");
        assert_eq!(v["rows"][1]["concurrence"], serde_json::Value::Null);
        assert_eq!(v["rows"][0]["L"], 6);
        assert_eq!(v["rows"][0]["concurrence"].as_f64(), Some(0.5995099334));
        assert_eq!(v["meta"]["params"]["L"][1], 8);
    }
}
