//! Column-ordered result tables with deterministic CSV and JSON rendering.

use std::fmt::Write as _;

use serde_json::Value;

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Flag(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Scientific notation with `digits` significant digits. Signed zero is
/// normalised so that `-0` never reaches a data file.
pub fn format_float(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{:.*e}", digits.saturating_sub(1), x)
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    /// Prepend a column holding the same value in every row.
    pub fn with_leading(mut self, name: &str, value: Cell) -> Self {
        self.columns.insert(0, name.to_string());
        for row in &mut self.rows {
            row.insert(0, value.clone());
        }
        self
    }

    /// Append the rows of `other`, whose columns must match.
    pub fn extend(&mut self, other: Table) {
        if self.columns.is_empty() {
            self.columns = other.columns;
        } else {
            debug_assert_eq!(self.columns, other.columns);
        }
        self.rows.extend(other.rows);
    }

    pub fn render(&self, format: Format, digits: usize) -> String {
        match format {
            Format::Csv => self.to_csv(digits),
            Format::Json => self.to_json(digits),
        }
    }

    fn to_csv(&self, digits: usize) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Float(x) => out.push_str(&format_float(*x, digits)),
                    Cell::Int(n) => write!(out, "{n}").unwrap(),
                    Cell::Flag(b) => out.push(if *b { '1' } else { '0' }),
                    Cell::Text(s) => out.push_str(s),
                }
            }
            out.push('\n');
        }
        out
    }

    /// `{"columns": [...], "rows": [[...], ...]}`; floats are rounded to the
    /// same digits as the CSV form, non-finite values become `null`.
    fn to_json(&self, digits: usize) -> String {
        let cell = |c: &Cell| match c {
            Cell::Float(x) => format_float(*x, digits)
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map_or(Value::Null, Value::Number),
            Cell::Int(n) => Value::from(*n),
            Cell::Flag(b) => Value::from(*b),
            Cell::Text(s) => Value::from(s.as_str()),
        };
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(cell).collect()))
            .collect();
        let doc = serde_json::json!({ "columns": self.columns, "rows": rows });
        let mut s = serde_json::to_string(&doc).expect("table serialises");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(1.875, 6), "1.87500e0");
        assert_eq!(format_float(-0.0, 6), "0.00000e0");
        assert_eq!(format_float(-2.5e-13, 12), "-2.50000000000e-13");
        assert_eq!(format_float(f64::NAN, 6), "nan");
        assert_eq!(format_float(0.1, 17).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn csv_and_json() {
        let mut t = Table::new(["m", "rate", "separable", "parity"]);
        t.push(vec![0.into(), 0.5.into(), true.into(), "s".into()]);
        let t = t.with_leading("eta0", 0.3.into());
        assert_eq!(t.render(Format::Csv, 6), "eta0,m,rate,separable,parity\n3.00000e-1,0,5.00000e-1,1,s\n");
        let v: Value = serde_json::from_str(&t.render(Format::Json, 6)).unwrap();
        assert_eq!(v["columns"][1], "m");
        assert_eq!(v["rows"][0][0].as_f64(), Some(0.3));
        assert_eq!(v["rows"][0][3], true);
    }
}
