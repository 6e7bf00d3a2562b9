//! Tabular records and their CSV / JSON renderings.

use num_complex::Complex64;
use serde_json::{Map, Number, Value};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::config("config.format", format!("unknown format `{s}`"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Int(i64),
    Real(f64),
    Complex(Complex64),
    Text(String),
    Bool(bool),
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as i64)
    }
}

impl From<i64> for Field {
    fn from(v: i64) -> Self {
        Field::Int(v)
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Real(v)
    }
}

impl From<Complex64> for Field {
    fn from(v: Complex64) -> Self {
        Field::Complex(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.into())
    }
}

impl From<String> for Field {
    fn from(v: String) -> Self {
        Field::Text(v)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Bool(v)
    }
}

/// Records sharing one set of named columns. Complex columns are declared
/// up front so the header does not depend on the data.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub complex: Vec<bool>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        let columns: Vec<String> = columns.into_iter().map(Into::into).collect();
        Self {
            complex: vec![false; columns.len()],
            columns,
            rows: Vec::new(),
        }
    }

    /// Marks the named columns as complex.
    pub fn with_complex(mut self, names: &[&str]) -> Self {
        for name in names {
            let k = self
                .columns
                .iter()
                .position(|c| c == name)
                .unwrap_or_else(|| panic!("no column `{name}`"));
            self.complex[k] = true;
        }
        self
    }

    pub fn push(&mut self, row: Vec<Field>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        for (k, f) in row.iter().enumerate() {
            assert_eq!(
                matches!(f, Field::Complex(_)),
                self.complex[k],
                "column `{}` kind mismatch",
                self.columns[k]
            );
        }
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Header row with complex columns split into `_re` / `_im`.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut header = Vec::new();
        for (name, &complex) in self.columns.iter().zip(&self.complex) {
            if complex {
                header.push(format!("{name}_re"));
                header.push(format!("{name}_im"));
            } else {
                header.push(name.clone());
            }
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut cells = Vec::with_capacity(header.len());
            for f in row {
                match f {
                    Field::Complex(z) => {
                        cells.push(real(z.re));
                        cells.push(real(z.im));
                    }
                    Field::Int(v) => cells.push(v.to_string()),
                    Field::Real(x) => cells.push(real(*x)),
                    Field::Text(s) => cells.push(s.clone()),
                    Field::Bool(b) => cells.push(b.to_string()),
                }
            }
            w.write_record(&cells).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn to_json(&self) -> Vec<u8> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (name, f) in self.columns.iter().zip(row) {
                    m.insert(name.clone(), json_field(f));
                }
                Value::Object(m)
            })
            .collect();
        let mut out = serde_json::to_vec_pretty(&Value::Array(rows)).expect("serializable");
        out.push(b'\n');
        out
    }
}

/// 17 significant digits.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn json_real(x: f64) -> Value {
    Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn json_complex(z: Complex64) -> Value {
    let mut m = Map::new();
    m.insert("re".into(), json_real(z.re));
    m.insert("im".into(), json_real(z.im));
    Value::Object(m)
}

fn json_field(f: &Field) -> Value {
    match f {
        Field::Int(v) => Value::from(*v),
        Field::Real(x) => json_real(*x),
        Field::Complex(z) => json_complex(*z),
        Field::Text(s) => Value::String(s.clone()),
        Field::Bool(b) => Value::Bool(*b),
    }
}

/// Joins level indices as `"0 1"`.
pub fn index_list(v: &[usize]) -> Field {
    Field::Text(v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "))
}
