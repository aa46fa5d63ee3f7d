//! Tabular datasets loaded from CSV or JSON with per-column type inference.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DataError {
    #[error("row {row}: {detail}")]
    Parse { row: usize, detail: String },
    #[error("column `{column}` mixes incompatible value types")]
    Type { column: String },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    pub fn from_extension(path: &std::path::Path) -> Option<DataFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(DataFormat::Csv),
            "json" => Some(DataFormat::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnType {
    Number,
    Text,
    /// Sortable time key; values are numbers when every cell is numeric, text otherwise.
    TimeIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub ty: ColumnType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Number(v) => Some(*v),
            Value::Text(_) => None,
        }
    }

    /// Total order used for sorting time keys: numbers before text, numbers by value.
    pub fn sort_cmp(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Number(a), Value::Number(b)) => a.total_cmp(b),
            (Value::Number(_), Value::Text(_)) => Ordering::Less,
            (Value::Text(_), Value::Number(_)) => Ordering::Greater,
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(v) => write!(f, "{}", format_number(*v)),
            Value::Text(s) => f.write_str(s),
        }
    }
}

/// Integral values print without a fractional part (`1955`, not `1955.0`).
pub fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
}

impl Dataset {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn values<'a>(&'a self, column: usize) -> impl Iterator<Item = &'a Value> + 'a {
        self.rows.iter().map(move |r| &r[column])
    }

    /// `name: value` lines for one row, in column order.
    pub fn describe_row(&self, row: usize) -> Vec<String> {
        self.columns
            .iter()
            .zip(&self.rows[row])
            .map(|(c, v)| format!("{}: {}", c.name, v))
            .collect()
    }
}

enum Cell {
    Raw(String),
    Num(f64),
    Str(String),
}

pub fn load_dataset(
    source: &[u8],
    format: DataFormat,
    time_field: Option<&str>,
) -> Result<Dataset, DataError> {
    let (names, cells) = match format {
        DataFormat::Csv => read_csv(source)?,
        DataFormat::Json => read_json(source)?,
    };
    if cells.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return Err(DataError::DuplicateColumn(name.clone()));
        }
    }

    let mut columns = Vec::with_capacity(names.len());
    let mut rows: Vec<Vec<Value>> = vec![Vec::with_capacity(names.len()); cells.len()];
    for (c, name) in names.into_iter().enumerate() {
        let (numeric, values) = infer_column(&name, cells.iter().map(|r| &r[c]))?;
        let ty = if time_field == Some(name.as_str()) {
            ColumnType::TimeIndex
        } else if numeric {
            ColumnType::Number
        } else {
            ColumnType::Text
        };
        columns.push(Column { name, ty });
        for (row, v) in rows.iter_mut().zip(values) {
            row.push(v);
        }
    }
    Ok(Dataset { columns, rows })
}

fn infer_column<'a>(
    name: &str,
    cells: impl Iterator<Item = &'a Cell> + Clone,
) -> Result<(bool, Vec<Value>), DataError> {
    let mut typed_num = false;
    let mut typed_str = false;
    let mut all_parse = true;
    for cell in cells.clone() {
        match cell {
            Cell::Raw(s) => all_parse &= parse_number(s).is_some(),
            Cell::Num(_) => typed_num = true,
            Cell::Str(_) => typed_str = true,
        }
    }
    if typed_num && typed_str {
        return Err(DataError::Type {
            column: name.to_string(),
        });
    }
    let numeric = typed_num || (!typed_str && all_parse);
    let values = cells
        .map(|cell| match cell {
            Cell::Raw(s) if numeric => Value::Number(parse_number(s).expect("checked above")),
            Cell::Raw(s) | Cell::Str(s) => Value::Text(s.clone()),
            Cell::Num(v) => Value::Number(*v),
        })
        .collect();
    Ok((numeric, values))
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

type RawTable = (Vec<String>, Vec<Vec<Cell>>);

fn read_csv(source: &[u8]) -> Result<RawTable, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    let headers = reader.headers().map_err(|e| DataError::Parse {
        row: 1,
        detail: e.to_string(),
    })?;
    if headers.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // Header is row 1.
        let row = i + 2;
        let record = record.map_err(|e| DataError::Parse {
            row,
            detail: e.to_string(),
        })?;
        if record.len() != names.len() {
            return Err(DataError::Parse {
                row,
                detail: format!("expected {} fields, found {}", names.len(), record.len()),
            });
        }
        rows.push(record.iter().map(|f| Cell::Raw(f.to_string())).collect());
    }
    Ok((names, rows))
}

fn read_json(source: &[u8]) -> Result<RawTable, DataError> {
    if source.iter().all(u8::is_ascii_whitespace) {
        return Err(DataError::EmptyDataset);
    }
    let doc: serde_json::Value = serde_json::from_slice(source).map_err(|e| DataError::Parse {
        row: e.line(),
        detail: e.to_string(),
    })?;
    let items = doc.as_array().ok_or_else(|| DataError::Parse {
        row: 1,
        detail: "expected a JSON array of objects".into(),
    })?;
    let Some(first) = items.first() else {
        return Err(DataError::EmptyDataset);
    };
    let object = |row: usize, v: &'_ serde_json::Value| {
        v.as_object().cloned().ok_or_else(|| DataError::Parse {
            row,
            detail: "expected a flat object".into(),
        })
    };
    let names: Vec<String> = object(1, first)?.keys().cloned().collect();
    let mut rows = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let row = i + 1;
        let obj = object(row, item)?;
        if obj.len() != names.len() || !names.iter().all(|n| obj.contains_key(n)) {
            return Err(DataError::Parse {
                row,
                detail: "object keys differ from the first object".into(),
            });
        }
        let mut cells = Vec::with_capacity(names.len());
        for name in &names {
            cells.push(match &obj[name] {
                serde_json::Value::Number(n) => Cell::Num(n.as_f64().unwrap_or(f64::NAN)),
                serde_json::Value::String(s) => Cell::Str(s.clone()),
                _ => return Err(DataError::Type { column: name.clone() }),
            });
        }
        rows.push(cells);
    }
    Ok((names, rows))
}
