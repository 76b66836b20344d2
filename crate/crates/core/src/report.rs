//! Tabular reports with unit-carrying cells, emitted as CSV or JSON.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Text(String),
    Int { value: i64, unit: String },
    Num { value: f64, unit: String, decimals: usize },
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn int(value: impl TryInto<i64>, unit: &str) -> Self {
        Cell::Int {
            value: value.try_into().unwrap_or(i64::MAX),
            unit: unit.into(),
        }
    }

    pub fn num(value: f64, decimals: usize, unit: &str) -> Self {
        Cell::Num {
            value,
            unit: unit.into(),
            decimals,
        }
    }

    pub fn is_numeric(&self) -> bool {
        !matches!(self, Cell::Text(_))
    }

    pub fn unit(&self) -> Option<&str> {
        match self {
            Cell::Text(_) => None,
            Cell::Int { unit, .. } | Cell::Num { unit, .. } => Some(unit),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Text(s) => f.write_str(s),
            Cell::Int { value, unit } => write!(f, "{value} {unit}"),
            Cell::Num { value, unit, decimals } => {
                // avoid "-0.000"
                let v = if value.abs() < 0.5 * 10f64.powi(-(*decimals as i32)) {
                    0.0
                } else {
                    *value
                };
                write!(f, "{v:.decimals$} {unit}")
            }
        }
    }
}

/// Splits a rendered numeric cell back into value and unit.
pub fn parse_cell(s: &str) -> Option<(f64, &str)> {
    let (num, unit) = s.trim().split_once(' ')?;
    Some((num.parse().ok()?, unit))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportTable {
    pub title: String,
    pub provenance: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ReportTable {
    pub fn new(title: &str, provenance: &str, headers: &[&str]) -> Self {
        ReportTable {
            title: title.into(),
            provenance: provenance.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.headers.len() {
            return Err(Error::InvalidArgument(format!(
                "table `{}`: row of {} cells for {} columns",
                self.title,
                row.len(),
                self.headers.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, header: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == header)
    }

    /// `# title` and `# provenance` comment lines followed by the CSV body.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = format!("# {}\n# {}\n", self.title, self.provenance);
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(body).map_err(|e| Error::Io(e.to_string()))?);
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Headers and rendered rows of a CSV produced by [`ReportTable::to_csv`].
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok((headers, rows))
}
