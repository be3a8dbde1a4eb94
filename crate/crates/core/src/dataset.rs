//! Loss data read from a CSV column, with the single-value perturbation used
//! in robustness checks.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sample::SortedSample;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Name(String),
    Index(usize),
}

impl std::str::FromStr for Column {
    type Err = Error;

    /// A bare number selects a 0-based index; anything else is a header name.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Config("empty column selector".into()));
        }
        Ok(match s.parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Header {
    /// A first row whose selected cell is not a number is a header.
    #[default]
    Auto,
    Yes,
    No,
}

impl std::str::FromStr for Header {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(Header::Auto),
            "yes" | "true" => Ok(Header::Yes),
            "no" | "false" => Ok(Header::No),
            other => Err(Error::Config(format!("header must be auto, yes or no, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Modification {
    pub index: usize,
    pub old_value: f64,
    pub new_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossDataset {
    /// Values in file order.
    pub values: Vec<f64>,
    pub source: String,
    pub modification: Option<Modification>,
}

impl LossDataset {
    pub fn new(values: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("the dataset has no observations".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Domain(format!("loss {} is not a positive finite number ({v})", i + 1)));
        }
        Ok(Self {
            values,
            source: source.into(),
            modification: None,
        })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn to_sample(&self) -> Result<SortedSample> {
        let mut source = self.source.clone();
        if let Some(m) = &self.modification {
            source = format!("{source} (max {} replaced by {})", m.old_value, m.new_value);
        }
        SortedSample::new(self.values.clone(), source)
    }
}

/// Reads one numeric column; `line` numbers in errors are 1-based file lines.
pub fn load_csv(path: &Path, column: &Column, header: Header) -> Result<LossDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_csv(&text, column, header, &path.display().to_string())
}

pub fn parse_csv(text: &str, column: &Column, header: Header, source: &str) -> Result<LossDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for r in reader.records() {
        let r = r.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = r.position().map_or(0, |p| p.line() as usize);
        if r.iter().all(|f| f.is_empty()) {
            continue;
        }
        records.push((line, r));
    }
    if records.is_empty() {
        return Err(Error::Empty(format!("{source} contains no rows")));
    }

    let first = &records[0].1;
    let index = match column {
        Column::Index(i) => *i,
        Column::Name(name) => {
            if header == Header::No {
                return Err(Error::Config(format!("column {name:?} selected by name but the file has no header")));
            }
            first
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Config(format!("no column named {name:?} in the header")))?
        }
    };
    let has_header = match header {
        Header::Yes => true,
        Header::No => false,
        Header::Auto => matches!(column, Column::Name(_)) || first.get(index).is_some_and(|c| c.parse::<f64>().is_err()),
    };

    let mut values = Vec::new();
    for (line, r) in records.iter().skip(usize::from(has_header)) {
        let cell = r.get(index).ok_or_else(|| Error::Parse {
            line: *line,
            message: format!("row has no column {index}"),
        })?;
        let v: f64 = cell.parse().map_err(|_| Error::Parse {
            line: *line,
            message: format!("{cell:?} is not a plain decimal number"),
        })?;
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Parse {
                line: *line,
                message: format!("loss must be positive and finite, got {cell}"),
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Empty(format!("{source} has a header but no data rows")));
    }
    Ok(LossDataset {
        values,
        source: source.to_string(),
        modification: None,
    })
}

/// Replaces one occurrence of the largest value (the first in file order).
pub fn replace_max(dataset: &LossDataset, new_value: f64) -> Result<LossDataset> {
    if !(new_value.is_finite() && new_value > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "replacement must be positive and finite, got {new_value}"
        )));
    }
    let (index, &old_value) = dataset
        .values
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, &f64)>, (i, v)| match best {
            Some((_, b)) if *b >= *v => best,
            _ => Some((i, v)),
        })
        .ok_or_else(|| Error::Empty("the dataset has no observations".into()))?;
    let mut values = dataset.values.clone();
    values[index] = new_value;
    Ok(LossDataset {
        values,
        source: dataset.source.clone(),
        modification: Some(Modification { index, old_value, new_value }),
    })
}
