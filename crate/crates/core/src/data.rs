//! Typed tabular datasets and CSV ingestion.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub declared_cardinality: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Continuous(Vec<f64>),
    /// Dense codes `0..labels.len()` plus the label each code stands for.
    Categorical { codes: Vec<u32>, labels: Vec<String> },
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Continuous(v) => v.len(),
            ColumnData::Categorical { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnData::Continuous(_) => ColumnKind::Continuous,
            ColumnData::Categorical { .. } => ColumnKind::Categorical,
        }
    }

    fn select_rows(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Continuous(v) => ColumnData::Continuous(rows.iter().map(|&i| v[i]).collect()),
            ColumnData::Categorical { codes, labels } => {
                // recode densely so the observed-cardinality invariant survives
                let mut remap: HashMap<u32, u32> = HashMap::new();
                let mut new_labels = Vec::new();
                let new_codes = rows
                    .iter()
                    .map(|&i| {
                        *remap.entry(codes[i]).or_insert_with(|| {
                            new_labels.push(labels[codes[i] as usize].clone());
                            (new_labels.len() - 1) as u32
                        })
                    })
                    .collect();
                ColumnData::Categorical {
                    codes: new_codes,
                    labels: new_labels,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub schema: ColumnSchema,
    pub data: ColumnData,
}

impl Column {
    pub fn continuous(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            schema: ColumnSchema {
                name: name.into(),
                kind: ColumnKind::Continuous,
                declared_cardinality: None,
            },
            data: ColumnData::Continuous(values),
        }
    }

    /// Builds a categorical column from labels, coding them in first-appearance order.
    pub fn categorical<S: AsRef<str>>(name: impl Into<String>, labels: &[S]) -> Self {
        let (codes, labels) = encode_labels(labels.iter().map(|s| s.as_ref()));
        Self {
            schema: ColumnSchema {
                name: name.into(),
                kind: ColumnKind::Categorical,
                declared_cardinality: None,
            },
            data: ColumnData::Categorical { codes, labels },
        }
    }

    /// Categorical column from integer codes; labels are the decimal codes.
    pub fn from_codes(name: impl Into<String>, codes: &[u32]) -> Self {
        let labels: Vec<String> = codes.iter().map(|c| c.to_string()).collect();
        Self::categorical(name, &labels)
    }

    pub fn name(&self) -> &str {
        &self.schema.name
    }

    pub fn kind(&self) -> ColumnKind {
        self.schema.kind
    }

    pub fn as_continuous(&self) -> Option<&[f64]> {
        match &self.data {
            ColumnData::Continuous(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_codes(&self) -> Option<&[u32]> {
        match &self.data {
            ColumnData::Categorical { codes, .. } => Some(codes),
            _ => None,
        }
    }

    /// Number of distinct categories, or `None` for a continuous column.
    pub fn cardinality(&self) -> Option<usize> {
        match &self.data {
            ColumnData::Categorical { labels, .. } => Some(labels.len()),
            _ => None,
        }
    }

    pub fn decode(&self, code: u32) -> Option<&str> {
        match &self.data {
            ColumnData::Categorical { labels, .. } => labels.get(code as usize).map(String::as_str),
            _ => None,
        }
    }

    pub fn encode(&self, label: &str) -> Option<u32> {
        match &self.data {
            ColumnData::Categorical { labels, .. } => {
                labels.iter().position(|l| l == label).map(|p| p as u32)
            }
            _ => None,
        }
    }

    fn cell_text(&self, row: usize) -> String {
        match &self.data {
            ColumnData::Continuous(v) => format!("{}", v[row]),
            ColumnData::Categorical { codes, labels } => labels[codes[row] as usize].clone(),
        }
    }
}

fn encode_labels<'a>(labels: impl Iterator<Item = &'a str>) -> (Vec<u32>, Vec<String>) {
    let mut index: HashMap<&'a str, u32> = HashMap::new();
    let mut distinct = Vec::new();
    let codes = labels
        .map(|label| {
            *index.entry(label).or_insert_with(|| {
                distinct.push(label.to_string());
                (distinct.len() - 1) as u32
            })
        })
        .collect();
    (codes, distinct)
}

/// An immutable column store with one designated target column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    target: usize,
    n: usize,
    dropped_rows: usize,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, target: &str) -> Result<Self> {
        let n = columns.first().map(|c| c.data.len()).unwrap_or(0);
        let mut seen = HashSet::new();
        for col in &columns {
            if !seen.insert(col.name()) {
                return Err(Error::DuplicateColumn(col.name().to_string()));
            }
            if col.data.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: col.data.len(),
                });
            }
            if col.schema.kind != col.data.kind() {
                return Err(Error::InvalidArgument(format!(
                    "column '{}' schema kind does not match its data",
                    col.name()
                )));
            }
            match &col.data {
                ColumnData::Continuous(v) => {
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(Error::NonFinite("continuous column"));
                    }
                }
                ColumnData::Categorical { codes, labels } => {
                    if codes.iter().any(|&c| c as usize >= labels.len()) {
                        return Err(Error::InvalidArgument(format!(
                            "column '{}' has a code beyond its cardinality",
                            col.name()
                        )));
                    }
                    if let Some(declared) = col.schema.declared_cardinality {
                        if declared < 2 || labels.len() > declared {
                            return Err(Error::InvalidArgument(format!(
                                "column '{}' declares cardinality {declared} but holds {} labels",
                                col.name(),
                                labels.len()
                            )));
                        }
                    }
                }
            }
        }
        if n < 2 {
            return Err(Error::TooFewRows { needed: 2, found: n });
        }
        let target = columns
            .iter()
            .position(|c| c.name() == target)
            .ok_or_else(|| Error::UnknownColumn(target.to_string()))?;
        Ok(Self {
            columns,
            target,
            n,
            dropped_rows: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Rows removed during ingestion because of missing cells.
    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn schemas(&self) -> impl Iterator<Item = &ColumnSchema> {
        self.columns.iter().map(|c| &c.schema)
    }

    pub fn target(&self) -> &Column {
        &self.columns[self.target]
    }

    pub fn target_name(&self) -> &str {
        self.target().name()
    }

    /// Feature names in schema order.
    pub fn feature_names(&self) -> Vec<&str> {
        self.features().map(Column::name).collect()
    }

    pub fn features(&self) -> impl Iterator<Item = &Column> {
        self.columns
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != self.target)
            .map(|(_, c)| c)
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Position of a feature within [`Dataset::feature_names`].
    pub fn feature_position(&self, name: &str) -> Option<usize> {
        self.features().position(|c| c.name() == name)
    }

    /// Keeps only the named features (in the given order) plus the target.
    pub fn subset<S: AsRef<str>>(&self, features: &[S]) -> Result<Dataset> {
        let mut columns = Vec::with_capacity(features.len() + 1);
        let mut seen = HashSet::new();
        for name in features {
            let name = name.as_ref();
            if name == self.target_name() || !seen.insert(name) {
                continue;
            }
            columns.push(self.column(name)?.clone());
        }
        columns.push(self.target().clone());
        let target = columns.len() - 1;
        Ok(Dataset {
            columns,
            target,
            n: self.n,
            dropped_rows: self.dropped_rows,
        })
    }

    /// Same features with a different target column appended or substituted.
    pub fn with_target(&self, target: Column) -> Result<Dataset> {
        if target.data.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: target.data.len(),
            });
        }
        let mut columns: Vec<Column> = self.features().cloned().collect();
        if columns.iter().any(|c| c.name() == target.name()) {
            return Err(Error::DuplicateColumn(target.name().to_string()));
        }
        let name = target.name().to_string();
        columns.push(target);
        let mut ds = Dataset::new(columns, &name)?;
        ds.dropped_rows = self.dropped_rows;
        Ok(ds)
    }

    /// Dataset restricted to the given row indices (in that order).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                schema: c.schema.clone(),
                data: c.data.select_rows(rows),
            })
            .collect();
        Dataset::new(columns, self.target_name())
    }

    /// Writes the dataset as CSV with a header row, target last.
    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let order: Vec<&Column> = self.features().chain(std::iter::once(self.target())).collect();
        out.write_record(order.iter().map(|c| c.name()))?;
        for row in 0..self.n {
            out.write_record(order.iter().map(|c| c.cell_text(row)))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Ingestion overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestConfig {
    /// Target column; the last column when unset.
    pub target: Option<String>,
    pub categorical: Vec<String>,
    pub continuous: Vec<String>,
    pub max_rows: Option<usize>,
}

fn is_missing(cell: &str) -> bool {
    let cell = cell.trim();
    if cell.is_empty() || cell == "?" {
        return true;
    }
    if cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan") {
        return true;
    }
    matches!(cell.parse::<f64>(), Ok(v) if !v.is_finite())
}

pub fn load_csv(path: impl AsRef<Path>, config: &IngestConfig) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file, config)
}

/// Parses CSV text with a header row into a typed dataset.
pub fn read_csv<R: Read>(reader: R, config: &IngestConfig) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let width = header.len();
    for name in config.categorical.iter().chain(&config.continuous) {
        if !header.contains(name) {
            return Err(Error::UnknownColumn(name.clone()));
        }
    }
    if let Some(name) = config.categorical.iter().find(|c| config.continuous.contains(c)) {
        return Err(Error::InvalidArgument(format!(
            "column '{name}' is declared both categorical and continuous"
        )));
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); width];
    let mut dropped = 0;
    let mut kept = 0;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != width {
            return Err(Error::RaggedRow {
                line,
                expected: width,
                found: record.len(),
            });
        }
        if config.max_rows.is_some_and(|m| kept + dropped >= m) {
            break;
        }
        if record.iter().any(is_missing) {
            dropped += 1;
            continue;
        }
        for (col, cell) in cells.iter_mut().zip(record.iter()) {
            col.push(cell.trim().to_string());
        }
        kept += 1;
    }
    if kept == 0 {
        return Err(if dropped > 0 {
            Error::AllRowsDropped
        } else {
            Error::TooFewRows { needed: 2, found: 0 }
        });
    }

    let threshold = 20usize.max((kept as f64).sqrt() as usize);
    let mut columns = Vec::with_capacity(width);
    for (name, raw) in header.iter().zip(cells) {
        let numeric: Option<Vec<f64>> = raw.iter().map(|c| c.parse::<f64>().ok()).collect();
        let forced_continuous = config.continuous.contains(name);
        let forced_categorical = config.categorical.contains(name);
        let column = match numeric {
            Some(values) if forced_continuous => Column::continuous(name.clone(), values),
            None if forced_continuous => {
                let bad = raw.iter().find(|c| c.parse::<f64>().is_err()).cloned().unwrap_or_default();
                return Err(Error::NonNumeric {
                    column: name.clone(),
                    value: bad,
                });
            }
            Some(values) if !forced_categorical => {
                let distinct: HashSet<u64> = values.iter().map(|v| v.to_bits()).collect();
                if distinct.len() > threshold {
                    Column::continuous(name.clone(), values)
                } else {
                    Column::categorical(name.clone(), &raw)
                }
            }
            _ => Column::categorical(name.clone(), &raw),
        };
        columns.push(column);
    }
    let target = config
        .target
        .clone()
        .unwrap_or_else(|| header.last().cloned().unwrap_or_default());
    let mut ds = Dataset::new(columns, &target)?;
    ds.dropped_rows = dropped;
    Ok(ds)
}
