//! Columnar tables with explicit missing-value masks.
//!
//! A [`Table`] is immutable once built; every transformation produces a new
//! table. Numbers are stored as `f64`, missing cells are tracked by a
//! per-column validity mask and never by sentinel values.

mod column;
mod csv_io;
mod split;
mod summary;
mod tictactoe;

use std::collections::HashSet;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use column::{format_number, format_number_exact, Cell, CellRef, Column, ColumnData, Dtype};
pub use csv_io::{
    load_csv, parse_csv, parse_schema_override, read_schema_override, to_csv_string, write_csv, SchemaOverride,
};
pub use split::{make_splits, split_seed, Split, SplitPlan, Splits};
pub use summary::{summarize, ColumnSummary};
pub use tictactoe::{gen_tictactoe, SQUARE_NAMES, TICTACTOE_DESCRIPTION};

#[derive(Debug, Error)]
pub enum TabularError {
    #[error("csv error: {0}")]
    Csv(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("target column `{0}` not found")]
    MissingTarget(String),
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("split error: {0}")]
    Split(String),
}

/// Ordered, uniquely named columns plus the name of the prediction target.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    columns: Vec<Column>,
    target: String,
    row_count: usize,
}

impl Table {
    pub fn new(columns: Vec<Column>, target: impl Into<String>) -> Result<Self, TabularError> {
        let target = target.into();
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.name()) {
                return Err(TabularError::DuplicateColumn(c.name().to_string()));
            }
        }
        let row_count = columns.first().map_or(0, Column::len);
        if let Some(c) = columns.iter().find(|c| c.len() != row_count) {
            return Err(TabularError::Schema(format!(
                "column `{}` has {} rows, expected {row_count}",
                c.name(),
                c.len()
            )));
        }
        let t =
            columns.iter().find(|c| c.name() == target).ok_or_else(|| TabularError::MissingTarget(target.clone()))?;
        if !matches!(t.dtype(), Dtype::Category | Dtype::Boolean) {
            return Err(TabularError::Schema(format!(
                "target column `{target}` must be category or boolean, found {}",
                t.dtype()
            )));
        }
        if t.missing_count() > 0 {
            return Err(TabularError::Schema(format!("target column `{target}` has missing values")));
        }
        Ok(Table { columns, target, row_count })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name() == name)
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn target_column(&self) -> &Column {
        self.column(&self.target).expect("target checked at construction")
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    /// `(name, dtype)` pairs in column order.
    pub fn schema(&self) -> Vec<(String, Dtype)> {
        self.columns.iter().map(|c| (c.name().to_string(), c.dtype())).collect()
    }

    /// Feature columns, i.e. everything except the target.
    pub fn features(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(move |c| c.name() != self.target)
    }

    /// Class index per row.
    pub fn labels(&self) -> Vec<usize> {
        self.target_column()
            .class_codes()
            .expect("target is categorical")
            .into_iter()
            .map(|c| c.expect("target has no missing values"))
            .collect()
    }

    pub fn class_count(&self) -> usize {
        self.target_column().class_count().expect("target is categorical")
    }

    pub fn take(&self, indices: &[usize]) -> Table {
        Table {
            columns: self.columns.iter().map(|c| c.take(indices)).collect(),
            target: self.target.clone(),
            row_count: indices.len(),
        }
    }

    pub fn with_column(&self, column: Column) -> Result<Table, TabularError> {
        let mut columns = self.columns.clone();
        columns.push(column);
        Table::new(columns, self.target.clone())
    }

    pub fn without_column(&self, name: &str) -> Result<Table, TabularError> {
        if name == self.target {
            return Err(TabularError::Schema(format!("cannot drop target column `{name}`")));
        }
        let columns: Vec<Column> = self.columns.iter().filter(|c| c.name() != name).cloned().collect();
        if columns.len() == self.columns.len() {
            return Err(TabularError::Schema(format!("no column named `{name}`")));
        }
        Table::new(columns, self.target.clone())
    }

    /// Renames columns via `f`; the target follows its column.
    pub fn renamed(&self, mut f: impl FnMut(usize, &str) -> String) -> Result<Table, TabularError> {
        let mut target = self.target.clone();
        let columns = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let name = f(i, c.name());
                if c.name() == self.target {
                    target = name.clone();
                }
                c.with_name(name)
            })
            .collect();
        Table::new(columns, target)
    }

    /// SHA-256 over a canonical encoding of names, dtypes, validity and cells.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.target.as_bytes());
        h.update([0u8]);
        h.update((self.row_count as u64).to_le_bytes());
        for c in &self.columns {
            h.update(c.name().as_bytes());
            h.update([0u8]);
            h.update(c.dtype().as_str().as_bytes());
            let mask: Vec<u8> = c.validity().iter().map(|&v| v as u8).collect();
            h.update(&mask);
            match c.data() {
                ColumnData::Number(v) => v.iter().for_each(|x| h.update(x.to_bits().to_le_bytes())),
                ColumnData::Boolean(v) => h.update(v.iter().map(|&b| b as u8).collect::<Vec<_>>()),
                ColumnData::Category { codes, labels } => {
                    for l in labels {
                        h.update(l.as_bytes());
                        h.update([0u8]);
                    }
                    codes.iter().for_each(|x| h.update(x.to_le_bytes()));
                }
                ColumnData::Text(v) => {
                    for s in v {
                        h.update((s.len() as u64).to_le_bytes());
                        h.update(s.as_bytes());
                    }
                }
            }
        }
        hex::encode(h.finalize())
    }
}
