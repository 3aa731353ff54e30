use std::collections::BTreeSet;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::tabular::{CellRef, Column, Dtype, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    OneHot,
    Ordinal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Recipe {
    /// Number or Boolean: mean imputation.
    Numeric { impute: f64 },
    /// One slot per training label plus a final unknown slot.
    OneHot { labels: Vec<String> },
    /// Training labels map to their index; unknown and missing map to `labels.len()`.
    Ordinal { labels: Vec<String> },
}

impl Recipe {
    fn width(&self) -> usize {
        match self {
            Recipe::OneHot { labels } => labels.len() + 1,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnRecipe {
    pub name: String,
    pub dtype: Dtype,
    pub recipe: Recipe,
}

/// Fitted feature encoding: imputation, categorical encoding and
/// standardization of every output column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub columns: Vec<ColumnRecipe>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub fit_rows: usize,
}

fn train_labels(col: &Column) -> Vec<String> {
    let set: BTreeSet<String> = (0..col.len())
        .filter_map(|i| match col.cell(i) {
            CellRef::Category(s) | CellRef::Text(s) => Some(s.to_string()),
            _ => None,
        })
        .collect();
    set.into_iter().collect()
}

impl Preprocessor {
    /// Fits on every non-target column of `train`.
    pub fn fit(train: &Table, encoding: Encoding) -> Result<Preprocessor, ModelError> {
        if train.row_count() == 0 {
            return Err(ModelError::EmptyTraining);
        }
        let mut columns = Vec::new();
        for col in train.features() {
            let recipe = match col.dtype() {
                Dtype::Number | Dtype::Boolean => {
                    let vals: Vec<f64> = (0..col.len()).filter_map(|i| numeric(col.cell(i))).collect();
                    let impute = if vals.is_empty() { 0.0 } else { vals.iter().sum::<f64>() / vals.len() as f64 };
                    Recipe::Numeric { impute }
                }
                Dtype::Category if encoding == Encoding::OneHot => Recipe::OneHot { labels: train_labels(col) },
                Dtype::Category | Dtype::Text => Recipe::Ordinal { labels: train_labels(col) },
            };
            columns.push(ColumnRecipe { name: col.name().to_string(), dtype: col.dtype(), recipe });
        }
        let mut pre = Preprocessor { columns, means: vec![], scales: vec![], fit_rows: train.row_count() };
        let raw = pre.encode(train)?;
        let n = raw.nrows() as f64;
        for j in 0..raw.ncols() {
            let c = raw.column(j);
            let mean = c.sum() / n;
            let var = c.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let sd = var.sqrt();
            pre.means.push(mean);
            pre.scales.push(if sd > 1e-12 { sd } else { 1.0 });
        }
        Ok(pre)
    }

    pub fn width(&self) -> usize {
        self.columns.iter().map(|c| c.recipe.width()).sum()
    }

    fn encode(&self, table: &Table) -> Result<Array2<f64>, ModelError> {
        let n = table.row_count();
        let mut out = Array2::zeros((n, self.width()));
        let mut j = 0;
        for cr in &self.columns {
            let col = table.column(&cr.name).ok_or_else(|| ModelError::MissingColumn(cr.name.clone()))?;
            if col.dtype() != cr.dtype {
                return Err(ModelError::SchemaMismatch(format!(
                    "column `{}` is {} but was {} when fitted",
                    cr.name,
                    col.dtype(),
                    cr.dtype
                )));
            }
            match &cr.recipe {
                Recipe::Numeric { impute } => {
                    for i in 0..n {
                        out[[i, j]] = numeric(col.cell(i)).unwrap_or(*impute);
                    }
                }
                Recipe::OneHot { labels } => {
                    for (i, s) in row_slots(col, labels).into_iter().enumerate() {
                        out[[i, j + s]] = 1.0;
                    }
                }
                Recipe::Ordinal { labels } => {
                    for (i, s) in row_slots(col, labels).into_iter().enumerate() {
                        out[[i, j]] = s as f64;
                    }
                }
            }
            j += cr.recipe.width();
        }
        Ok(out)
    }

    /// Encodes and standardizes `table`. The result has no missing or
    /// non-finite entries.
    pub fn transform(&self, table: &Table) -> Result<Array2<f64>, ModelError> {
        let mut x = self.encode(table)?;
        for (j, mut c) in x.columns_mut().into_iter().enumerate() {
            let (m, s) = (self.means[j], self.scales[j]);
            c.mapv_inplace(|v| (v - m) / s);
        }
        Ok(x)
    }
}

fn numeric(c: CellRef<'_>) -> Option<f64> {
    match c {
        CellRef::Number(v) => Some(v),
        CellRef::Boolean(b) => Some(if b { 1.0 } else { 0.0 }),
        _ => None,
    }
}

/// Output slot of every row; unseen labels and missing cells go to the
/// unknown slot `labels.len()`.
fn row_slots(col: &Column, labels: &[String]) -> Vec<usize> {
    let unknown = labels.len();
    let lookup = |l: &str| labels.binary_search_by(|x| x.as_str().cmp(l)).unwrap_or(unknown);
    match (col.labels(), col.class_codes()) {
        (Some(dict), Some(codes)) => {
            let per_code: Vec<usize> = dict.iter().map(|l| lookup(l)).collect();
            codes.iter().map(|c| c.map_or(unknown, |c| per_code[c])).collect()
        }
        _ => (0..col.len())
            .map(|i| match col.cell(i) {
                CellRef::Text(t) | CellRef::Category(t) => lookup(t),
                _ => unknown,
            })
            .collect(),
    }
}
