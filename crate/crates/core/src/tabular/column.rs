use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TabularError;

/// Logical type of a column. Every cell conforms to it or is missing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    Number,
    Boolean,
    Category,
    Text,
}

impl Dtype {
    pub fn as_str(self) -> &'static str {
        match self {
            Dtype::Number => "number",
            Dtype::Boolean => "boolean",
            Dtype::Category => "category",
            Dtype::Text => "text",
        }
    }
}

impl fmt::Display for Dtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dtype {
    type Err = TabularError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "number" | "numeric" | "float" | "int" => Ok(Dtype::Number),
            "boolean" | "bool" => Ok(Dtype::Boolean),
            "category" | "categorical" => Ok(Dtype::Category),
            "text" | "string" => Ok(Dtype::Text),
            other => Err(TabularError::Schema(format!("unknown dtype `{other}`"))),
        }
    }
}

/// Cell storage. Missing cells hold the type's default value so that two
/// columns with the same logical content compare equal.
#[derive(Clone, Debug, PartialEq)]
pub enum ColumnData {
    Number(Vec<f64>),
    Boolean(Vec<bool>),
    /// Codes index into `labels`.
    Category {
        codes: Vec<u32>,
        labels: Vec<String>,
    },
    Text(Vec<String>),
}

/// A borrowed view of one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CellRef<'a> {
    Missing,
    Number(f64),
    Boolean(bool),
    Category(&'a str),
    Text(&'a str),
}

/// Owned cell value used when building columns row by row.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Number(f64),
    Boolean(bool),
    Text(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    name: String,
    data: ColumnData,
    validity: Vec<bool>,
}

impl Column {
    /// Builds a column, normalizing missing cells and non-finite numbers.
    pub fn new(name: impl Into<String>, data: ColumnData, validity: Vec<bool>) -> Result<Self, TabularError> {
        let name = name.into();
        let len = match &data {
            ColumnData::Number(v) => v.len(),
            ColumnData::Boolean(v) => v.len(),
            ColumnData::Category { codes, .. } => codes.len(),
            ColumnData::Text(v) => v.len(),
        };
        if len != validity.len() {
            return Err(TabularError::Schema(format!(
                "column `{name}` has {len} values but {} validity flags",
                validity.len()
            )));
        }
        let mut column = Column { name, data, validity };
        column.normalize()?;
        Ok(column)
    }

    pub fn number(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        let validity = values.iter().map(|v| v.is_some()).collect();
        let data = ColumnData::Number(values.into_iter().map(|v| v.unwrap_or(0.0)).collect());
        Column::new(name, data, validity).expect("lengths agree")
    }

    pub fn boolean(name: impl Into<String>, values: Vec<Option<bool>>) -> Self {
        let validity = values.iter().map(|v| v.is_some()).collect();
        let data = ColumnData::Boolean(values.into_iter().map(|v| v.unwrap_or(false)).collect());
        Column::new(name, data, validity).expect("lengths agree")
    }

    pub fn text(name: impl Into<String>, values: Vec<Option<String>>) -> Self {
        let validity = values.iter().map(|v| v.is_some()).collect();
        let data = ColumnData::Text(values.into_iter().map(|v| v.unwrap_or_default()).collect());
        Column::new(name, data, validity).expect("lengths agree")
    }

    /// Category column whose dictionary is the sorted set of valid labels.
    pub fn category<S: AsRef<str>>(name: impl Into<String>, values: &[Option<S>]) -> Self {
        let labels: Vec<String> =
            values.iter().flatten().map(|s| s.as_ref().to_string()).collect::<BTreeSet<_>>().into_iter().collect();
        Self::category_with_labels(name, values, labels).expect("dictionary covers all labels")
    }

    /// Category column with an explicit dictionary order. Every valid label
    /// must appear in `labels`.
    pub fn category_with_labels<S: AsRef<str>>(
        name: impl Into<String>,
        values: &[Option<S>],
        labels: Vec<String>,
    ) -> Result<Self, TabularError> {
        let name = name.into();
        let mut codes = Vec::with_capacity(values.len());
        let mut validity = Vec::with_capacity(values.len());
        for v in values {
            match v {
                Some(s) => {
                    let s = s.as_ref();
                    let code = labels.iter().position(|l| l == s).ok_or_else(|| {
                        TabularError::Schema(format!("label `{s}` missing from dictionary of `{name}`"))
                    })?;
                    codes.push(code as u32);
                    validity.push(true);
                }
                None => {
                    codes.push(0);
                    validity.push(false);
                }
            }
        }
        Column::new(name, ColumnData::Category { codes, labels }, validity)
    }

    fn normalize(&mut self) -> Result<(), TabularError> {
        let validity = &mut self.validity;
        match &mut self.data {
            ColumnData::Number(values) => {
                for (v, ok) in values.iter_mut().zip(validity.iter_mut()) {
                    if !v.is_finite() {
                        *ok = false;
                    }
                    if !*ok {
                        *v = 0.0;
                    }
                }
            }
            ColumnData::Boolean(values) => {
                for (v, ok) in values.iter_mut().zip(validity.iter()) {
                    if !*ok {
                        *v = false;
                    }
                }
            }
            ColumnData::Category { codes, labels } => {
                let distinct: BTreeSet<&String> = labels.iter().collect();
                if distinct.len() != labels.len() {
                    return Err(TabularError::Schema(format!(
                        "category dictionary of `{}` has duplicate labels",
                        self.name
                    )));
                }
                for (c, ok) in codes.iter_mut().zip(validity.iter()) {
                    if !*ok {
                        *c = 0;
                    } else if *c as usize >= labels.len() {
                        return Err(TabularError::Schema(format!("category code {c} out of range in `{}`", self.name)));
                    }
                }
            }
            ColumnData::Text(values) => {
                for (v, ok) in values.iter_mut().zip(validity.iter()) {
                    if !*ok {
                        v.clear();
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dtype(&self) -> Dtype {
        match self.data {
            ColumnData::Number(_) => Dtype::Number,
            ColumnData::Boolean(_) => Dtype::Boolean,
            ColumnData::Category { .. } => Dtype::Category,
            ColumnData::Text(_) => Dtype::Text,
        }
    }

    pub fn data(&self) -> &ColumnData {
        &self.data
    }

    pub fn validity(&self) -> &[bool] {
        &self.validity
    }

    pub fn len(&self) -> usize {
        self.validity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.validity.is_empty()
    }

    pub fn is_valid(&self, row: usize) -> bool {
        self.validity[row]
    }

    pub fn missing_count(&self) -> usize {
        self.validity.iter().filter(|v| !**v).count()
    }

    /// Category dictionary, if this is a category column.
    pub fn labels(&self) -> Option<&[String]> {
        match &self.data {
            ColumnData::Category { labels, .. } => Some(labels),
            _ => None,
        }
    }

    pub fn cell(&self, row: usize) -> CellRef<'_> {
        if !self.validity[row] {
            return CellRef::Missing;
        }
        match &self.data {
            ColumnData::Number(v) => CellRef::Number(v[row]),
            ColumnData::Boolean(v) => CellRef::Boolean(v[row]),
            ColumnData::Category { codes, labels } => CellRef::Category(&labels[codes[row] as usize]),
            ColumnData::Text(v) => CellRef::Text(&v[row]),
        }
    }

    pub fn with_name(&self, name: impl Into<String>) -> Column {
        Column { name: name.into(), ..self.clone() }
    }

    /// Rows selected by `indices`, in that order. Category dictionaries are kept.
    pub fn take(&self, indices: &[usize]) -> Column {
        let validity = indices.iter().map(|&i| self.validity[i]).collect();
        let data = match &self.data {
            ColumnData::Number(v) => ColumnData::Number(indices.iter().map(|&i| v[i]).collect()),
            ColumnData::Boolean(v) => ColumnData::Boolean(indices.iter().map(|&i| v[i]).collect()),
            ColumnData::Category { codes, labels } => {
                ColumnData::Category { codes: indices.iter().map(|&i| codes[i]).collect(), labels: labels.clone() }
            }
            ColumnData::Text(v) => ColumnData::Text(indices.iter().map(|&i| v[i].clone()).collect()),
        };
        Column { name: self.name.clone(), data, validity }
    }

    /// Per-row class index for a target column (category code, or 0/1 for
    /// booleans). Missing cells yield `None`.
    pub fn class_codes(&self) -> Option<Vec<Option<usize>>> {
        let codes = match &self.data {
            ColumnData::Category { codes, .. } => codes.iter().map(|&c| c as usize).collect::<Vec<_>>(),
            ColumnData::Boolean(v) => v.iter().map(|&b| b as usize).collect(),
            _ => return None,
        };
        Some(codes.into_iter().zip(&self.validity).map(|(c, &ok)| ok.then_some(c)).collect())
    }

    /// Number of classes a target column can take.
    pub fn class_count(&self) -> Option<usize> {
        match &self.data {
            ColumnData::Category { labels, .. } => Some(labels.len()),
            ColumnData::Boolean(_) => Some(2),
            _ => None,
        }
    }
}

/// Renders a number the way values are shown to people and written to CSV:
/// integral values keep one decimal, others use up to 6 significant digits.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return "NaN".to_string();
    }
    if v == v.trunc() && v.abs() < 1e15 {
        return format!("{v:.1}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s.contains('.') {
            s
        } else {
            format!("{s}.0")
        }
    } else {
        format!("{v:.5e}")
    }
}

/// Lossless number rendering used for CSV output.
pub fn format_number_exact(v: f64) -> String {
    let s = format!("{v}");
    if s.contains(['.', 'e', 'E']) {
        s
    } else {
        format!("{s}.0")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_cells_are_normalized() {
        let a = Column::new("a", ColumnData::Number(vec![1.0, 7.0]), vec![true, false]).unwrap();
        let b = Column::number("a", vec![Some(1.0), None]);
        assert_eq!(a, b);
        assert_eq!(a.cell(1), CellRef::Missing);
    }

    #[test]
    fn non_finite_numbers_become_missing() {
        let c = Column::number("x", vec![Some(f64::NAN), Some(f64::INFINITY), Some(2.0)]);
        assert_eq!(c.validity(), &[false, false, true]);
        assert_eq!(c.missing_count(), 2);
    }

    #[test]
    fn category_dictionary_is_sorted() {
        let c = Column::category("c", &[Some("x"), Some("b"), None, Some("o")]);
        assert_eq!(c.labels().unwrap(), &["b", "o", "x"]);
        assert_eq!(c.cell(0), CellRef::Category("x"));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(Column::new("a", ColumnData::Number(vec![1.0]), vec![true, true]).is_err());
    }

    #[test]
    fn number_display() {
        assert_eq!(format_number(30.0), "30.0");
        assert_eq!(format_number(1.16), "1.16");
        assert_eq!(format_number(126.0), "126.0");
        assert_eq!(format_number(0.009206349206349), "0.00920635");
        assert_eq!(format_number(-2.5), "-2.5");
        assert_eq!(format_number(123456.789), "123457.0");
    }
}
