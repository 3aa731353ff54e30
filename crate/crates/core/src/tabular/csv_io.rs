use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use super::column::{format_number_exact, CellRef, Column, Dtype};
use super::{Table, TabularError};

/// Column name to forced dtype.
pub type SchemaOverride = BTreeMap<String, Dtype>;

/// Parses a schema override file: one `column=dtype` pair per line. Blank
/// lines and `#` comments are skipped.
pub fn parse_schema_override(text: &str) -> Result<SchemaOverride, TabularError> {
    let mut out = SchemaOverride::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, dtype) = line
            .rsplit_once('=')
            .ok_or_else(|| TabularError::Schema(format!("line {}: expected `column=dtype`", lineno + 1)))?;
        out.insert(name.trim().to_string(), dtype.parse()?);
    }
    Ok(out)
}

pub fn read_schema_override(path: impl AsRef<Path>) -> Result<SchemaOverride, TabularError> {
    parse_schema_override(&fs::read_to_string(path)?)
}

pub fn load_csv(
    path: impl AsRef<Path>,
    schema_override: Option<&SchemaOverride>,
    target: &str,
) -> Result<Table, TabularError> {
    let text = fs::read_to_string(path)?;
    parse_csv(&text, schema_override, target)
}

/// Parses CSV text with a header row. Empty fields are missing.
///
/// Inference order per column: number, boolean, category (at most
/// `max(20, 5% of rows)` distinct values), text. The target column is always
/// categorical unless overridden to boolean.
pub fn parse_csv(text: &str, schema_override: Option<&SchemaOverride>, target: &str) -> Result<Table, TabularError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers: Vec<String> =
        reader.headers().map_err(|e| TabularError::Csv(e.to_string()))?.iter().map(str::to_string).collect();
    let mut seen = HashSet::new();
    for h in &headers {
        if !seen.insert(h.as_str()) {
            return Err(TabularError::DuplicateColumn(h.clone()));
        }
    }
    if !headers.iter().any(|h| h == target) {
        return Err(TabularError::MissingTarget(target.to_string()));
    }
    if let Some(ov) = schema_override {
        if let Some(unknown) = ov.keys().find(|k| !headers.contains(k)) {
            return Err(TabularError::Schema(format!("override names unknown column `{unknown}`")));
        }
    }

    let mut raw: Vec<Vec<Option<String>>> = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record.map_err(|e| TabularError::Csv(e.to_string()))?;
        for (col, field) in raw.iter_mut().zip(record.iter()) {
            col.push((!field.is_empty()).then(|| field.to_string()));
        }
    }
    let rows = raw.first().map_or(0, Vec::len);

    let mut columns = Vec::with_capacity(headers.len());
    for (name, cells) in headers.iter().zip(raw) {
        let forced = schema_override.and_then(|ov| ov.get(name)).copied();
        let dtype = match forced {
            Some(d) => d,
            None if name == target => Dtype::Category,
            None => infer_dtype(&cells, rows),
        };
        columns.push(build_column(name, dtype, &cells)?);
    }
    Table::new(columns, target)
}

fn parse_number(s: &str) -> Option<f64> {
    let t = s.trim();
    // Rust accepts "inf"/"nan"; a decimal number may only contain an exponent marker.
    if t.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E') {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" => Some(true),
        "false" | "0" => Some(false),
        _ => None,
    }
}

fn infer_dtype(cells: &[Option<String>], rows: usize) -> Dtype {
    let present = || cells.iter().flatten();
    if present().all(|s| parse_number(s).is_some()) {
        return Dtype::Number;
    }
    if present().all(|s| parse_bool(s).is_some()) {
        return Dtype::Boolean;
    }
    let distinct: BTreeSet<&String> = present().collect();
    let limit = 20usize.max(rows * 5 / 100);
    if distinct.len() <= limit {
        Dtype::Category
    } else {
        Dtype::Text
    }
}

fn build_column(name: &str, dtype: Dtype, cells: &[Option<String>]) -> Result<Column, TabularError> {
    let bad = |s: &str| TabularError::Schema(format!("column `{name}`: cannot read `{s}` as {dtype}"));
    Ok(match dtype {
        Dtype::Number => Column::number(
            name,
            cells
                .iter()
                .map(|c| c.as_deref().map(|s| parse_number(s).ok_or_else(|| bad(s))).transpose())
                .collect::<Result<_, _>>()?,
        ),
        Dtype::Boolean => Column::boolean(
            name,
            cells
                .iter()
                .map(|c| c.as_deref().map(|s| parse_bool(s).ok_or_else(|| bad(s))).transpose())
                .collect::<Result<_, _>>()?,
        ),
        Dtype::Category => Column::category(name, cells),
        Dtype::Text => Column::text(name, cells.to_vec()),
    })
}

/// Serializes a table as CSV; missing cells become empty fields.
pub fn to_csv_string(table: &Table) -> Result<String, TabularError> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let csv_err = |e: csv::Error| TabularError::Csv(e.to_string());
    w.write_record(table.columns().iter().map(Column::name)).map_err(csv_err)?;
    for row in 0..table.row_count() {
        let record: Vec<String> = table
            .columns()
            .iter()
            .map(|c| match c.cell(row) {
                CellRef::Missing => String::new(),
                CellRef::Number(v) => format_number_exact(v),
                CellRef::Boolean(b) => b.to_string(),
                CellRef::Category(s) | CellRef::Text(s) => s.to_string(),
            })
            .collect();
        w.write_record(&record).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| TabularError::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| TabularError::Csv(e.to_string()))
}

pub fn write_csv(table: &Table, path: impl AsRef<Path>) -> Result<(), TabularError> {
    fs::write(path, to_csv_string(table)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::ColumnData;

    #[test]
    fn infers_number_and_category() {
        let t = parse_csv("a,b\n1,x\n2,y\n", None, "b").unwrap();
        assert_eq!(t.row_count(), 2);
        assert_eq!(t.column("a").unwrap().dtype(), Dtype::Number);
        assert_eq!(t.column("b").unwrap().dtype(), Dtype::Category);
    }

    #[test]
    fn empty_cell_is_missing() {
        let t = parse_csv("a,y\n1,p\n,q\n3,p\n", None, "y").unwrap();
        let a = t.column("a").unwrap();
        assert_eq!(a.validity(), &[true, false, true]);
        assert_eq!(a.cell(1), CellRef::Missing);
    }

    #[test]
    fn kidney_stone_values_load_as_numbers() {
        let t = parse_csv("urea,calc,target\n126.0,1.16,1\n325.0,7.64,0\n282.0,3.46,1\n", None, "target").unwrap();
        let urea = t.column("urea").unwrap();
        let calc = t.column("calc").unwrap();
        assert_eq!(urea.dtype(), Dtype::Number);
        assert_eq!(urea.cell(0), CellRef::Number(126.0));
        assert_eq!(calc.cell(0), CellRef::Number(1.16));
        // Numeric-looking targets are still classes.
        assert_eq!(t.target_column().dtype(), Dtype::Category);
    }

    #[test]
    fn boolean_and_text_inference() {
        let mut text = String::from("flag,name,y\n");
        for i in 0..30 {
            text.push_str(&format!("{},n{i},{}\n", if i % 2 == 0 { "True" } else { "0" }, i % 2));
        }
        let t = parse_csv(&text, None, "y").unwrap();
        assert_eq!(t.column("flag").unwrap().dtype(), Dtype::Boolean);
        assert_eq!(t.column("name").unwrap().dtype(), Dtype::Text);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_csv("a,b\n1,2\n", None, "c"), Err(TabularError::MissingTarget(_))));
        assert!(matches!(parse_csv("a,a\n1,2\n", None, "a"), Err(TabularError::DuplicateColumn(_))));
        assert!(matches!(parse_csv("a,b\n1,2,3\n", None, "b"), Err(TabularError::Csv(_))));
    }

    #[test]
    fn schema_override_forces_dtype() {
        let ov = parse_schema_override("# comment\na=category\n\n").unwrap();
        let t = parse_csv("a,b\n1,x\n2,y\n", Some(&ov), "b").unwrap();
        assert_eq!(t.column("a").unwrap().dtype(), Dtype::Category);
        let bad = parse_schema_override("b=number").unwrap();
        assert!(parse_csv("a,b\n1,x\n", Some(&bad), "a").is_err());
        assert!(parse_schema_override("nonsense").is_err());
    }

    #[test]
    fn inf_and_nan_strings_are_not_numbers() {
        let t = parse_csv("a,y\ninf,p\n1,q\n", None, "y").unwrap();
        assert!(matches!(t.column("a").unwrap().data(), ColumnData::Category { .. }));
    }
}
