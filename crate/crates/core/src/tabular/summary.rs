use rand::seq::index;

use super::column::{Cell, CellRef, Dtype};
use super::Table;
use crate::rng::rng_for;

/// Per-column description used to build prompts.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnSummary {
    pub name: String,
    pub dtype: Dtype,
    /// Fraction of missing cells in `[0, 1]`.
    pub missing_fraction: f64,
    /// Values from the sampled rows; the same rows for every column.
    pub samples: Vec<Option<Cell>>,
}

/// Summarizes every column. Sample rows are drawn without replacement from
/// `rng_seed` and listed in ascending row order.
pub fn summarize(table: &Table, n_samples: usize, rng_seed: u64) -> Vec<ColumnSummary> {
    let n = table.row_count();
    let k = n_samples.min(n);
    let mut rows = index::sample(&mut rng_for(rng_seed, 0), n, k).into_vec();
    rows.sort_unstable();
    table
        .columns()
        .iter()
        .map(|c| ColumnSummary {
            name: c.name().to_string(),
            dtype: c.dtype(),
            missing_fraction: if n == 0 { 0.0 } else { c.missing_count() as f64 / n as f64 },
            samples: rows
                .iter()
                .map(|&r| match c.cell(r) {
                    CellRef::Missing => None,
                    CellRef::Number(v) => Some(Cell::Number(v)),
                    CellRef::Boolean(b) => Some(Cell::Boolean(b)),
                    CellRef::Category(s) | CellRef::Text(s) => Some(Cell::Text(s.to_string())),
                })
                .collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::Column;

    #[test]
    fn missing_fraction_third() {
        let t = Table::new(
            vec![
                Column::number("a", vec![Some(1.0), None, Some(2.0)]),
                Column::category("y", &[Some("p"), Some("q"), Some("p")]),
            ],
            "y",
        )
        .unwrap();
        let s = summarize(&t, 2, 0);
        assert!((s[0].missing_fraction - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(format!("{:.3}", s[0].missing_fraction), "0.333");
        assert_eq!(s[0].samples.len(), 2);
    }

    #[test]
    fn samples_align_and_cover_small_tables() {
        let t = Table::new(
            vec![
                Column::number("Age", vec![Some(30.0), Some(0.0), Some(37.0)]),
                Column::category("y", &[Some("a"), Some("b"), Some("c")]),
            ],
            "y",
        )
        .unwrap();
        let s = summarize(&t, 3, 42);
        assert_eq!(s[0].samples, vec![Some(Cell::Number(30.0)), Some(Cell::Number(0.0)), Some(Cell::Number(37.0))]);
        assert_eq!(
            s[1].samples,
            vec![Some(Cell::Text("a".into())), Some(Cell::Text("b".into())), Some(Cell::Text("c".into()))]
        );
        assert_eq!(summarize(&t, 10, 42)[0].samples.len(), 3);
    }
}
