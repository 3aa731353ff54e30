use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::fedsl::{execute, FeatureScript};
use crate::models::{fit_and_score, ModelSpec};
use crate::rng::derive_seed;
use crate::tabular::{make_splits, SplitPlan, Table};

/// One dataset with the script to compare against the raw table.
#[derive(Clone, Debug)]
pub struct BenchDataset {
    pub name: String,
    pub table: Table,
    pub script: FeatureScript,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dataset: String,
    pub model: String,
    /// Test ROC AUC per repetition.
    pub without: Vec<f64>,
    pub with: Vec<f64>,
    pub mean_without: f64,
    pub std_without: f64,
    pub mean_with: f64,
    pub std_with: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub repetitions: usize,
    /// Split and model seed of each repetition.
    pub seeds: Vec<u64>,
    pub rows: Vec<BenchRow>,
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

/// `0.6989 ±.08`: four decimals for the mean, two for the spread with the
/// leading zero dropped.
pub fn format_mean_std(mean: f64, std: f64) -> String {
    let s = format!("{std:.2}");
    let s = s.strip_prefix('0').unwrap_or(&s);
    format!("{mean:.4} ±{s}")
}

/// Held-out comparison: each repetition draws one stratified 50/50 split,
/// shared by both conditions, and scores test ROC AUC.
pub fn run_benchmark(
    datasets: &[BenchDataset],
    models: &[ModelSpec],
    repetitions: usize,
    seed: u64,
) -> Result<BenchReport, EngineError> {
    if repetitions == 0 {
        return Err(EngineError::Config("repetitions must be at least 1".into()));
    }
    let seeds: Vec<u64> = (0..repetitions as u64).map(|r| derive_seed(seed, r)).collect();
    let mut rows = vec![];
    for ds in datasets {
        let engineered = execute(&ds.script, &ds.table)?;
        let splits: Vec<_> = seeds
            .iter()
            .map(|&s| {
                let plan = SplitPlan { seed: s, n_splits: 1, valid_fraction: 0.5, stratified: true };
                make_splits(&ds.table, &plan).map(|sp| sp.splits.into_iter().next().expect("one split"))
            })
            .collect::<Result<_, _>>()?;
        for spec in models {
            let mut without = vec![];
            let mut with = vec![];
            for (split, &s) in splits.iter().zip(&seeds) {
                let spec = spec.with_seed(s);
                for (table, out) in [(&ds.table, &mut without), (&engineered, &mut with)] {
                    let m = fit_and_score(&spec, &table.take(&split.train), &table.take(&split.valid))?;
                    out.push(m.roc_auc);
                }
            }
            let (mean_without, std_without) = mean_std(&without);
            let (mean_with, std_with) = mean_std(&with);
            rows.push(BenchRow {
                dataset: ds.name.clone(),
                model: spec.name().to_string(),
                without,
                with,
                mean_without,
                std_without,
                mean_with,
                std_with,
                delta: mean_with - mean_without,
            });
        }
    }
    Ok(BenchReport { repetitions, seeds, rows })
}
