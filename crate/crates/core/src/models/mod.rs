//! Downstream classifiers, feature preprocessing and metrics.

mod forest;
pub mod logistic;
mod metrics;
mod preprocess;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use forest::{ForestModel, ForestParams, Tree};
pub use logistic::{LogisticModel, LogisticParams};
pub use metrics::{accuracy, argmax, binary_auc, roc_auc, EvalMetrics};
pub use preprocess::{ColumnRecipe, Encoding, Preprocessor, Recipe};

use crate::tabular::Table;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("training table is empty")]
    EmptyTraining,
    #[error("column `{0}` not found")]
    MissingColumn(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    LogisticRegression(LogisticParams),
    RandomForest(ForestParams),
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::LogisticRegression(LogisticParams::default())
    }
}

impl ModelSpec {
    pub fn logistic() -> Self {
        Self::default()
    }

    pub fn forest(seed: u64) -> Self {
        ModelSpec::RandomForest(ForestParams { seed, ..ForestParams::default() })
    }

    /// Same spec with its random seed replaced (no-op for logistic regression).
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            ModelSpec::RandomForest(p) => ModelSpec::RandomForest(ForestParams { seed, ..p }),
            other => other,
        }
    }

    pub fn encoding(&self) -> Encoding {
        match self {
            ModelSpec::LogisticRegression(_) => Encoding::OneHot,
            ModelSpec::RandomForest(_) => Encoding::Ordinal,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::LogisticRegression(_) => "logistic_regression",
            ModelSpec::RandomForest(_) => "random_forest",
        }
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail too
    pub fn check(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidParams(m.to_string()));
        match self {
            ModelSpec::LogisticRegression(p) => {
                if !(p.l2 >= 0.0 && p.l2.is_finite()) {
                    return bad("l2 must be a finite value >= 0");
                }
                if p.max_iter == 0 {
                    return bad("max_iter must be >= 1");
                }
                if !(p.tol > 0.0) {
                    return bad("tol must be > 0");
                }
            }
            ModelSpec::RandomForest(p) => {
                if p.n_trees == 0 || p.max_depth == 0 || p.min_leaf == 0 {
                    return bad("n_trees, max_depth and min_leaf must be >= 1");
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Logistic(LogisticModel),
    Forest(ForestModel),
}

impl Model {
    /// Class probabilities; every row sums to one.
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array2<f64>, ModelError> {
        match self {
            Model::Logistic(m) => {
                if x.ncols() != m.weights.nrows() {
                    return Err(ModelError::DimensionMismatch(format!(
                        "expected {} columns, got {}",
                        m.weights.nrows(),
                        x.ncols()
                    )));
                }
                Ok(m.predict_proba(x))
            }
            Model::Forest(m) => Ok(m.predict_proba(x)),
        }
    }
}

/// Fits `spec` on `x`/`y`. Class indices must be below `n_classes`.
pub fn train(spec: &ModelSpec, x: ArrayView2<f64>, y: &[usize], n_classes: usize) -> Result<Model, ModelError> {
    spec.check()?;
    if x.nrows() != y.len() {
        return Err(ModelError::DimensionMismatch(format!("{} rows but {} labels", x.nrows(), y.len())));
    }
    if y.is_empty() {
        return Err(ModelError::EmptyTraining);
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(ModelError::DimensionMismatch(format!("label {bad} but only {n_classes} classes")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    Ok(match spec {
        ModelSpec::LogisticRegression(p) => Model::Logistic(logistic::fit(p, x, y, n_classes)),
        ModelSpec::RandomForest(p) => Model::Forest(forest::fit(p, x, y, n_classes)),
    })
}

/// Fits the preprocessor and model on `train` and scores `valid`.
pub fn fit_and_score(spec: &ModelSpec, train_table: &Table, valid: &Table) -> Result<EvalMetrics, ModelError> {
    let pre = Preprocessor::fit(train_table, spec.encoding())?;
    let xt = pre.transform(train_table)?;
    let xv = pre.transform(valid)?;
    let k = train_table.class_count();
    let model = train(spec, xt.view(), &train_table.labels(), k)?;
    let p = model.predict_proba(xv.view())?;
    let yv = valid.labels();
    Ok(EvalMetrics { roc_auc: roc_auc(&p, &yv)?, accuracy: accuracy(&p, &yv) })
}
