//! The accept/reject loop: prompt, generate, check, evaluate, keep or roll
//! back. Also candidate scoring, session persistence and the held-out
//! benchmark.

mod bench;
mod session;
mod store;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bench::{format_mean_std, run_benchmark, BenchDataset, BenchReport, BenchRow};
pub use session::{
    apply_final, resume_session, run_session, Baseline, Decision, DecisionMode, ErrorStage, EventKind, HumanDecision,
    IterationError, IterationRecord, NoHooks, Report, ReportRow, Session, SessionConfig, SessionEvent, SessionHooks,
};
pub use store::{read_iterations, SESSION_FILES};

use crate::fedsl::{evaluate, validate, ExecError, FeatureScript};
use crate::llm::LlmError;
use crate::models::{fit_and_score, EvalMetrics, ModelError, ModelSpec};
use crate::par::map_range;
use crate::rng::derive_seed;
use crate::tabular::{make_splits, SplitPlan, Splits, Table, TabularError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("data error: {0}")]
    Data(#[from] TabularError),
    #[error("{0}")]
    Script(#[from] ExecError),
    #[error("model error: {0}")]
    Model(#[from] ModelError),
    #[error("LLM error: {0}")]
    Llm(#[from] LlmError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("session store: {0}")]
    Store(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitOutcome {
    pub before: EvalMetrics,
    pub after: EvalMetrics,
}

/// Result of scoring one candidate against the current table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub splits: Vec<SplitOutcome>,
    pub mean_before: EvalMetrics,
    pub mean_after: EvalMetrics,
    pub mean_delta_auc: f64,
    pub mean_delta_acc: f64,
    pub decision_score: f64,
    /// What the metric rule recommends (`decision_score > 0`).
    pub recommended: bool,
    /// The final verdict; differs from `recommended` only after a human override.
    pub accepted: bool,
}

pub fn decision_score(mean_delta_auc: f64, mean_delta_acc: f64) -> f64 {
    (mean_delta_auc + mean_delta_acc) / 2.0
}

fn mean_metrics(m: impl Iterator<Item = EvalMetrics> + Clone) -> EvalMetrics {
    let n = m.clone().count().max(1) as f64;
    let (a, c) = m.fold((0.0, 0.0), |(a, c), x| (a + x.roc_auc, c + x.accuracy));
    EvalMetrics { roc_auc: a / n, accuracy: c / n }
}

impl EvalOutcome {
    pub fn from_splits(splits: Vec<SplitOutcome>) -> EvalOutcome {
        let n = splits.len().max(1) as f64;
        let mean_delta_auc = splits.iter().map(|s| s.after.roc_auc - s.before.roc_auc).sum::<f64>() / n;
        let mean_delta_acc = splits.iter().map(|s| s.after.accuracy - s.before.accuracy).sum::<f64>() / n;
        let score = decision_score(mean_delta_auc, mean_delta_acc);
        EvalOutcome {
            mean_before: mean_metrics(splits.iter().map(|s| s.before)),
            mean_after: mean_metrics(splits.iter().map(|s| s.after)),
            splits,
            mean_delta_auc,
            mean_delta_acc,
            decision_score: score,
            recommended: score > 0.0,
            accepted: score > 0.0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CandidateError {
    #[error("{0}")]
    Script(ExecError),
    #[error("{0}")]
    Model(ModelError),
}

/// Fixed validation splits and model for one table lineage.
#[derive(Clone, Debug)]
pub struct Evaluator {
    pub splits: Splits,
    pub spec: ModelSpec,
    seed: u64,
}

impl Evaluator {
    pub fn new(table: &Table, plan: &SplitPlan, spec: ModelSpec) -> Result<Evaluator, EngineError> {
        spec.check()?;
        Ok(Evaluator { splits: make_splits(table, plan)?, spec, seed: plan.seed })
    }

    /// Model seed for split `k`; shared by before and after fits.
    fn spec_for(&self, k: usize) -> ModelSpec {
        self.spec.with_seed(derive_seed(derive_seed(self.seed, 0xF0_4E57), k as u64))
    }

    /// Fits on each split's train rows of `table` and scores its valid rows.
    pub fn score_table(&self, table: &Table) -> Result<Vec<EvalMetrics>, ModelError> {
        map_range(self.splits.splits.len(), |k| {
            let s = &self.splits.splits[k];
            fit_and_score(&self.spec_for(k), &table.take(&s.train), &table.take(&s.valid))
        })
        .into_iter()
        .collect()
    }

    /// Applies `script` to all of `base` and compares per-split scores with
    /// `before` (the scores of `base` itself). Returns the transformed table too.
    pub fn evaluate(
        &self,
        base: &Table,
        before: &[EvalMetrics],
        script: &FeatureScript,
    ) -> Result<(EvalOutcome, Table), CandidateError> {
        let typed = validate(script, &base.schema(), base.target()).map_err(CandidateError::Script)?;
        let after_table = evaluate(&typed, base).map_err(CandidateError::Script)?;
        let after = self.score_table(&after_table).map_err(CandidateError::Model)?;
        let splits = before.iter().zip(&after).map(|(b, a)| SplitOutcome { before: *b, after: *a }).collect();
        Ok((EvalOutcome::from_splits(splits), after_table))
    }
}

/// Scores `script` on `base` with fresh splits from `plan`.
pub fn evaluate_candidate(
    base: &Table,
    script: &FeatureScript,
    plan: &SplitPlan,
    spec: &ModelSpec,
) -> Result<EvalOutcome, CandidateError> {
    let ev = Evaluator::new(base, plan, *spec).map_err(|e| match e {
        EngineError::Model(m) => CandidateError::Model(m),
        other => CandidateError::Model(ModelError::InvalidParams(other.to_string())),
    })?;
    let before = ev.score_table(base).map_err(CandidateError::Model)?;
    ev.evaluate(base, &before, script).map(|(o, _)| o)
}
