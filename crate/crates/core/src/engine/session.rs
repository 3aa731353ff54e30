use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::store::{read_iterations, Store};
use super::{CandidateError, EngineError, EvalOutcome, Evaluator};
use crate::fedsl::{execute, parse, pretty_print, ErrorKind, ExecError, FeatureScript};
use crate::llm::{accumulate_usage, extract_code_block, ChatBackend, LlmConfig, UsageRecord};
use crate::models::{EvalMetrics, ModelSpec};
use crate::prompt::{build_prompt, render_performance_feedback, Feedback, FeedbackResult, PromptContext};
use crate::rng::derive_seed;
use crate::tabular::{summarize, Dtype, SplitPlan, Table};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionMode {
    #[default]
    Auto,
    Review,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Recorded for provenance only; the caller loads the data.
    pub data_path: Option<String>,
    /// Dataset description. Not persisted for blinded sessions.
    pub description: Option<String>,
    pub target: String,
    pub iterations: usize,
    pub model: ModelSpec,
    pub split_plan: SplitPlan,
    pub llm: LlmConfig,
    pub decision_mode: DecisionMode,
    pub blinded: bool,
    pub seed: u64,
    /// Rows sampled for the column summaries in each prompt.
    pub prompt_samples: usize,
    /// Where the session directory lives. `None` keeps everything in memory.
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

impl SessionConfig {
    pub fn new(target: impl Into<String>, description: impl Into<String>, seed: u64) -> Self {
        SessionConfig {
            data_path: None,
            description: Some(description.into()),
            target: target.into(),
            iterations: 10,
            model: ModelSpec::default(),
            split_plan: SplitPlan { seed, ..SplitPlan::default() },
            llm: LlmConfig::default(),
            decision_mode: DecisionMode::Auto,
            blinded: false,
            seed,
            prompt_samples: 10,
            out_dir: None,
        }
    }

    fn check(&self) -> Result<(), EngineError> {
        if self.iterations == 0 {
            return Err(EngineError::Config("iterations must be at least 1".into()));
        }
        self.model.check()?;
        self.llm.check()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accepted,
    Rejected,
    Error,
    /// Only seen in snapshots taken while a review decision is outstanding.
    Pending,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorStage {
    Extraction,
    Parse,
    Validation,
    Runtime,
    Evaluation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationError {
    pub stage: ErrorStage,
    /// Full message, as fed back to the model.
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: usize,
    pub prompt: String,
    pub raw_response: String,
    pub code: Option<String>,
    /// Canonical form of the parsed script.
    pub script: Option<String>,
    pub error: Option<IterationError>,
    pub outcome: Option<EvalOutcome>,
    pub decision: Decision,
    /// The human verdict in review mode.
    pub human_override: Option<bool>,
    pub human_note: Option<String>,
    /// What the next prompt is told about this iteration.
    pub feedback: Feedback,
    pub usage: UsageRecord,
    pub table_hash_before: String,
    pub table_hash_after: String,
    pub wall_time_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub per_split: Vec<EvalMetrics>,
    pub mean: EvalMetrics,
    pub data_hash: String,
    pub row_count: usize,
    pub split_sizes: Vec<(usize, usize)>,
    pub stratification_downgraded: bool,
    /// Schema the accepted script is applied to (after blinding).
    pub schema: Vec<(String, Dtype)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub index: usize,
    pub decision: Decision,
    pub roc_before: Option<f64>,
    pub roc_after: Option<f64>,
    pub acc_before: Option<f64>,
    pub acc_after: Option<f64>,
    pub delta_auc: Option<f64>,
    pub delta_acc: Option<f64>,
    pub decision_score: Option<f64>,
    pub human_override: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub baseline: EvalMetrics,
    /// Mean validation metrics of the current table.
    pub current: EvalMetrics,
    pub accepted: usize,
    pub rejected: usize,
    pub errors: usize,
    pub rows: Vec<ReportRow>,
    pub usage: UsageRecord,
    pub finished: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    IterationStarted,
    CandidateReady,
    DecisionRequired,
    IterationFinished,
    SessionFinished,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub kind: EventKind,
    pub iteration: usize,
    pub record: Option<IterationRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanDecision {
    pub accept: bool,
    #[serde(default)]
    pub note: Option<String>,
}

/// Observers and the review channel. All methods are optional.
pub trait SessionHooks: Send + Sync {
    fn on_event(&self, _event: &SessionEvent) {}

    /// Blocks until a human decides on `record`. `None` means no decision
    /// can be obtained.
    fn decide(&self, _record: &IterationRecord) -> Option<HumanDecision> {
        None
    }

    /// Replacement description for the next prompt.
    fn description_override(&self) -> Option<String> {
        None
    }

    /// Whether [`SessionHooks::decide`] is backed by a real channel.
    fn supports_review(&self) -> bool {
        false
    }
}

pub struct NoHooks;

impl SessionHooks for NoHooks {}

/// One engine run.
pub struct Session {
    pub config: SessionConfig,
    pub baseline: Baseline,
    pub iterations: Vec<IterationRecord>,
    /// Accepted scripts in order; their concatenation maps the input table to `working`.
    pub accepted: Vec<FeatureScript>,
    pub working: Table,
    evaluator: Evaluator,
    /// Per-split scores of `working`.
    current: Vec<EvalMetrics>,
    store: Option<Store>,
}

fn blind(table: Table) -> Result<Table, EngineError> {
    Ok(table.renamed(|i, _| format!("c{i}"))?)
}

fn mean(m: &[EvalMetrics]) -> EvalMetrics {
    let n = m.len().max(1) as f64;
    EvalMetrics {
        roc_auc: m.iter().map(|x| x.roc_auc).sum::<f64>() / n,
        accuracy: m.iter().map(|x| x.accuracy).sum::<f64>() / n,
    }
}

/// Code block, parsed script, scores and the resulting table.
type Candidate = (String, FeatureScript, EvalOutcome, Table);

impl Session {
    fn prepare(mut config: SessionConfig, data: Table) -> Result<Session, EngineError> {
        config.check()?;
        if data.target() != config.target {
            return Err(EngineError::Config(format!(
                "table target `{}` differs from configured target `{}`",
                data.target(),
                config.target
            )));
        }
        let working = if config.blinded {
            config.description = None;
            config.data_path = None;
            let t = blind(data)?;
            config.target = t.target().to_string();
            t
        } else {
            data
        };
        let evaluator = Evaluator::new(&working, &config.split_plan, config.model)?;
        let current = evaluator.score_table(&working)?;
        let baseline = Baseline {
            per_split: current.clone(),
            mean: mean(&current),
            data_hash: working.content_hash(),
            row_count: working.row_count(),
            split_sizes: evaluator.splits.splits.iter().map(|s| (s.train.len(), s.valid.len())).collect(),
            stratification_downgraded: evaluator.splits.stratification_downgraded,
            schema: working.schema(),
        };
        let store = config.out_dir.as_deref().map(Store::open).transpose()?;
        Ok(Session { config, baseline, iterations: vec![], accepted: vec![], working, evaluator, current, store })
    }

    pub fn accepted_script(&self) -> FeatureScript {
        FeatureScript::concat(&self.accepted)
    }

    pub fn usage(&self) -> UsageRecord {
        accumulate_usage(self.iterations.iter().map(|r| &r.usage))
    }

    pub fn report(&self, finished: bool) -> Report {
        let count = |d: Decision| self.iterations.iter().filter(|r| r.decision == d).count();
        Report {
            baseline: self.baseline.mean,
            current: mean(&self.current),
            accepted: count(Decision::Accepted),
            rejected: count(Decision::Rejected),
            errors: count(Decision::Error),
            rows: self
                .iterations
                .iter()
                .map(|r| {
                    let o = r.outcome.as_ref();
                    ReportRow {
                        index: r.index,
                        decision: r.decision,
                        roc_before: o.map(|o| o.mean_before.roc_auc),
                        roc_after: o.map(|o| o.mean_after.roc_auc),
                        acc_before: o.map(|o| o.mean_before.accuracy),
                        acc_after: o.map(|o| o.mean_after.accuracy),
                        delta_auc: o.map(|o| o.mean_delta_auc),
                        delta_acc: o.map(|o| o.mean_delta_acc),
                        decision_score: o.map(|o| o.decision_score),
                        human_override: r.human_override,
                    }
                })
                .collect(),
            usage: self.usage(),
            finished,
        }
    }

    fn persist(&self, finished: bool) -> Result<(), EngineError> {
        if let Some(store) = &self.store {
            store.write_state(self, finished)?;
        }
        Ok(())
    }

    fn prompt_context(&self, index: usize, hooks: &dyn SessionHooks, feedback: Option<Feedback>) -> PromptContext {
        let description = hooks.description_override().or_else(|| self.config.description.clone()).unwrap_or_default();
        PromptContext {
            description,
            column_summaries: summarize(
                &self.working,
                self.config.prompt_samples,
                derive_seed(self.config.seed, index as u64),
            ),
            train_row_count: self.working.row_count(),
            target_name: self.working.target().to_string(),
            accepted_scripts: self.accepted.iter().map(|s| s.source_text.trim().to_string()).collect(),
            feedback,
            blinded: self.config.blinded,
        }
    }

    /// Extract, parse, validate, execute and score one response.
    fn try_candidate(&self, raw: &str) -> Result<Candidate, (Option<String>, IterationError)> {
        let err = |stage, message: String| IterationError { stage, message };
        let code = extract_code_block(raw).map_err(|e| (None, err(ErrorStage::Extraction, e.to_string())))?;
        let script = parse(&code).map_err(|e| (Some(code.clone()), err(ErrorStage::Parse, e.to_string())))?;
        if script.is_empty() {
            return Err((Some(code), err(ErrorStage::Parse, "the codeblock contains no statements".into())));
        }
        match self.evaluator.evaluate(&self.working, &self.current, &script) {
            Ok((outcome, table)) => Ok((code, script, outcome, table)),
            Err(CandidateError::Script(e)) => {
                let stage =
                    if e.kind == ErrorKind::RuntimeError { ErrorStage::Runtime } else { ErrorStage::Validation };
                Err((Some(code), err(stage, e.to_string())))
            }
            Err(CandidateError::Model(e)) => Err((Some(code), err(ErrorStage::Evaluation, e.to_string()))),
        }
    }

    fn step(&mut self, index: usize, backend: &dyn ChatBackend, hooks: &dyn SessionHooks) -> Result<(), EngineError> {
        let started = Instant::now();
        hooks.on_event(&SessionEvent { kind: EventKind::IterationStarted, iteration: index, record: None });
        let feedback = self.iterations.last().map(|r| r.feedback.clone());
        let prompt = build_prompt(&self.prompt_context(index, hooks, feedback));
        let hash_before = self.working.content_hash();
        let (raw, usage) = backend.complete(&prompt)?;

        let mut rec = IterationRecord {
            index,
            prompt,
            raw_response: raw,
            code: None,
            script: None,
            error: None,
            outcome: None,
            decision: Decision::Pending,
            human_override: None,
            human_note: None,
            feedback: Feedback { code: String::new(), result: FeedbackResult::Error(String::new()) },
            usage,
            table_hash_before: hash_before.clone(),
            table_hash_after: hash_before,
            wall_time_secs: 0.0,
        };

        match self.try_candidate(&rec.raw_response) {
            Err((code, e)) => {
                rec.feedback = Feedback {
                    code: code.clone().unwrap_or_default(),
                    result: FeedbackResult::Error(e.message.clone()),
                };
                rec.code = code;
                rec.error = Some(e);
                rec.decision = Decision::Error;
            }
            Ok((code, script, mut outcome, table)) => {
                rec.code = Some(code.clone());
                rec.script = Some(pretty_print(&script));
                rec.outcome = Some(outcome.clone());
                hooks.on_event(&SessionEvent {
                    kind: EventKind::CandidateReady,
                    iteration: index,
                    record: Some(rec.clone()),
                });
                let accept = match self.config.decision_mode {
                    DecisionMode::Auto => outcome.recommended,
                    DecisionMode::Review => {
                        hooks.on_event(&SessionEvent {
                            kind: EventKind::DecisionRequired,
                            iteration: index,
                            record: Some(rec.clone()),
                        });
                        let d = hooks
                            .decide(&rec)
                            .ok_or_else(|| EngineError::Config("review decision channel closed".into()))?;
                        rec.human_override = Some(d.accept);
                        rec.human_note = d.note;
                        d.accept
                    }
                };
                outcome.accepted = accept;
                if accept {
                    self.current = outcome.splits.iter().map(|s| s.after).collect();
                    self.working = table;
                    self.accepted.push(script);
                }
                rec.feedback =
                    Feedback { code, result: FeedbackResult::Performance(render_performance_feedback(&outcome)) };
                rec.outcome = Some(outcome);
                rec.decision = if accept { Decision::Accepted } else { Decision::Rejected };
            }
        }
        rec.table_hash_after = self.working.content_hash();
        rec.wall_time_secs = started.elapsed().as_secs_f64();
        self.iterations.push(rec.clone());
        self.persist(false)?;
        hooks.on_event(&SessionEvent { kind: EventKind::IterationFinished, iteration: index, record: Some(rec) });
        Ok(())
    }

    fn run(&mut self, backend: &dyn ChatBackend, hooks: &dyn SessionHooks) -> Result<(), EngineError> {
        if self.config.decision_mode == DecisionMode::Review && !hooks.supports_review() {
            return Err(EngineError::Config("review mode needs a decision channel".into()));
        }
        while self.iterations.len() < self.config.iterations {
            let index = self.iterations.len() + 1;
            if let Err(e) = self.step(index, backend, hooks) {
                // Keep what finished; the in-flight iteration is lost.
                self.persist(false)?;
                return Err(e);
            }
        }
        self.persist(true)?;
        hooks.on_event(&SessionEvent {
            kind: EventKind::SessionFinished,
            iteration: self.iterations.len(),
            record: None,
        });
        Ok(())
    }

    /// Applies the accepted script to a table with the session's input schema.
    pub fn apply_final(&self, table: &Table) -> Result<Table, EngineError> {
        let input = if self.config.blinded { blind(table.clone())? } else { table.clone() };
        apply_final(&self.accepted_script(), &self.baseline.schema, &input)
    }
}

/// Applies `script` to `table` after checking that every column of
/// `expected_schema` is present with the same type.
pub fn apply_final(
    script: &FeatureScript,
    expected_schema: &[(String, Dtype)],
    table: &Table,
) -> Result<Table, EngineError> {
    for (name, dtype) in expected_schema {
        match table.column(name) {
            None => return Err(EngineError::SchemaMismatch(format!("column `{name}` is missing"))),
            Some(c) if c.dtype() != *dtype => {
                return Err(EngineError::SchemaMismatch(format!(
                    "column `{name}` is {} but the session saw {dtype}",
                    c.dtype()
                )))
            }
            Some(_) => {}
        }
    }
    Ok(execute(script, table)?)
}

/// Runs a fresh session over `data`, writing the session directory
/// incrementally when `config.out_dir` is set.
pub fn run_session(
    config: SessionConfig,
    data: Table,
    backend: &dyn ChatBackend,
    hooks: &dyn SessionHooks,
) -> Result<Session, EngineError> {
    let mut s = Session::prepare(config, data)?;
    if let Some(store) = &s.store {
        store.write_start(&s)?;
    }
    s.run(backend, hooks)?;
    Ok(s)
}

/// Continues a persisted session after its last completed iteration. `data`
/// must be the same table the session started from.
pub fn resume_session(
    dir: &Path,
    data: Table,
    backend: &dyn ChatBackend,
    hooks: &dyn SessionHooks,
) -> Result<Session, EngineError> {
    let text = std::fs::read_to_string(dir.join("config.json"))?;
    let mut config: SessionConfig =
        serde_json::from_str(&text).map_err(|e| EngineError::Store(format!("config.json: {e}")))?;
    let stored_target = config.target.clone();
    config.out_dir = Some(dir.to_path_buf());
    if config.blinded {
        // Blinded sessions store the anonymized target name.
        config.target = data.target().to_string();
    }
    let mut s = Session::prepare(config, data)?;
    if s.config.target != stored_target {
        return Err(EngineError::Store("target differs from the stored session".into()));
    }
    let stored: Baseline = serde_json::from_str(&std::fs::read_to_string(dir.join("baseline.json"))?)
        .map_err(|e| EngineError::Store(format!("baseline.json: {e}")))?;
    if stored.data_hash != s.baseline.data_hash {
        return Err(EngineError::Store("data differs from the table the session started with".into()));
    }
    for rec in read_iterations(dir)? {
        if rec.decision == Decision::Accepted {
            let code = rec.code.as_deref().ok_or_else(|| EngineError::Store("accepted record without code".into()))?;
            let script = parse(code).map_err(EngineError::Script)?;
            s.working = execute(&script, &s.working)?;
            s.accepted.push(script);
        }
        if rec.table_hash_after != s.working.content_hash() {
            return Err(EngineError::Store(format!("replaying iteration {} gives a different table", rec.index)));
        }
        s.iterations.push(rec);
    }
    s.current = s.evaluator.score_table(&s.working)?;
    backend.resume_after(s.iterations.len());
    s.run(backend, hooks)?;
    Ok(s)
}

impl From<ExecError> for IterationError {
    fn from(e: ExecError) -> Self {
        IterationError { stage: ErrorStage::Runtime, message: e.to_string() }
    }
}
