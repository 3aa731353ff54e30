//! Prompt construction. Everything here is a pure function of its inputs.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::engine::EvalOutcome;
use crate::fedsl::FUNCTIONS;
use crate::tabular::{format_number, Cell, ColumnSummary};

/// Opening fence the model must use.
pub const FENCE_OPEN: &str = "```fedsl";
/// Closing fence the model must use.
pub const FENCE_CLOSE: &str = "```end";
/// Prefix of the feedback line for failed iterations.
pub const ERROR_FEEDBACK_PREFIX: &str = "Feedback: failed with error: ";

const SAMPLES_PER_COLUMN: usize = 3;

const BLINDED_NOTICE: &str = "(withheld: no context is available for this data; columns are anonymized)";

/// What happened to the previous candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "text", rename_all = "snake_case")]
pub enum FeedbackResult {
    /// Parse, validation, extraction or runtime error message.
    Error(String),
    /// Output of [`render_performance_feedback`].
    Performance(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Feedback {
    /// Code of the previous candidate (may be empty if none was extracted).
    pub code: String,
    pub result: FeedbackResult,
}

impl Feedback {
    /// The line that is placed after the previous code.
    pub fn line(&self) -> String {
        match &self.result {
            FeedbackResult::Error(e) => format!("{ERROR_FEEDBACK_PREFIX}{e}"),
            FeedbackResult::Performance(p) => format!("Feedback: {p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PromptContext {
    pub description: String,
    pub column_summaries: Vec<ColumnSummary>,
    pub train_row_count: usize,
    pub target_name: String,
    /// Full texts of accepted scripts, oldest first.
    pub accepted_scripts: Vec<String>,
    pub feedback: Option<Feedback>,
    /// Hide the description and show columns as `c0..c{M-1}`.
    pub blinded: bool,
}

fn render_cell(c: &Option<Cell>) -> String {
    match c {
        None => "NaN".to_string(),
        Some(Cell::Number(v)) => format_number(*v),
        Some(Cell::Boolean(b)) => b.to_string(),
        Some(Cell::Text(s)) => format!("'{s}'"),
    }
}

fn render_samples(s: &ColumnSummary) -> String {
    let vals: Vec<String> = s.samples.iter().take(SAMPLES_PER_COLUMN).map(render_cell).collect();
    format!("[{}]", vals.join(", "))
}

/// One line per column: `name (dtype): NaN-freq [p%], Samples [v1, v2, v3]`.
pub fn render_column_line(name: &str, s: &ColumnSummary) -> String {
    format!("{name} ({}): NaN-freq [{:.1}%], Samples {}", s.dtype, s.missing_fraction * 100.0, render_samples(s))
}

pub fn build_prompt(ctx: &PromptContext) -> String {
    let names: Vec<String> = if ctx.blinded {
        (0..ctx.column_summaries.len()).map(|i| format!("c{i}")).collect()
    } else {
        ctx.column_summaries.iter().map(|s| s.name.clone()).collect()
    };
    let target = match ctx.column_summaries.iter().position(|s| s.name == ctx.target_name) {
        Some(i) => names[i].clone(),
        None if ctx.blinded => "the target".to_string(),
        None => ctx.target_name.clone(),
    };
    let description = if ctx.blinded { BLINDED_NOTICE } else { ctx.description.trim() };

    let mut p = String::new();
    p.push_str(
        "A table `df` is loaded. You extend it with new columns written in fedsl, a small expression language.\n",
    );
    p.push_str("Context for `df` (inferred column types may be imprecise):\n");
    let _ = writeln!(p, "\"{description}\"\n");

    p.push_str("Columns in `df` with their types, share of missing cells and sample values:\n");
    for (name, s) in names.iter().zip(&ctx.column_summaries) {
        p.push_str(&render_column_line(name, s));
        p.push('\n');
    }
    p.push('\n');
    let _ = writeln!(p, "Number of samples (rows) in training dataset: {}\n", ctx.train_row_count);

    let _ =
        writeln!(p, "Write fedsl statements that add columns helping a downstream classifier predict \"{target}\".");
    p.push_str(
        "Useful columns bring in domain knowledge: combinations, transformations or groupings of existing columns.\n\
         Scale and offset of a column do not matter. Reference only columns that exist and respect their types.\n\
         This code also drops columns, when they are redundant or likely to hurt the classifier; on small tables this lowers the risk of overfitting.\n\
         Each candidate is refit on several train/validation splits and scored by ROC AUC and accuracy. It is kept only if the average of both gains is positive.\n\
         Added columns can be used by later codeblocks. Dropped columns are gone.\n\n",
    );

    p.push_str("Language reference:\n");
    p.push_str("  col(\"name\") reads a column. Literals: numbers, \"strings\", true, false.\n");
    p.push_str("  Operators: + - * / on numbers; == != < <= > >= comparisons; and, or, not on booleans.\n");
    p.push_str("  Missing cells propagate through operators; handle them with fill_missing or is_missing.\n");
    p.push_str("  Functions (no others exist):\n");
    for f in FUNCTIONS {
        let _ = writeln!(p, "    {}: {}", f.signature, f.summary);
    }
    p.push('\n');

    let example_inputs: Vec<String> = names
        .iter()
        .zip(&ctx.column_summaries)
        .filter(|(_, s)| s.name != ctx.target_name)
        .take(2)
        .map(|(n, s)| format!("'{n}': {}", render_samples(s)))
        .collect();
    p.push_str("Reason step by step for every column you add: choose a name, say why it helps, quote three sample values of each input column, then write the expression.\n");
    p.push_str("Format of a codeblock:\n");
    let _ = writeln!(p, "{FENCE_OPEN}");
    p.push_str("feature \"feature_name\" {\n");
    let _ = writeln!(
        p,
        "    usefulness: \"Why this adds real-world knowledge for predicting {target}. Input samples: {}, ...\"",
        example_inputs.join(", ")
    );
    p.push_str("    expr: <expression over existing columns>\n}\n");
    p.push_str("drop \"column_name\" reason \"Why this column is redundant.\"\n");
    let _ = writeln!(p, "{FENCE_CLOSE}");
    p.push_str("Open every codeblock with the fedsl fence and close it with the end fence exactly as above. Answer with one codeblock; it may hold several statements.\n");

    if !ctx.accepted_scripts.is_empty() {
        p.push_str("\nCodeblocks accepted so far (already applied to `df`):\n");
        for s in &ctx.accepted_scripts {
            p.push_str(s.trim_end());
            p.push('\n');
        }
    }

    if let Some(fb) = &ctx.feedback {
        p.push_str("\nPrevious codeblock:\n");
        if !fb.code.trim().is_empty() {
            p.push_str(fb.code.trim_end());
            p.push('\n');
        }
        p.push_str(&fb.line());
        p.push('\n');
    }

    p.push_str("\nCodeblock:\n");
    p
}

fn fixed3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

/// Before/after sentence shown to the model and printed by the CLI.
pub fn render_performance_feedback(outcome: &EvalOutcome) -> String {
    let b = &outcome.mean_before;
    let a = &outcome.mean_after;
    format!(
        "Performance before adding features ROC {}, ACC {}.\n\
         Performance after adding features ROC {}, ACC {}.\n\
         Improvement ROC {}, ACC {}. Code was executed and changes to df {}.",
        fixed3(b.roc_auc),
        fixed3(b.accuracy),
        fixed3(a.roc_auc),
        fixed3(a.accuracy),
        fixed3(outcome.mean_delta_auc),
        fixed3(outcome.mean_delta_acc),
        if outcome.accepted { "retained" } else { "discarded" },
    )
}
