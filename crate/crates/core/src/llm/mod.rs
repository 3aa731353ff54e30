//! Chat backends (HTTP and scripted), code-block extraction and usage
//! accounting.

mod extract;
mod http;
mod scripted;

use std::collections::BTreeMap;
use std::ops::Add;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use extract::{extract_code_block, ExtractError};
pub use http::HttpBackend;
pub use scripted::{parse_playbook, ScriptedBackend};

/// System message sent with every request.
pub const SYSTEM_PROMPT: &str =
    "You write feature engineering code for tabular classification in the fedsl expression language. Reply with one fenced codeblock.";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Http,
    Scripted,
}

/// Price in currency units per 1,000 tokens.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Price {
    pub prompt_per_1k: f64,
    pub completion_per_1k: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub backend: BackendKind,
    pub endpoint_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_response_tokens: u32,
    pub request_timeout_secs: f64,
    pub max_retries: u32,
    /// First backoff delay; doubles per retry.
    pub retry_base_delay_ms: u64,
    /// Environment variable holding the API key. Empty means no key is sent.
    pub api_key_env_var: String,
    pub prices: BTreeMap<String, Price>,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            backend: BackendKind::Scripted,
            endpoint_url: "https://api.openai.com/v1/chat/completions".into(),
            model_name: "gpt-4".into(),
            temperature: 0.5,
            max_response_tokens: 1024,
            request_timeout_secs: 120.0,
            max_retries: 3,
            retry_base_delay_ms: 500,
            api_key_env_var: "LLM_API_KEY".into(),
            prices: BTreeMap::new(),
        }
    }
}

impl LlmConfig {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail too
    pub fn check(&self) -> Result<(), LlmError> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(LlmError::Config("temperature must be >= 0".into()));
        }
        if !(self.request_timeout_secs > 0.0) {
            return Err(LlmError::Config("request timeout must be > 0".into()));
        }
        Ok(())
    }

    pub fn cost(&self, prompt_tokens: u64, completion_tokens: u64) -> f64 {
        self.prices.get(&self.model_name).map_or(0.0, |p| {
            prompt_tokens as f64 / 1000.0 * p.prompt_per_1k + completion_tokens as f64 / 1000.0 * p.completion_per_1k
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UsageRecord {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub estimated_cost: f64,
    pub latency_secs: f64,
}

impl Add for UsageRecord {
    type Output = UsageRecord;

    fn add(self, o: UsageRecord) -> UsageRecord {
        UsageRecord {
            prompt_tokens: self.prompt_tokens + o.prompt_tokens,
            completion_tokens: self.completion_tokens + o.completion_tokens,
            estimated_cost: self.estimated_cost + o.estimated_cost,
            latency_secs: self.latency_secs + o.latency_secs,
        }
    }
}

pub fn accumulate_usage<'a>(records: impl IntoIterator<Item = &'a UsageRecord>) -> UsageRecord {
    records.into_iter().fold(UsageRecord::default(), |a, r| a + *r)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LlmError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("playbook exhausted after {0} responses")]
    PlaybookExhausted(usize),
    #[error("configuration error: {0}")]
    Config(String),
}

/// A chat model. Implementations must be usable from several threads.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<(String, UsageRecord), LlmError>;

    /// Called when a session resumes after `consumed` completed queries.
    fn resume_after(&self, _consumed: usize) {}
}

/// Builds the backend described by `config`. `playbook` is required for the
/// scripted backend.
pub fn backend_from_config(
    config: &LlmConfig,
    playbook: Option<Vec<String>>,
) -> Result<Box<dyn ChatBackend>, LlmError> {
    config.check()?;
    match config.backend {
        BackendKind::Scripted => {
            let p = playbook.ok_or_else(|| LlmError::Config("scripted backend needs a playbook".into()))?;
            Ok(Box::new(ScriptedBackend::new(p)))
        }
        BackendKind::Http => Ok(Box::new(HttpBackend::new(config.clone())?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_sums() {
        assert_eq!(accumulate_usage(&[]), UsageRecord::default());
        let a = UsageRecord { prompt_tokens: 10, completion_tokens: 5, estimated_cost: 0.01, latency_secs: 1.0 };
        let b = UsageRecord { prompt_tokens: 20, completion_tokens: 5, estimated_cost: 0.02, latency_secs: 0.5 };
        let s = accumulate_usage(&[a, b]);
        assert_eq!((s.prompt_tokens, s.completion_tokens), (30, 10));
        assert!((s.estimated_cost - 0.03).abs() < 1e-12);
        assert_eq!(s.latency_secs, 1.5);
    }

    #[test]
    fn unknown_model_costs_nothing() {
        let mut c = LlmConfig::default();
        assert_eq!(c.cost(1000, 1000), 0.0);
        c.prices.insert("gpt-4".into(), Price { prompt_per_1k: 0.03, completion_per_1k: 0.06 });
        assert!((c.cost(1000, 500) - 0.06).abs() < 1e-12);
    }
}
