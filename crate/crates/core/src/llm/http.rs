use std::thread::sleep;
use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::json;

use super::{ChatBackend, LlmConfig, LlmError, UsageRecord, SYSTEM_PROMPT};

/// OpenAI-style chat-completion client.
pub struct HttpBackend {
    config: LlmConfig,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize, Default)]
struct Usage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

#[derive(Deserialize)]
struct Completion {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<Usage>,
}

enum Attempt {
    Done(String, u64, u64),
    Retry(LlmError),
    Fail(LlmError),
}

impl HttpBackend {
    pub fn new(config: LlmConfig) -> Result<Self, LlmError> {
        config.check()?;
        let api_key =
            if config.api_key_env_var.is_empty() {
                None
            } else {
                Some(std::env::var(&config.api_key_env_var).map_err(|_| {
                    LlmError::Config(format!("environment variable {} is not set", config.api_key_env_var))
                })?)
            };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.request_timeout_secs))
            .build()
            .map_err(|e| LlmError::Config(e.to_string()))?;
        Ok(HttpBackend { config, api_key, client })
    }

    fn attempt(&self, body: &serde_json::Value) -> Attempt {
        let mut req = self.client.post(&self.config.endpoint_url).json(body);
        if let Some(k) = &self.api_key {
            req = req.bearer_auth(k);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(LlmError::Transport(e.to_string())),
        };
        let status = resp.status().as_u16();
        let text = match resp.text() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(LlmError::Transport(e.to_string())),
        };
        if status == 429 || status == 503 {
            return Attempt::Retry(LlmError::Status { status, body: text });
        }
        if !(200..300).contains(&status) {
            return Attempt::Fail(LlmError::Status { status, body: text });
        }
        let parsed: Completion = match serde_json::from_str(&text) {
            Ok(c) => c,
            Err(e) => return Attempt::Fail(LlmError::Malformed(e.to_string())),
        };
        let Some(content) = parsed.choices.into_iter().next().and_then(|c| c.message.content) else {
            return Attempt::Fail(LlmError::Malformed("no choices[0].message.content".into()));
        };
        let u = parsed.usage.unwrap_or_default();
        Attempt::Done(content, u.prompt_tokens, u.completion_tokens)
    }
}

impl ChatBackend for HttpBackend {
    fn complete(&self, prompt: &str) -> Result<(String, UsageRecord), LlmError> {
        let body = json!({
            "model": self.config.model_name,
            "messages": [
                {"role": "system", "content": SYSTEM_PROMPT},
                {"role": "user", "content": prompt},
            ],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_response_tokens,
        });
        let start = Instant::now();
        let mut attempt = 0;
        loop {
            match self.attempt(&body) {
                Attempt::Done(text, p, c) => {
                    let usage = UsageRecord {
                        prompt_tokens: p,
                        completion_tokens: c,
                        estimated_cost: self.config.cost(p, c),
                        latency_secs: start.elapsed().as_secs_f64(),
                    };
                    return Ok((text, usage));
                }
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(e) => {
                    if attempt >= self.config.max_retries {
                        return Err(e);
                    }
                    log::warn!("request failed ({e}); retrying");
                    sleep(Duration::from_millis(self.config.retry_base_delay_ms.saturating_mul(1 << attempt.min(16))));
                    attempt += 1;
                }
            }
        }
    }
}
