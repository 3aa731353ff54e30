use std::path::Path;
use std::sync::Mutex;

use super::{ChatBackend, LlmError, UsageRecord};

/// Returns canned responses in order. Usage is always zero.
#[derive(Debug)]
pub struct ScriptedBackend {
    responses: Vec<String>,
    next: Mutex<usize>,
}

impl ScriptedBackend {
    pub fn new(responses: Vec<String>) -> Self {
        ScriptedBackend { responses, next: Mutex::new(0) }
    }

    /// Reads a playbook file: a JSON array of strings.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| LlmError::Config(format!("cannot read playbook {}: {e}", path.as_ref().display())))?;
        Ok(Self::new(parse_playbook(&text)?))
    }

    pub fn consumed(&self) -> usize {
        *self.next.lock().unwrap()
    }
}

pub fn parse_playbook(text: &str) -> Result<Vec<String>, LlmError> {
    serde_json::from_str(text).map_err(|e| LlmError::Config(format!("playbook must be a JSON array of strings: {e}")))
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, _prompt: &str) -> Result<(String, UsageRecord), LlmError> {
        let mut next = self.next.lock().unwrap();
        let r = self.responses.get(*next).cloned().ok_or(LlmError::PlaybookExhausted(self.responses.len()))?;
        *next += 1;
        Ok((r, UsageRecord::default()))
    }

    fn resume_after(&self, consumed: usize) {
        *self.next.lock().unwrap() = consumed;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn queue_then_exhausted() {
        let b = ScriptedBackend::new(vec!["A".into(), "B".into()]);
        assert_eq!(b.complete("p").unwrap().0, "A");
        assert_eq!(b.complete("p").unwrap().0, "B");
        assert_eq!(b.complete("p"), Err(LlmError::PlaybookExhausted(2)));
    }

    #[test]
    fn playbook_json() {
        assert_eq!(parse_playbook("[\"x\", \"y\"]").unwrap(), vec!["x", "y"]);
        assert!(parse_playbook("{\"x\": 1}").is_err());
    }
}
