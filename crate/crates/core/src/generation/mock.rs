use std::collections::VecDeque;
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use super::backend::{BackendError, GenParams, ModelBackend};

/// One scripted behaviour of [`MockBackend`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MockStep {
    /// The default well-formed JSON answer.
    Valid,
    /// Plain prose with no JSON at all.
    Prose,
    /// A JSON object lacking `"answer"`.
    MissingAnswer,
    /// A JSON object whose `"answer"` is a number.
    NonString,
    /// The default answer wrapped in a ```json fence after some prose.
    Fenced,
    /// Fails as if the connection dropped.
    TransportError,
    /// Returns this text verbatim.
    Custom(String),
}

/// Deterministic offline backend.
///
/// By default every prompt yields
/// `{"question":"Q about <first 5 words of the abstract>","answer":"A from <hash>"}`
/// where the abstract is the prompt text after `Abstract:` and the hash is
/// the first 8 hex digits of SHA-256 over the prompt.
///
/// Faults are injected either by rule (a prompt containing a substring gets
/// a step; deterministic under parallel execution) or by a sequential
/// script consumed one step per call before rules apply.
#[derive(Debug, Default)]
pub struct MockBackend {
    rules: Vec<(String, MockStep)>,
    script: Mutex<VecDeque<MockStep>>,
}

impl MockBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_rule(mut self, prompt_contains: impl Into<String>, step: MockStep) -> Self {
        self.rules.push((prompt_contains.into(), step));
        self
    }

    pub fn with_script(self, steps: impl IntoIterator<Item = MockStep>) -> Self {
        self.script.lock().expect("script lock").extend(steps);
        self
    }

    fn step_for(&self, prompt: &str) -> MockStep {
        if let Some(step) = self.script.lock().expect("script lock").pop_front() {
            return step;
        }
        self.rules
            .iter()
            .find(|(needle, _)| prompt.contains(needle.as_str()))
            .map(|(_, step)| step.clone())
            .unwrap_or(MockStep::Valid)
    }
}

fn default_pair(prompt: &str) -> (String, String) {
    let body = prompt.rsplit_once("Abstract:").map_or(prompt, |(_, rest)| rest);
    let words: Vec<&str> = body.split_whitespace().take(5).collect();
    let digest = Sha256::digest(prompt.as_bytes());
    let hash: String = digest.iter().take(4).map(|b| format!("{b:02x}")).collect();
    (format!("Q about {}", words.join(" ")), format!("A from {hash}"))
}

fn json_pair(question: &str, answer: &str) -> String {
    serde_json::json!({ "question": question, "answer": answer }).to_string()
}

impl ModelBackend for MockBackend {
    fn complete(&self, prompt: &str, _params: &GenParams) -> Result<String, BackendError> {
        let (q, a) = default_pair(prompt);
        Ok(match self.step_for(prompt) {
            MockStep::Valid => json_pair(&q, &a),
            MockStep::Prose => format!("Sure! A good question would be {q}, and the answer is {a}."),
            MockStep::MissingAnswer => serde_json::json!({ "question": q }).to_string(),
            MockStep::NonString => serde_json::json!({ "question": q, "answer": 42 }).to_string(),
            MockStep::Fenced => format!("Here is the pair:\n```json\n{}\n```\n", json_pair(&q, &a)),
            MockStep::TransportError => return Err(BackendError::Transport("mock connection reset".into())),
            MockStep::Custom(text) => text,
        })
    }

    fn name(&self) -> &str {
        "mock"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generation::extract_qa_json;

    #[test]
    fn deterministic_default() {
        let m = MockBackend::new();
        let p = "Title: T\n\nAbstract: one two three four five six\n";
        let a = m.complete(p, &GenParams::default()).unwrap();
        assert_eq!(a, m.complete(p, &GenParams::default()).unwrap());
        let qa = extract_qa_json(&a).unwrap();
        assert_eq!(qa.question, "Q about one two three four five");
        assert!(qa.answer.starts_with("A from ") && qa.answer.len() == "A from ".len() + 8);
    }

    #[test]
    fn script_then_rules() {
        let m = MockBackend::new().with_rule("bad", MockStep::MissingAnswer).with_script([MockStep::Prose]);
        let params = GenParams::default();
        assert!(extract_qa_json(&m.complete("fine", &params).unwrap()).is_err());
        assert!(extract_qa_json(&m.complete("fine", &params).unwrap()).is_ok());
        let missing = m.complete("a bad prompt", &params).unwrap();
        assert!(!missing.contains("answer"));
        assert!(m.complete("x", &params).is_ok());
        let m = MockBackend::new().with_script([MockStep::TransportError, MockStep::Custom("raw".into())]);
        assert!(m.complete("x", &params).is_err());
        assert_eq!(m.complete("x", &params).unwrap(), "raw");
    }
}
