use serde::{Deserialize, Serialize};

/// Decoding parameters forwarded to the backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub max_tokens: u32,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<Vec<String>>,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { max_tokens: 512, temperature: 0.0, stop: None }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_tokens == 0 {
            return Err("max_tokens must be at least 1".into());
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(format!("temperature must be a finite number >= 0, got {}", self.temperature));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("backend returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("unexpected backend response: {0}")]
    BadResponse(String),
}

impl BackendError {
    /// Transport failures and 5xx responses are worth retrying; 4xx and
    /// malformed responses are not.
    pub fn is_retryable(&self) -> bool {
        match self {
            BackendError::Transport(_) => true,
            BackendError::Status { status, .. } => *status >= 500,
            BackendError::BadResponse(_) => false,
        }
    }
}

/// A text-completion model. Implementations must tolerate concurrent calls.
pub trait ModelBackend: Send + Sync {
    fn complete(&self, prompt: &str, params: &GenParams) -> Result<String, BackendError>;
    fn name(&self) -> &str;
}

impl<B: ModelBackend + ?Sized> ModelBackend for Box<B> {
    fn complete(&self, prompt: &str, params: &GenParams) -> Result<String, BackendError> {
        (**self).complete(prompt, params)
    }

    fn name(&self) -> &str {
        (**self).name()
    }
}
