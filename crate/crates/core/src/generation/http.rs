use std::thread;
use std::time::Duration;

use serde_json::Value;

use super::backend::{BackendError, GenParams, ModelBackend};

/// Environment variable holding the bearer token.
pub const TOKEN_ENV: &str = "QAFORGE_BACKEND_TOKEN";
pub const DEFAULT_RESPONSE_PATH: &str = "choices[0].text";

/// Completion-style HTTP backend.
///
/// Posts `{"model","prompt","max_tokens","temperature","stop"?}` and reads
/// the generated text at a dotted path such as `choices[0].text`. Transport
/// errors and 5xx responses are retried with doubling backoff; 4xx is final.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    url: String,
    model: String,
    token: Option<String>,
    response_path: String,
    attempts: u32,
    backoff: Duration,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(url: impl Into<String>, model: impl Into<String>) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(HttpBackend {
            url: url.into(),
            model: model.into(),
            token: None,
            response_path: DEFAULT_RESPONSE_PATH.into(),
            attempts: 3,
            backoff: Duration::from_millis(500),
            client,
        })
    }

    pub fn with_token(mut self, token: Option<String>) -> Self {
        self.token = token.filter(|t| !t.is_empty());
        self
    }

    /// Reads the token from [`TOKEN_ENV`], if set.
    pub fn with_env_token(self) -> Self {
        let token = std::env::var(TOKEN_ENV).ok();
        self.with_token(token)
    }

    pub fn with_response_path(mut self, path: impl Into<String>) -> Self {
        self.response_path = path.into();
        self
    }

    /// Delay before the first retry; doubled for each further retry.
    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    pub fn with_attempts(mut self, attempts: u32) -> Self {
        self.attempts = attempts.max(1);
        self
    }

    fn attempt(&self, body: &Value) -> Result<String, BackendError> {
        let mut req = self.client.post(&self.url).json(body);
        if let Some(token) = &self.token {
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp.text().map_err(|e| BackendError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(BackendError::Status { status, body: text.chars().take(200).collect() });
        }
        let json: Value = serde_json::from_str(&text).map_err(|e| BackendError::BadResponse(e.to_string()))?;
        match lookup_path(&json, &self.response_path) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(BackendError::BadResponse(format!("{} is not a string", self.response_path))),
            None => Err(BackendError::BadResponse(format!("no value at {}", self.response_path))),
        }
    }
}

impl ModelBackend for HttpBackend {
    fn complete(&self, prompt: &str, params: &GenParams) -> Result<String, BackendError> {
        let mut body = serde_json::json!({
            "model": self.model,
            "prompt": prompt,
            "max_tokens": params.max_tokens,
            "temperature": params.temperature,
        });
        if let Some(stop) = &params.stop {
            body["stop"] = serde_json::json!(stop);
        }
        let mut delay = self.backoff;
        let mut last = None;
        for attempt in 0..self.attempts {
            if attempt > 0 {
                thread::sleep(delay);
                delay *= 2;
            }
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(e) if e.is_retryable() => {
                    log::warn!("backend attempt {} failed: {e}", attempt + 1);
                    last = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    fn name(&self) -> &str {
        &self.model
    }
}

/// Follows a path like `choices[0].text` or `data.output` into `value`.
pub fn lookup_path<'v>(value: &'v Value, path: &str) -> Option<&'v Value> {
    let mut cur = value;
    for part in path.split('.').filter(|p| !p.is_empty()) {
        let (key, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if !key.is_empty() {
            cur = cur.get(key)?;
        }
        while let Some(stripped) = rest.strip_prefix('[') {
            let close = stripped.find(']')?;
            cur = cur.get(stripped[..close].parse::<usize>().ok()?)?;
            rest = &stripped[close + 1..];
        }
        if !rest.is_empty() {
            return None;
        }
    }
    Some(cur)
}
