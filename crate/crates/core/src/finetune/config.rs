use serde::{Deserialize, Serialize};

/// Training-set sizes benchmarked by default.
pub const QA_SIZES: [usize; 5] = [3, 5, 8, 10, 25];

/// Base models compared by default.
pub const BASE_MODELS: [&str; 2] = ["meta-llama/Llama-3.2-1B", "meta-llama/Llama-3.2-3B"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("LoRA rank must be at least 1")]
    ZeroRank,
    #[error("LoRA alpha must be finite and positive, got {0}")]
    BadAlpha(f64),
    #[error("dropout must be in [0, 1), got {0}")]
    BadDropout(f64),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskType {
    #[default]
    CausalLm,
}

/// Low-rank adapter settings. Serialises as `{"r":16,"alpha":32.0,"dropout":0.1,"task":"causal_lm"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoraConfig {
    #[serde(rename = "r")]
    pub rank: usize,
    pub alpha: f64,
    pub dropout: f64,
    pub task: TaskType,
}

impl Default for LoraConfig {
    fn default() -> Self {
        LoraConfig { rank: 16, alpha: 32.0, dropout: 0.1, task: TaskType::CausalLm }
    }
}

impl LoraConfig {
    pub fn new(rank: usize, alpha: f64, dropout: f64) -> Result<Self, ConfigError> {
        let cfg = LoraConfig { rank, alpha, dropout, task: TaskType::CausalLm };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.rank == 0 {
            return Err(ConfigError::ZeroRank);
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(ConfigError::BadAlpha(self.alpha));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(ConfigError::BadDropout(self.dropout));
        }
        Ok(())
    }

    /// The factor `alpha / r` applied to `B·A`.
    pub fn scaling(&self) -> f64 {
        self.alpha / self.rank as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainHyperParams {
    pub learning_rate: f64,
    pub train_batch: usize,
    pub eval_batch: usize,
    pub grad_accum_steps: usize,
    pub epochs: usize,
    pub weight_decay: f64,
    pub early_stop_patience: usize,
    pub max_token_len: usize,
    /// Ask the trainer for fp16 when it has a GPU.
    pub mixed_precision: bool,
}

impl Default for TrainHyperParams {
    fn default() -> Self {
        TrainHyperParams {
            learning_rate: 3e-5,
            train_batch: 1,
            eval_batch: 1,
            grad_accum_steps: 8,
            epochs: 5,
            weight_decay: 0.1,
            early_stop_patience: 3,
            max_token_len: 512,
            mixed_precision: true,
        }
    }
}

impl TrainHyperParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let counts = [
            ("train_batch", self.train_batch),
            ("eval_batch", self.eval_batch),
            ("grad_accum_steps", self.grad_accum_steps),
            ("epochs", self.epochs),
            ("early_stop_patience", self.early_stop_patience),
            ("max_token_len", self.max_token_len),
        ];
        for (name, value) in counts {
            if value == 0 {
                return Err(ConfigError::NonPositive(name));
            }
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(ConfigError::NonPositive("learning_rate"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model_name: String,
    pub qa_size: usize,
    pub seed: u64,
    pub lora: LoraConfig,
    pub hyper: TrainHyperParams,
}

impl ExperimentSpec {
    pub fn new(model_name: impl Into<String>, qa_size: usize, seed: u64) -> Self {
        ExperimentSpec {
            model_name: model_name.into(),
            qa_size,
            seed,
            lora: LoraConfig::default(),
            hyper: TrainHyperParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.qa_size == 0 {
            return Err(ConfigError::NonPositive("qa_size"));
        }
        self.lora.validate()?;
        self.hyper.validate()
    }
}
