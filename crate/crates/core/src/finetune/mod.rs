//! Everything needed to hand a fine-tuning run to an external trainer:
//! sampled QA subsets, token-budgeted manifests, LoRA and training
//! hyperparameters, and the bookkeeping that comes back (eval losses, early
//! stopping, result logs).
//!
//! No gradients are computed here. [`lora`] implements the low-rank update
//! algebra so adapter shapes and scaling can be checked at small sizes, and
//! [`trainer::SyntheticTrainer`] produces placeholder loss curves for
//! exercising the logging path.

mod bundle;
mod config;
mod early_stop;
pub mod lora;
mod manifest;
mod results;
mod sampling;
mod tokens;
pub mod trainer;

pub use bundle::{emit_experiment_bundle, BundleError, BundleHyper};
pub use config::{ConfigError, ExperimentSpec, LoraConfig, TaskType, TrainHyperParams, BASE_MODELS, QA_SIZES};
pub use early_stop::{early_stop_epoch, EarlyStopping};
pub use manifest::{build_manifest, build_manifest_with, TrainingExample, TRUNCATION_MARKER};
pub use results::{load_results, record_result, ExperimentResult, ResultError};
pub use sampling::{sample_training_set, split_training_set, SampleError, SampleRng};
pub use tokens::{count_tokens, TokenCounter, WhitespaceCounter};
