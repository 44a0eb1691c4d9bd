use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentSpec, TrainHyperParams};
use super::manifest::TrainingExample;

#[derive(Debug, thiserror::Error)]
pub enum BundleError {
    #[error("training manifest is empty")]
    EmptyManifest,
    #[error("invalid experiment spec: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Contents of `hyper.json`: the training hyperparameters plus the run
/// identity (model, sample size, seed) so a bundle is self-describing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleHyper {
    pub model_name: String,
    pub qa_size: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub hyper: TrainHyperParams,
}

fn jsonl(examples: &[TrainingExample]) -> Vec<u8> {
    let mut out = Vec::new();
    for e in examples {
        out.extend(serde_json::to_vec(e).expect("example serialises"));
        out.push(b'\n');
    }
    out
}

/// Writes `train.jsonl`, `eval.jsonl`, `lora.json` and `hyper.json` into
/// `out_dir`.
///
/// Files are staged in a temporary sibling directory that is renamed into
/// place at the end, so a failure leaves no partial bundle. `out_dir` must
/// not exist or be an empty directory.
pub fn emit_experiment_bundle(
    spec: &ExperimentSpec,
    train: &[TrainingExample],
    eval: &[TrainingExample],
    out_dir: &Path,
) -> Result<(), BundleError> {
    if train.is_empty() {
        return Err(BundleError::EmptyManifest);
    }
    spec.validate().map_err(|e| BundleError::Config(e.to_string()))?;
    let parent = match out_dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let staging = tempfile::Builder::new().prefix(".bundle-").tempdir_in(parent)?;
    fs::write(staging.path().join("train.jsonl"), jsonl(train))?;
    fs::write(staging.path().join("eval.jsonl"), jsonl(eval))?;
    fs::write(staging.path().join("lora.json"), serde_json::to_vec_pretty(&spec.lora).expect("lora serialises"))?;
    let hyper =
        BundleHyper { model_name: spec.model_name.clone(), qa_size: spec.qa_size, seed: spec.seed, hyper: spec.hyper };
    fs::write(staging.path().join("hyper.json"), serde_json::to_vec_pretty(&hyper).expect("hyper serialises"))?;
    if out_dir.is_dir() {
        // only an empty directory may be replaced
        fs::remove_dir(out_dir)?;
    }
    let staged = staging.keep();
    fs::rename(&staged, out_dir).inspect_err(|_| {
        let _ = fs::remove_dir_all(&staged);
    })?;
    Ok(())
}
