use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentSpec;
use super::early_stop::early_stop_epoch;
use crate::{Warning, WarningKind};

/// Outcome of one (model, qa_size, seed) run. Losses are opaque comparable
/// numbers; `metrics` carries any other trainer output verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub eval_losses: Vec<f64>,
    pub best_loss: f64,
    pub stopped_epoch: Option<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, thiserror::Error)]
pub enum ResultError {
    #[error("invalid result: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ExperimentResult {
    /// Builds a result, deriving `best_loss` and `stopped_epoch` from the
    /// losses and the experiment's patience.
    pub fn from_losses(spec: ExperimentSpec, eval_losses: Vec<f64>) -> Self {
        let best_loss = eval_losses.iter().copied().fold(f64::INFINITY, f64::min);
        let stopped_epoch = early_stop_epoch(&eval_losses, spec.hyper.early_stop_patience);
        ExperimentResult { spec, eval_losses, best_loss, stopped_epoch, metrics: BTreeMap::new() }
    }

    pub fn validate(&self) -> Result<(), ResultError> {
        let invalid = |m: String| Err(ResultError::Invalid(m));
        if self.eval_losses.is_empty() {
            return invalid("no eval losses".into());
        }
        if self.eval_losses.iter().any(|l| !l.is_finite()) {
            return invalid("eval losses must be finite".into());
        }
        let min = self.eval_losses.iter().copied().fold(f64::INFINITY, f64::min);
        if self.best_loss != min {
            return invalid(format!("best_loss {} differs from min(eval_losses) {min}", self.best_loss));
        }
        if let Some(epoch) = self.stopped_epoch {
            let expected = early_stop_epoch(&self.eval_losses, self.spec.hyper.early_stop_patience);
            if expected != Some(epoch) {
                return invalid(format!("stopped_epoch {epoch} inconsistent with losses (expected {expected:?})"));
            }
        }
        self.spec.validate().map_err(|e| ResultError::Invalid(e.to_string()))
    }
}

/// Validates and appends one result as a JSONL line.
pub fn record_result(path: &Path, result: &ExperimentResult) -> Result<(), ResultError> {
    result.validate()?;
    let mut line = serde_json::to_vec(result).expect("result serialises");
    line.push(b'\n');
    OpenOptions::new().create(true).append(true).open(path)?.write_all(&line)?;
    Ok(())
}

/// Reads a results log, skipping (with a warning) lines that fail to parse
/// or validate. A missing file is an empty log.
pub fn load_results(path: &Path) -> io::Result<(Vec<ExperimentResult>, Vec<Warning>)> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok((Vec::new(), Vec::new())),
        Err(e) => return Err(e),
    };
    let mut results = Vec::new();
    let mut warnings = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<ExperimentResult>(&line)
            .map_err(|e| e.to_string())
            .and_then(|r| r.validate().map(|_| r).map_err(|e| e.to_string()));
        match parsed {
            Ok(r) => results.push(r),
            Err(msg) => warnings.push(Warning::at_line(WarningKind::SkippedLine, idx + 1, msg)),
        }
    }
    Ok((results, warnings))
}
