use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::backend::{BackendError, GenParams, ModelBackend};
use super::clean::{clean_qa, CleanError, CleanLimits};
use super::extract::extract_qa_json;
use crate::clock::Clock;
use crate::prompt::{render, PromptTemplate, RenderContext, TemplateError};
use crate::qa::{append_batch, validate_qa, Category, Origin, QAPair, QaError, RawQa};
use crate::reference::PaperRecord;
use crate::Execution;

/// A model response kept verbatim for audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawGeneration {
    pub record_id: String,
    pub prompt: String,
    pub output_text: String,
    pub backend_name: String,
    pub created_at: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error("record has no abstract")]
    SkippedNoAbstract,
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

/// Batch-level failures; per-record problems never surface here.
#[derive(Debug, thiserror::Error)]
pub enum GenerationError {
    #[error("template {name:?} needs variables other than title and abstract: {vars:?}")]
    UnsupportedTemplate { name: String, vars: Vec<String> },
    #[error("invalid generation parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Renders the prompt from `title` and `abstract` and asks the backend.
pub fn generate_for_record(
    record: &PaperRecord,
    template: &PromptTemplate,
    backend: &dyn ModelBackend,
    params: &GenParams,
    clock: &dyn Clock,
) -> Result<RawGeneration, GenerateError> {
    if record.abstract_or_empty().trim().is_empty() {
        return Err(GenerateError::SkippedNoAbstract);
    }
    let ctx = RenderContext::from([
        ("title".to_string(), record.title.clone()),
        ("abstract".to_string(), record.abstract_or_empty().to_string()),
    ]);
    let prompt = render(template, &ctx)?;
    let output_text = backend.complete(&prompt, params)?;
    Ok(RawGeneration {
        record_id: record.record_id.clone(),
        prompt,
        output_text,
        backend_name: backend.name().to_string(),
        created_at: clock.timestamp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    SkippedNoAbstract,
    ExtractionFailed,
    CleaningFailed,
    BackendFailed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordFailure {
    pub record_id: String,
    pub kind: FailureKind,
    pub message: String,
}

/// Per-run tallies. `attempted` always equals the sum of the other counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub attempted: usize,
    pub succeeded: usize,
    pub skipped_no_abstract: usize,
    pub extraction_failed: usize,
    pub cleaning_failed: usize,
    pub backend_failed: usize,
    pub failures: Vec<RecordFailure>,
    #[serde(skip)]
    pub generations: Vec<RawGeneration>,
}

impl GenerationReport {
    pub fn is_balanced(&self) -> bool {
        self.attempted
            == self.succeeded
                + self.skipped_no_abstract
                + self.extraction_failed
                + self.cleaning_failed
                + self.backend_failed
    }
}

pub struct RunOptions<'a> {
    pub clock: &'a dyn Clock,
    pub exec: Execution,
    pub category: Category,
    pub limits: CleanLimits,
}

impl<'a> RunOptions<'a> {
    pub fn new(clock: &'a dyn Clock) -> Self {
        RunOptions { clock, exec: Execution::default(), category: Category::Knowledge, limits: CleanLimits::default() }
    }
}

enum Outcome {
    Pair(QAPair, RawGeneration),
    Failed(FailureKind, String, Option<RawGeneration>),
}

fn process(
    record: &PaperRecord,
    template: &PromptTemplate,
    backend: &dyn ModelBackend,
    params: &GenParams,
    opts: &RunOptions<'_>,
) -> Outcome {
    let raw = match generate_for_record(record, template, backend, params, opts.clock) {
        Ok(raw) => raw,
        Err(GenerateError::SkippedNoAbstract) => {
            return Outcome::Failed(FailureKind::SkippedNoAbstract, "record has no abstract".into(), None)
        }
        Err(e) => return Outcome::Failed(FailureKind::BackendFailed, e.to_string(), None),
    };
    let extracted = match extract_qa_json(&raw.output_text) {
        Ok(qa) => qa,
        Err(e) => return Outcome::Failed(FailureKind::ExtractionFailed, e.to_string(), Some(raw)),
    };
    let cleaned: Result<QAPair, String> = clean_qa(&extracted.question, &extracted.answer, opts.limits)
        .map_err(|e: CleanError| e.to_string())
        .and_then(|(question, answer)| {
            let candidate = RawQa {
                question: Some(question),
                answer: Some(answer),
                pmid: record.pmid.clone(),
                doi: record.doi.clone(),
                category: Some(opts.category.as_str().to_string()),
                submitted_at: Some(opts.clock.timestamp()),
                origin: Some(Origin::Model),
            };
            validate_qa(&candidate, opts.clock).map_err(|e: QaError| e.to_string())
        });
    match cleaned {
        Ok(pair) => Outcome::Pair(pair, raw),
        Err(msg) => Outcome::Failed(FailureKind::CleaningFailed, msg, Some(raw)),
    }
}

/// Generates one pair per record and appends the valid ones to `qa_out`.
///
/// Records are processed under `opts.exec`; results are tallied and written
/// in input order, as a single all-or-nothing append, so output is
/// identical in every execution mode. Per-record failures are counted and
/// never abort the run.
pub fn run_generation(
    records: &[PaperRecord],
    template: &PromptTemplate,
    backend: &dyn ModelBackend,
    params: &GenParams,
    qa_out: &Path,
    opts: &RunOptions<'_>,
) -> Result<GenerationReport, GenerationError> {
    let extra: Vec<String> =
        template.required_vars().iter().filter(|v| *v != "title" && *v != "abstract").cloned().collect();
    if !extra.is_empty() {
        return Err(GenerationError::UnsupportedTemplate { name: template.name().to_string(), vars: extra });
    }
    params.validate().map_err(GenerationError::BadParams)?;

    let outcomes = opts.exec.map(records, |r| process(r, template, backend, params, opts));
    let mut report = GenerationReport { attempted: records.len(), ..Default::default() };
    let mut pairs = Vec::new();
    for (record, outcome) in records.iter().zip(outcomes) {
        match outcome {
            Outcome::Pair(pair, raw) => {
                report.succeeded += 1;
                pairs.push(pair);
                report.generations.push(raw);
            }
            Outcome::Failed(kind, message, raw) => {
                *match kind {
                    FailureKind::SkippedNoAbstract => &mut report.skipped_no_abstract,
                    FailureKind::ExtractionFailed => &mut report.extraction_failed,
                    FailureKind::CleaningFailed => &mut report.cleaning_failed,
                    FailureKind::BackendFailed => &mut report.backend_failed,
                } += 1;
                report.failures.push(RecordFailure { record_id: record.record_id.clone(), kind, message });
                report.generations.extend(raw);
            }
        }
    }
    append_batch(qa_out, &pairs)?;
    Ok(report)
}
