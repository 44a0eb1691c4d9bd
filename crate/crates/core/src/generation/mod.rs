//! Model-driven QA generation: a backend abstraction (mock and HTTP), JSON
//! extraction from free-form model output, cleaning, and the batch pipeline
//! that writes validated pairs to a QA file.

mod backend;
mod clean;
mod extract;
mod http;
mod mock;
mod pipeline;

pub use backend::{BackendError, GenParams, ModelBackend};
pub use clean::{clean_qa, CleanError, CleanLimits, QaField};
pub use extract::{extract_qa_json, ExtractError, ExtractedQa};
pub use http::{lookup_path, HttpBackend, DEFAULT_RESPONSE_PATH, TOKEN_ENV};
pub use mock::{MockBackend, MockStep};
pub use pipeline::{
    generate_for_record, run_generation, FailureKind, GenerateError, GenerationError, GenerationReport, RawGeneration,
    RecordFailure, RunOptions,
};
