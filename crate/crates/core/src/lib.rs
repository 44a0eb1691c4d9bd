//! Building blocks for turning a reference library into a curated
//! question-answer dataset.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`reference`]: BibTeX / MEDLINE (`.nbib`) parsing, DOI normalisation,
//!   deduplication and the DOI/PMID indexed [`reference::RecordStore`].
//! - [`qa`]: validation and append-only JSONL persistence of curated QA pairs.
//! - [`prompt`]: a placeholder-only template engine and the shipped
//!   QA-generation prompt.
//! - [`finetune`]: training-set sampling, token-budgeted manifests, LoRA
//!   configuration and update algebra, early stopping, result logs and
//!   experiment bundles for an external trainer.
//! - [`generation`]: model backends, JSON extraction and cleaning of model
//!   output, and the batch generation pipeline.
//! - [`evaluation`]: the five-criterion scoring rubric, review aggregation,
//!   box statistics and benchmark tables.
//!
//! Batch operations take an [`Execution`] mode. With the `parallel` feature
//! (on by default) [`Execution::Parallel`] fans work out over rayon; without
//! it every mode runs sequentially.

pub mod clock;
pub mod evaluation;
mod exec;
pub mod finetune;
pub mod generation;
pub mod io;
pub mod prompt;
pub mod qa;
pub mod reference;
mod warning;

pub use exec::Execution;
pub use warning::{Warning, WarningKind};
