//! Reference-library ingestion: BibTeX and MEDLINE parsing into
//! [`PaperRecord`]s, deduplication into a DOI/PMID indexed [`RecordStore`],
//! and YAML/JSONL persistence.

mod backend;
mod bibtex;
mod doi;
mod export;
mod nbib;
mod record;
mod store;

pub use backend::{BulkReport, FileRecordStore, RecordBackend};
pub use bibtex::{parse_bibtex, BibtexError};
pub use doi::{normalize_doi, NotADoi};
pub use export::{export_store, import_store, render_store, StoreFormat, StoreIoError};
pub use nbib::{parse_nbib, NbibError};
pub use record::{normalize_title, PaperRecord, RecordError, SourceFormat};
pub use store::{dedup, merge_records, DuplicateKey, LookupKey, RecordStore};

use std::path::Path;

use crate::{Execution, Warning};

/// Parsed input file, tagged with the format it was read as.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Bibtex,
    Nbib,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Bibtex { path: String, source: BibtexError },
    #[error("{path}: {source}")]
    Nbib { path: String, source: NbibError },
}

/// Reads and parses every input file, then deduplicates the combined records.
///
/// Files are parsed according to `exec`; records are concatenated in the
/// order the inputs were given so merge precedence follows argument order.
pub fn ingest_files<P: AsRef<Path> + Sync>(
    inputs: &[(P, InputFormat)],
    exec: Execution,
) -> Result<(RecordStore, Vec<Warning>), IngestError> {
    let parsed = exec.map(inputs, |(path, format)| {
        let path = path.as_ref();
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io { path: shown.clone(), source })?;
        match format {
            InputFormat::Bibtex => parse_bibtex(&text).map_err(|source| IngestError::Bibtex { path: shown, source }),
            InputFormat::Nbib => parse_nbib(&text).map_err(|source| IngestError::Nbib { path: shown, source }),
        }
    });
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for result in parsed {
        let (recs, warns) = result?;
        records.extend(recs);
        warnings.extend(warns);
    }
    let (store, dedup_warnings) = dedup(records);
    warnings.extend(dedup_warnings);
    Ok((store, warnings))
}
