use std::path::{Path, PathBuf};

use serde::Serialize;

use super::export::{export_store, import_store, StoreFormat, StoreIoError};
use super::record::PaperRecord;
use super::store::{dedup, RecordStore};
use crate::Warning;

/// Outcome of a bulk insert: how many incoming records became new entries
/// and how many were folded into an existing (or another incoming) record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct BulkReport {
    pub inserted: usize,
    pub merged: usize,
}

/// Storage interface for paper records. The file-backed implementation is
/// the default; a database-backed one can slot in behind the same calls.
pub trait RecordBackend {
    type Error;

    fn get_by_doi(&self, doi: &str) -> Option<PaperRecord>;
    fn get_by_pmid(&self, pmid: &str) -> Option<PaperRecord>;
    fn put(&mut self, record: PaperRecord) -> Result<BulkReport, Self::Error> {
        self.bulk_put(vec![record]).map(|(report, _)| report)
    }
    fn bulk_put(&mut self, records: Vec<PaperRecord>) -> Result<(BulkReport, Vec<Warning>), Self::Error>;
}

/// A [`RecordStore`] persisted to a YAML or JSONL file. Every write rewrites
/// the file atomically.
#[derive(Debug)]
pub struct FileRecordStore {
    path: PathBuf,
    format: StoreFormat,
    store: RecordStore,
}

impl FileRecordStore {
    /// Opens `path`, starting empty when the file does not exist yet.
    pub fn open(path: impl Into<PathBuf>, format: StoreFormat) -> Result<Self, StoreIoError> {
        let path = path.into();
        let store = if path.exists() { import_store(&path, format)? } else { RecordStore::default() };
        Ok(FileRecordStore { path, format, store })
    }

    pub fn store(&self) -> &RecordStore {
        &self.store
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl RecordBackend for FileRecordStore {
    type Error = StoreIoError;

    fn get_by_doi(&self, doi: &str) -> Option<PaperRecord> {
        self.store.get_by_doi(doi).cloned()
    }

    fn get_by_pmid(&self, pmid: &str) -> Option<PaperRecord> {
        self.store.get_by_pmid(pmid).cloned()
    }

    fn bulk_put(&mut self, records: Vec<PaperRecord>) -> Result<(BulkReport, Vec<Warning>), StoreIoError> {
        let before = self.store.len();
        let mut all = self.store.records().to_vec();
        let incoming = records.len();
        all.extend(records);
        let (next, warnings) = dedup(all);
        let dropped = (before + incoming).saturating_sub(next.len() + merge_count(&warnings));
        let inserted = next.len().saturating_sub(before);
        let report = BulkReport { inserted, merged: incoming.saturating_sub(inserted + dropped) };
        export_store(&next, self.format, &self.path)?;
        self.store = next;
        Ok((report, warnings))
    }
}

fn merge_count(warnings: &[Warning]) -> usize {
    warnings.iter().filter(|w| w.kind == crate::WarningKind::Merged).count()
}
