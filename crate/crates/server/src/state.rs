use std::sync::{Arc, Mutex, RwLock};

use qaforge_core::clock::{Clock, SystemClock};
use qaforge_core::qa::{load_store, QAPair, QaWriter, StatsCounter};
use qaforge_core::reference::{FileRecordStore, StoreFormat};

use crate::config::{ServerError, ServiceConfig};

pub(crate) struct QaState {
    pub writer: QaWriter,
    pub pairs: Vec<QAPair>,
    pub counter: StatsCounter,
}

/// Shared service state. The QA mutex serialises every append together
/// with the in-memory mirror and counter updates.
pub struct AppState {
    pub(crate) qa: Mutex<QaState>,
    pub(crate) records: Option<RwLock<FileRecordStore>>,
    pub(crate) clock: Arc<dyn Clock>,
}

impl AppState {
    pub fn load(cfg: &ServiceConfig) -> Result<Arc<Self>, ServerError> {
        Self::load_with_clock(cfg, Arc::new(SystemClock))
    }

    /// Reads the existing QA file (skipping invalid lines with a logged
    /// warning) and opens it for appending.
    pub fn load_with_clock(cfg: &ServiceConfig, clock: Arc<dyn Clock>) -> Result<Arc<Self>, ServerError> {
        cfg.validate()?;
        let (pairs, warnings) = load_store(&cfg.qa_file).map_err(ServerError::Io)?;
        for w in &warnings {
            log::warn!("{}: {w}", cfg.qa_file.display());
        }
        let mut counter = StatsCounter::default();
        for p in &pairs {
            counter.record(p);
        }
        let writer = QaWriter::open(&cfg.qa_file, cfg.fsync).map_err(ServerError::Io)?;
        let records = match &cfg.records_file {
            Some(path) => {
                let format = StoreFormat::from_path(path).ok_or_else(|| {
                    ServerError::Config(format!("{}: records file must end in .yaml, .yml or .jsonl", path.display()))
                })?;
                Some(RwLock::new(FileRecordStore::open(path, format)?))
            }
            None => None,
        };
        log::info!("loaded {} QA pairs from {}", pairs.len(), cfg.qa_file.display());
        Ok(Arc::new(AppState { qa: Mutex::new(QaState { writer, pairs, counter }), records, clock }))
    }
}
