use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use qaforge_core::qa::{validate_qa, Category, QAPair, RawQa};
use qaforge_core::reference::{LookupKey, PaperRecord, RecordBackend, SourceFormat};

use crate::state::AppState;

const DEFAULT_LIMIT: usize = 100;
const MAX_LIMIT: usize = 10_000;

/// JSON error payload: a machine-readable `error` code plus a message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

fn error(status: StatusCode, code: &str, message: impl Into<String>) -> Response {
    (status, Json(ErrorBody { error: code.to_string(), message: message.into() })).into_response()
}

fn io_error(e: impl std::fmt::Display) -> Response {
    log::error!("{e}");
    error(StatusCode::INTERNAL_SERVER_ERROR, "IoError", e.to_string())
}

pub fn router(state: Arc<AppState>, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/qa", post(submit_qa).get(list_qa))
        .route("/api/stats", get(get_stats))
        .route("/api/papers/doi/{*doi}", get(paper_by_doi))
        .route("/api/papers/pmid/{pmid}", get(paper_by_pmid))
        .route("/api/papers/bulk", post(bulk_papers))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(|| async { error(StatusCode::NOT_FOUND, "NotFound", "no such route") }),
    }
}

async fn submit_qa(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let raw: RawQa = match serde_json::from_slice(&body) {
        Ok(raw) => raw,
        Err(e) => return error(StatusCode::BAD_REQUEST, "MalformedBody", e.to_string()),
    };
    let pair = match validate_qa(&raw, state.clock.as_ref()) {
        Ok(pair) => pair,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.code(), e.to_string()),
    };
    let mut qa = state.qa.lock().expect("qa lock poisoned");
    if let Err(e) = qa.writer.append(&pair) {
        return io_error(e);
    }
    qa.counter.record(&pair);
    qa.pairs.push(pair.clone());
    (StatusCode::CREATED, Json(pair)).into_response()
}

async fn get_stats(State(state): State<Arc<AppState>>) -> Response {
    let snapshot = state.qa.lock().expect("qa lock poisoned").counter.snapshot();
    Json(snapshot).into_response()
}

#[derive(Serialize)]
struct QaPage {
    total: usize,
    offset: usize,
    limit: usize,
    items: Vec<QAPair>,
}

fn parse_count(query: &HashMap<String, String>, key: &str, default: usize) -> Result<usize, String> {
    match query.get(key) {
        None => Ok(default),
        Some(v) => v.trim().parse().map_err(|_| format!("{key} must be a non-negative integer, got {v:?}")),
    }
}

async fn list_qa(State(state): State<Arc<AppState>>, Query(query): Query<HashMap<String, String>>) -> Response {
    let offset = match parse_count(&query, "offset", 0) {
        Ok(v) => v,
        Err(msg) => return error(StatusCode::BAD_REQUEST, "BadPagination", msg),
    };
    let limit = match parse_count(&query, "limit", DEFAULT_LIMIT) {
        Ok(v) if (1..=MAX_LIMIT).contains(&v) => v,
        Ok(v) => {
            return error(StatusCode::BAD_REQUEST, "BadPagination", format!("limit must be 1..={MAX_LIMIT}, got {v}"))
        }
        Err(msg) => return error(StatusCode::BAD_REQUEST, "BadPagination", msg),
    };
    let category = match query.get("category").filter(|c| !c.trim().is_empty()) {
        None => None,
        Some(c) => match c.parse::<Category>() {
            Ok(c) => Some(c),
            Err(e) => return error(StatusCode::BAD_REQUEST, e.code(), e.to_string()),
        },
    };
    let qa = state.qa.lock().expect("qa lock poisoned");
    let matching: Vec<&QAPair> = qa.pairs.iter().filter(|p| category.map_or(true, |c| p.category == c)).collect();
    let items = matching.iter().skip(offset).take(limit).map(|p| (*p).clone()).collect();
    Json(QaPage { total: matching.len(), offset, limit, items }).into_response()
}

fn lookup(state: &AppState, key: &LookupKey) -> Response {
    let Some(records) = &state.records else {
        return error(StatusCode::CONFLICT, "NoRecordStore", "server was started without a records file");
    };
    match records.read().expect("records lock poisoned").store().lookup(key) {
        Some(record) => Json(record).into_response(),
        None => error(StatusCode::NOT_FOUND, "NotFound", "no such paper"),
    }
}

async fn paper_by_doi(State(state): State<Arc<AppState>>, UrlPath(doi): UrlPath<String>) -> Response {
    lookup(&state, &LookupKey::Doi(doi))
}

async fn paper_by_pmid(State(state): State<Arc<AppState>>, UrlPath(pmid): UrlPath<String>) -> Response {
    lookup(&state, &LookupKey::Pmid(pmid))
}

/// Bulk upload item. Only identity fields are needed; everything else
/// defaults to empty and `record_id` is always recomputed.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IncomingRecord {
    #[serde(default)]
    #[allow(dead_code)]
    record_id: Option<String>,
    #[serde(default)]
    doi: Option<String>,
    #[serde(default)]
    pmid: Option<String>,
    #[serde(default)]
    title: String,
    #[serde(default)]
    authors: Vec<String>,
    #[serde(default)]
    journal: Option<String>,
    #[serde(default)]
    pub_date: Option<String>,
    #[serde(default, rename = "abstract")]
    abstract_text: Option<String>,
    #[serde(default)]
    keywords: Vec<String>,
    #[serde(default)]
    source_format: Option<SourceFormat>,
    #[serde(default)]
    extra: BTreeMap<String, String>,
}

impl From<IncomingRecord> for PaperRecord {
    fn from(r: IncomingRecord) -> Self {
        PaperRecord {
            record_id: String::new(),
            doi: r.doi,
            pmid: r.pmid,
            title: r.title,
            authors: r.authors,
            journal: r.journal,
            pub_date: r.pub_date,
            abstract_text: r.abstract_text,
            keywords: r.keywords,
            source_format: r.source_format.unwrap_or(SourceFormat::Nbib),
            extra: r.extra,
        }
        .finish()
    }
}

async fn bulk_papers(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let Some(records) = &state.records else {
        return error(StatusCode::CONFLICT, "NoRecordStore", "server was started without a records file");
    };
    let incoming: Vec<IncomingRecord> = match serde_json::from_slice(&body) {
        Ok(v) => v,
        Err(e) => return error(StatusCode::BAD_REQUEST, "MalformedBody", e.to_string()),
    };
    let incoming: Vec<PaperRecord> = incoming.into_iter().map(PaperRecord::from).collect();
    let mut store = records.write().expect("records lock poisoned");
    match store.bulk_put(incoming) {
        Ok((report, warnings)) => {
            for w in &warnings {
                log::info!("bulk upload: {w}");
            }
            Json(report).into_response()
        }
        Err(e) => io_error(e),
    }
}
