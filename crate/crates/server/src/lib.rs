//! HTTP curation service.
//!
//! | method | path                        | purpose                                  |
//! |--------|-----------------------------|------------------------------------------|
//! | POST   | `/api/qa`                   | validate and append one QA pair          |
//! | GET    | `/api/qa`                   | list pairs (`category`, `offset`, `limit`) |
//! | GET    | `/api/stats`                | progress counts                          |
//! | GET    | `/api/papers/doi/{doi}`     | paper lookup by DOI                      |
//! | GET    | `/api/papers/pmid/{pmid}`   | paper lookup by PMID                     |
//! | POST   | `/api/papers/bulk`          | dedup-merge a list of records            |
//!
//! Everything else is served from the optional static directory. All QA
//! file writes and counter updates go through one mutex, so the service is
//! the file's single writer.

mod api;
mod config;
mod state;

use std::future::Future;

pub use api::{router, ErrorBody};
pub use config::{ServerError, ServiceConfig};
pub use state::AppState;

/// Binds `cfg.host:cfg.port` and serves until `shutdown` resolves.
pub async fn serve(
    cfg: &ServiceConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServerError> {
    let state = AppState::load(cfg)?;
    let app = router(state, cfg.static_dir.as_deref());
    let listener = tokio::net::TcpListener::bind((cfg.host, cfg.port))
        .await
        .map_err(|e| ServerError::Bind(format!("{}:{}", cfg.host, cfg.port), e))?;
    log::info!("listening on http://{}", listener.local_addr().map_err(ServerError::Io)?);
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await.map_err(ServerError::Io)
}
