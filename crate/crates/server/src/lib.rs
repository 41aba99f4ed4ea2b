//! HTTP service hosting interactive clustering sessions.
//!
//! A session holds one dataset, one algorithm configuration and the current
//! cluster tree. Clients inspect the tree, fetch a node's 2-D split view and
//! move split points; every successful mutation bumps the session revision,
//! and `expected_revision` on edits turns concurrent edits into `409`s.
//!
//! | method | path | |
//! |---|---|---|
//! | GET | `/healthz` | liveness |
//! | GET, POST | `/datasets` | list, upload CSV |
//! | POST | `/sessions` | fit a new session |
//! | GET, DELETE | `/sessions/{id}` | summary, drop |
//! | GET | `/sessions/{id}/tree` | full tree, labels, revision |
//! | GET | `/sessions/{id}/edits` | edit log |
//! | GET | `/sessions/{id}/nodes/{nid}/view` | split view |
//! | POST | `/sessions/{id}/nodes/{nid}/split` | move a split point |
//! | POST | `/sessions/{id}/reset` | refit, clear edits |
//! | GET | `/sessions/{id}/dendrogram` | linkage JSON, or SVG with `?format=svg` |

mod error;
mod routes;
mod session;
mod snapshot;
mod state;

pub use error::ApiError;
pub use routes::{router, CreateSession, DatasetInfo, SplitRequest, UploadParams};
pub use session::{
    labels_digest, DendrogramResponse, EditRecord, NodeSummary, Session, SessionSnapshot, SessionSummary,
    SplitResponse, TreeResponse,
};
pub use state::{AppState, ServerConfig};

use std::net::SocketAddr;

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
