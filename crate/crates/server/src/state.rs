use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use divclust::io::{load_matrix, LoadOptions};
use divclust::linalg::DataMatrix;
use tokio::sync::Mutex;

use crate::error::ApiError;
use crate::session::Session;
use crate::snapshot;

pub const DEFAULT_MAX_UPLOAD_BYTES: usize = 64 << 20;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Directory of named datasets. `NAME`, `NAME.csv` or `NAME.tsv` is the
    /// matrix and an optional `NAME.labels` holds one class per line.
    pub data_dir: Option<PathBuf>,
    /// Where uploaded datasets and session edit logs are persisted. Sessions
    /// found here are rebuilt on start.
    pub snapshot_dir: Option<PathBuf>,
    pub max_upload_bytes: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            data_dir: None,
            snapshot_dir: None,
            max_upload_bytes: DEFAULT_MAX_UPLOAD_BYTES,
        }
    }
}

pub(crate) type SessionCell = Arc<Mutex<Session>>;

struct Shared {
    config: ServerConfig,
    datasets: RwLock<HashMap<String, Arc<DataMatrix>>>,
    sessions: RwLock<HashMap<String, SessionCell>>,
}

/// Shared server state; cheap to clone.
#[derive(Clone)]
pub struct AppState(Arc<Shared>);

/// Dataset names are plain file names: ASCII letters, digits, `.`, `_`, `-`,
/// not starting with a dot.
pub(crate) fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name.len() <= 128
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
}

/// Loads `name` from a directory following the data-dir layout.
pub(crate) fn load_named(dir: &Path, name: &str) -> Option<divclust::Result<DataMatrix>> {
    if !valid_name(name) {
        return None;
    }
    let file = [name.to_string(), format!("{name}.csv"), format!("{name}.tsv")]
        .into_iter()
        .map(|f| dir.join(f))
        .find(|p| p.is_file())?;
    let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or(name);
    let labels = dir.join(format!("{stem}.labels"));
    let opts = LoadOptions {
        label_file: labels.is_file().then_some(labels),
        ..LoadOptions::default()
    };
    Some(load_matrix(&file, &opts))
}

impl AppState {
    /// Creates the state and rebuilds any sessions saved in the snapshot
    /// directory.
    pub fn new(config: ServerConfig) -> divclust::Result<Self> {
        let state = Self(Arc::new(Shared {
            config,
            datasets: RwLock::new(HashMap::new()),
            sessions: RwLock::new(HashMap::new()),
        }));
        if let Some(dir) = state.config().snapshot_dir.clone() {
            snapshot::restore_all(&state, &dir)?;
        }
        Ok(state)
    }

    pub fn config(&self) -> &ServerConfig {
        &self.0.config
    }

    pub fn dataset_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.0.datasets.read().expect("lock").keys().cloned().collect();
        ids.sort();
        ids
    }

    pub fn insert_dataset(&self, id: String, data: Arc<DataMatrix>) {
        self.0.datasets.write().expect("lock").insert(id, data);
    }

    pub fn has_dataset(&self, id: &str) -> bool {
        self.0.datasets.read().expect("lock").contains_key(id)
    }

    pub(crate) fn cached_dataset(&self, id: &str) -> Option<Arc<DataMatrix>> {
        self.0.datasets.read().expect("lock").get(id).cloned()
    }

    /// An uploaded dataset, or one from the data directory (cached after the
    /// first load).
    pub fn dataset(&self, id: &str) -> Result<Arc<DataMatrix>, ApiError> {
        if let Some(d) = self.cached_dataset(id) {
            return Ok(d);
        }
        let missing = || ApiError::not_found("dataset_not_found", format!("unknown dataset '{id}'"));
        let dir = self.config().data_dir.as_ref().ok_or_else(missing)?;
        let data = Arc::new(load_named(dir, id).ok_or_else(missing)??);
        let mut map = self.0.datasets.write().expect("lock");
        Ok(map.entry(id.to_string()).or_insert(data).clone())
    }

    pub(crate) fn session(&self, id: &str) -> Result<SessionCell, ApiError> {
        self.0
            .sessions
            .read()
            .expect("lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session_not_found", format!("unknown session '{id}'")))
    }

    pub(crate) fn insert_session(&self, session: Session) -> SessionCell {
        let id = session.id().to_string();
        let cell = Arc::new(Mutex::new(session));
        self.0.sessions.write().expect("lock").insert(id, cell.clone());
        cell
    }

    pub(crate) fn remove_session(&self, id: &str) -> Option<SessionCell> {
        self.0.sessions.write().expect("lock").remove(id)
    }

    pub fn session_count(&self) -> usize {
        self.0.sessions.read().expect("lock").len()
    }
}
