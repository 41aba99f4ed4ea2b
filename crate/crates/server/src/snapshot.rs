//! Disk persistence: uploaded datasets as `datasets/ID.csv` (+ `ID.labels`)
//! and sessions as `sessions/ID.json` holding config and edit log.

use std::path::Path;
use std::sync::Arc;

use divclust::io::{format_matrix, write_atomic};
use divclust::linalg::DataMatrix;
use divclust::Error;

use crate::session::{Session, SessionSnapshot};
use crate::state::{load_named, valid_name, AppState};

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::io(path, e)
}

pub(crate) fn save_dataset(dir: &Path, id: &str, data: &DataMatrix) -> divclust::Result<()> {
    let root = dir.join("datasets");
    std::fs::create_dir_all(&root).map_err(|e| io_err(&root, e))?;
    write_atomic(root.join(format!("{id}.csv")), format_matrix(data, b',', false).as_bytes())?;
    if let Some(labels) = data.labels() {
        let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
        write_atomic(root.join(format!("{id}.labels")), text.as_bytes())?;
    }
    Ok(())
}

pub(crate) fn save_session(dir: &Path, snapshot: &SessionSnapshot) -> divclust::Result<()> {
    let root = dir.join("sessions");
    std::fs::create_dir_all(&root).map_err(|e| io_err(&root, e))?;
    let text = serde_json::to_string_pretty(snapshot)?;
    write_atomic(root.join(format!("{}.json", snapshot.session_id)), text.as_bytes())
}

pub(crate) fn delete_session(dir: &Path, id: &str) {
    let _ = std::fs::remove_file(dir.join("sessions").join(format!("{id}.json")));
}

pub(crate) fn restore_all(state: &AppState, dir: &Path) -> divclust::Result<()> {
    let datasets = dir.join("datasets");
    if let Ok(entries) = std::fs::read_dir(&datasets) {
        for entry in entries.flatten() {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("csv") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()) else { continue };
            if let Some(data) = load_named(&datasets, id) {
                state.insert_dataset(id.to_string(), Arc::new(data?));
            }
        }
    }
    let sessions = dir.join("sessions");
    let Ok(entries) = std::fs::read_dir(&sessions) else {
        return Ok(());
    };
    for entry in entries.flatten() {
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        let snap: SessionSnapshot = serde_json::from_str(&text)?;
        if !valid_name(&snap.session_id) {
            tracing::warn!("skipping snapshot {} with invalid id", path.display());
            continue;
        }
        let data = match state.dataset(&snap.dataset) {
            Ok(d) => d,
            Err(e) => {
                tracing::warn!("skipping session {}: {}", snap.session_id, e.message);
                continue;
            }
        };
        match Session::restore(snap, data) {
            Ok(s) => {
                state.insert_session(s);
            }
            Err(e) => tracing::warn!("could not rebuild {}: {}", path.display(), e.message),
        }
    }
    Ok(())
}
