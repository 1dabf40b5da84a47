//! Append-only snapshot history in `<root>/snapshots.jsonl`.
//!
//! One JSON object per line, LF-terminated. A write is one `write_all` of a
//! complete line followed by a sync, so a crash can at worst leave a final
//! line without its newline. Such a line is dropped on load (with a
//! warning) and trimmed from the file when the store is opened for writing.
//! Any other unreadable line is reported as corruption.

mod lock;
mod snapshot;

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::parser::{ProfileInvariantError, ScholarId};

pub use lock::STALE_AFTER;
pub use snapshot::{utc_seconds, Snapshot};

pub const SNAPSHOTS_FILE: &str = "snapshots.jsonl";
pub const LOCK_FILE: &str = "lock";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{}: line {line} is corrupt: {reason}", path.display())]
    StoreCorrupt { path: PathBuf, line: usize, reason: String },
    #[error("{}: {source}", path.display())]
    IoDenied {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("store is locked by another writer ({holder}); lock file {}{}", path.display(),
        if *breakable { ", pass --force-unlock to break it" } else { "" })]
    StoreLocked { path: PathBuf, holder: String, breakable: bool },
    #[error("refusing to store invalid snapshot: {0}")]
    InvalidSnapshot(#[from] ProfileInvariantError),
    #[error("store was opened read-only")]
    ReadOnly,
}

impl StoreError {
    fn io(path: &Path, source: io::Error) -> Self {
        Self::IoDenied { path: path.to_path_buf(), source }
    }
}

#[derive(Debug)]
struct Writer {
    file: File,
    _lock: lock::StoreLock,
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    snapshots: Vec<Snapshot>,
    warnings: Vec<String>,
    writer: Option<Writer>,
}

impl Store {
    /// Opens (creating if needed) a store for writing, taking the lock.
    pub fn open(root: impl AsRef<Path>) -> Result<Self, StoreError> {
        Self::open_with(root, false)
    }

    /// Like [`Store::open`]; with `force_unlock`, a lock older than
    /// [`STALE_AFTER`] is broken instead of reported.
    pub fn open_with(root: impl AsRef<Path>, force_unlock: bool) -> Result<Self, StoreError> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root).map_err(|e| StoreError::io(&root, e))?;
        let lock = lock::StoreLock::acquire(&root.join(LOCK_FILE), force_unlock)?;

        let path = root.join(SNAPSHOTS_FILE);
        let file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)
            .map_err(|e| StoreError::io(&path, e))?;
        let bytes = fs::read(&path).map_err(|e| StoreError::io(&path, e))?;
        let loaded = load(&path, &bytes)?;
        if loaded.complete_len < bytes.len() {
            file.set_len(loaded.complete_len as u64).map_err(|e| StoreError::io(&path, e))?;
            file.sync_all().map_err(|e| StoreError::io(&path, e))?;
        }
        Ok(Self {
            root,
            snapshots: loaded.snapshots,
            warnings: loaded.warnings,
            writer: Some(Writer { file, _lock: lock }),
        })
    }

    /// Opens without locking or modifying anything. A missing store reads
    /// as empty.
    pub fn open_read_only(root: impl AsRef<Path>) -> Result<Self, StoreError> {
        let root = root.as_ref().to_path_buf();
        let path = root.join(SNAPSHOTS_FILE);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(StoreError::io(&path, e)),
        };
        let loaded = load(&path, &bytes)?;
        Ok(Self { root, snapshots: loaded.snapshots, warnings: loaded.warnings, writer: None })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn snapshots_path(&self) -> PathBuf {
        self.root.join(SNAPSHOTS_FILE)
    }

    /// Problems tolerated while loading (e.g. a dropped partial line).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn is_writable(&self) -> bool {
        self.writer.is_some()
    }

    /// All snapshots in file order.
    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Appends one line and syncs it before returning.
    pub fn append(&mut self, snapshot: Snapshot) -> Result<(), StoreError> {
        snapshot.validate()?;
        let path = self.snapshots_path();
        let writer = self.writer.as_mut().ok_or(StoreError::ReadOnly)?;
        let mut line = serde_json::to_string(&snapshot).expect("snapshots serialize");
        line.push('\n');
        writer.file.write_all(line.as_bytes()).map_err(|e| StoreError::io(&path, e))?;
        writer.file.sync_data().map_err(|e| StoreError::io(&path, e))?;
        self.snapshots.push(snapshot);
        Ok(())
    }

    /// Newest snapshot for `id`; equal timestamps resolve to the later line.
    pub fn latest(&self, id: &ScholarId) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.scholar_id() == id)
            .max_by_key(|(i, s)| (s.fetched_at, *i))
            .map(|(_, s)| s)
    }

    /// Snapshots for `id`, oldest first, file order among equal timestamps.
    pub fn history(&self, id: &ScholarId) -> Vec<Snapshot> {
        let mut out: Vec<Snapshot> = self.snapshots.iter().filter(|s| s.scholar_id() == id).cloned().collect();
        out.sort_by_key(|s| s.fetched_at);
        out
    }

    pub fn all_latest(&self) -> BTreeMap<ScholarId, Snapshot> {
        let mut out: BTreeMap<ScholarId, Snapshot> = BTreeMap::new();
        for s in &self.snapshots {
            match out.get(s.scholar_id()) {
                Some(cur) if cur.fetched_at > s.fetched_at => {}
                _ => {
                    out.insert(s.scholar_id().clone(), s.clone());
                }
            }
        }
        out
    }
}

struct Loaded {
    snapshots: Vec<Snapshot>,
    warnings: Vec<String>,
    /// Byte length up to and including the last newline.
    complete_len: usize,
}

fn load(path: &Path, bytes: &[u8]) -> Result<Loaded, StoreError> {
    let complete_len = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let mut warnings = Vec::new();
    if complete_len < bytes.len() {
        let line = bytes[..complete_len].iter().filter(|&&b| b == b'\n').count() + 1;
        let msg = format!(
            "{}: dropping incomplete final line {line} ({} bytes, likely an interrupted write)",
            path.display(),
            bytes.len() - complete_len
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let mut snapshots = Vec::new();
    for (idx, raw) in bytes[..complete_len].split(|&b| b == b'\n').enumerate() {
        let line = idx + 1;
        let corrupt = |reason: String| StoreError::StoreCorrupt { path: path.to_path_buf(), line, reason };
        let text = std::str::from_utf8(raw).map_err(|e| corrupt(e.to_string()))?;
        let text = text.strip_suffix('\r').unwrap_or(text);
        if text.trim().is_empty() {
            continue;
        }
        let snapshot: Snapshot = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
        snapshot.validate().map_err(|e| corrupt(e.to_string()))?;
        snapshots.push(snapshot);
    }
    Ok(Loaded { snapshots, warnings, complete_len })
}
