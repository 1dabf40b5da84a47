use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::StoreError;

/// Locks older than this may be broken with `force_unlock`.
pub const STALE_AFTER: Duration = Duration::hours(1);

#[derive(Debug, Serialize, Deserialize)]
struct LockInfo {
    pid: u32,
    #[serde(with = "super::snapshot::utc_seconds")]
    started_at: DateTime<Utc>,
}

/// Advisory single-writer lock; the lock file is removed on drop.
#[derive(Debug)]
pub(crate) struct StoreLock {
    path: PathBuf,
}

impl StoreLock {
    pub(crate) fn acquire(path: &Path, force_unlock: bool) -> Result<Self, StoreError> {
        match Self::try_create(path) {
            Err(e) if e.kind() == ErrorKind::AlreadyExists => {}
            other => return other.map_err(|e| StoreError::io(path, e)),
        }

        let holder = fs::read_to_string(path).unwrap_or_default();
        let info: Option<LockInfo> = serde_json::from_str(&holder).ok();
        let age = info.as_ref().map(|i| Utc::now() - i.started_at);
        // An unreadable lock has no age; treat it as stale.
        let stale = age.is_none_or(|a| a >= STALE_AFTER);
        if force_unlock && stale {
            log::warn!("breaking stale store lock {}", path.display());
            fs::remove_file(path).map_err(|e| StoreError::io(path, e))?;
            return Self::try_create(path).map_err(|e| StoreError::io(path, e));
        }
        let holder = match info {
            Some(i) => format!("pid {} since {}", i.pid, super::snapshot::utc_seconds::format(&i.started_at)),
            None => "unknown holder".to_string(),
        };
        Err(StoreError::StoreLocked { path: path.to_path_buf(), holder, breakable: stale })
    }

    fn try_create(path: &Path) -> std::io::Result<Self> {
        let mut file = OpenOptions::new().write(true).create_new(true).open(path)?;
        let info = LockInfo { pid: std::process::id(), started_at: Utc::now() };
        file.write_all(serde_json::to_string(&info).expect("lock info serializes").as_bytes())?;
        file.sync_all()?;
        Ok(Self { path: path.to_path_buf() })
    }
}

impl Drop for StoreLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
