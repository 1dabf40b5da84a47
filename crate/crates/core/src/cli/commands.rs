//! The commands as library calls. Each returns plain data; rendering lives
//! in [`super::render`].

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, Utc};
use serde::Serialize;

use crate::config::{self, ConfigError, TrackerConfig};
use crate::fetcher::{paced_sequence_with, Clock, FetchErrorKind, Transport};
use crate::metrics::{self, CitationDelta, RankedRow};
use crate::parser::{extract_scholar_id, parse_profile, ParseError, ScholarId};
use crate::store::{Snapshot, Store, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateStatus {
    Updated,
    NotFound,
    Blocked,
    RateLimited,
    NetworkFailed,
    ParseFailed,
}

impl UpdateStatus {
    pub const ALL: [UpdateStatus; 6] = [
        Self::Updated,
        Self::NotFound,
        Self::Blocked,
        Self::RateLimited,
        Self::NetworkFailed,
        Self::ParseFailed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Updated => "updated",
            Self::NotFound => "not_found",
            Self::Blocked => "blocked",
            Self::RateLimited => "rate_limited",
            Self::NetworkFailed => "network_failed",
            Self::ParseFailed => "parse_failed",
        }
    }
}

impl From<&FetchErrorKind> for UpdateStatus {
    fn from(kind: &FetchErrorKind) -> Self {
        match kind {
            FetchErrorKind::NotFound => Self::NotFound,
            FetchErrorKind::RateLimitedByServer => Self::RateLimited,
            FetchErrorKind::Blocked | FetchErrorKind::Skipped => Self::Blocked,
            FetchErrorKind::NetworkFailure { .. } | FetchErrorKind::UnexpectedStatus { .. } => Self::NetworkFailed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UpdateEntry {
    pub scholar_id: ScholarId,
    pub status: UpdateStatus,
    pub snapshot: Option<Snapshot>,
    pub delta: Option<CitationDelta>,
    /// Failure description for anything but `updated`.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UpdateReport {
    pub entries: Vec<UpdateEntry>,
    pub counts: BTreeMap<UpdateStatus, usize>,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
}

impl UpdateReport {
    pub fn count(&self, status: UpdateStatus) -> usize {
        self.counts.get(&status).copied().unwrap_or(0)
    }

    /// 0 when every ID updated (or none are configured), 3 when none did,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        let updated = self.count(UpdateStatus::Updated);
        if updated == self.entries.len() {
            0
        } else if updated == 0 {
            3
        } else {
            1
        }
    }
}

/// Fetches every configured profile and appends one snapshot per success.
///
/// Each snapshot is written as soon as its page is parsed, so an
/// interrupted run keeps everything fetched so far. `progress` sees every
/// entry as it is decided.
pub fn cmd_update(
    config: &TrackerConfig,
    store: &mut Store,
    transport: &dyn Transport,
    clock: &dyn Clock,
    mut progress: impl FnMut(usize, &UpdateEntry),
) -> Result<UpdateReport, StoreError> {
    let started_at = clock.now();
    let mut entries = Vec::with_capacity(config.scholar_ids.len());
    let mut store_error = None;

    paced_sequence_with(&config.scholar_ids, &config.policy, transport, clock, |id, result| {
        if store_error.is_some() {
            return;
        }
        let entry = match result {
            Err(e) => failed(id, UpdateStatus::from(&e.kind), e.to_string()),
            Ok(page) => match parse_profile(&page.html, id) {
                Err(e @ ParseError::BlockedPage { .. }) => failed(id, UpdateStatus::Blocked, e.to_string()),
                Err(e @ ParseError::MalformedProfile { .. }) => failed(id, UpdateStatus::ParseFailed, e.to_string()),
                Ok(profile) => {
                    let snapshot = Snapshot::new(profile, page.fetched_at);
                    let delta = store.latest(id).and_then(|prev| metrics::delta(prev, &snapshot).ok());
                    if let Err(e) = store.append(snapshot.clone()) {
                        store_error = Some(e);
                        return;
                    }
                    UpdateEntry { scholar_id: id.clone(), status: UpdateStatus::Updated, snapshot: Some(snapshot), delta, error: None }
                }
            },
        };
        progress(entries.len(), &entry);
        entries.push(entry);
    });
    if let Some(e) = store_error {
        return Err(e);
    }

    let mut counts: BTreeMap<UpdateStatus, usize> = UpdateStatus::ALL.iter().map(|s| (*s, 0)).collect();
    for e in &entries {
        *counts.entry(e.status).or_default() += 1;
    }
    Ok(UpdateReport { entries, counts, started_at, finished_at: clock.now() })
}

fn failed(id: &ScholarId, status: UpdateStatus, error: String) -> UpdateEntry {
    UpdateEntry { scholar_id: id.clone(), status, snapshot: None, delta: None, error: Some(error) }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankEntry {
    #[serde(flatten)]
    pub row: RankedRow,
    #[serde(with = "crate::store::utc_seconds")]
    pub fetched_at: DateTime<Utc>,
    pub age_seconds: i64,
    pub stale: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankView {
    pub rows: Vec<RankEntry>,
    /// Configured IDs with no stored snapshot, in configuration order.
    pub never_fetched: Vec<ScholarId>,
}

pub const DEFAULT_STALE_AFTER_DAYS: i64 = 7;

/// Ranks the configured researchers from stored data only.
pub fn cmd_rank(config: &TrackerConfig, store: &Store, now: DateTime<Utc>, stale_after: Duration) -> RankView {
    let latest: Vec<&Snapshot> = config.scholar_ids.iter().filter_map(|id| store.latest(id)).collect();
    let rows = metrics::rank(latest.iter().copied()).expect("configured IDs are unique");
    let rows = rows
        .into_iter()
        .map(|mut row| {
            let history = store.history(&row.scholar_id);
            let current = history.last().expect("ranked IDs have history");
            if let [.., prev, _] = history.as_slice() {
                row.delta_citations = Some(current.profile.citations_all as i64 - prev.profile.citations_all as i64);
            }
            let age = now - current.fetched_at;
            RankEntry { fetched_at: current.fetched_at, age_seconds: age.num_seconds(), stale: age > stale_after, row }
        })
        .collect();
    let never_fetched = config.scholar_ids.iter().filter(|id| store.latest(id).is_none()).cloned().collect();
    RankView { rows, never_fetched }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HistoryRow {
    #[serde(with = "crate::store::utc_seconds")]
    pub fetched_at: DateTime<Utc>,
    pub citations_all: u64,
    pub delta_citations: Option<i64>,
    pub h_index_all: u64,
    pub i10_all: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryView {
    pub scholar_id: ScholarId,
    pub name: Option<String>,
    pub rows: Vec<HistoryRow>,
}

/// Stored snapshots of one tracked researcher, oldest first.
pub fn cmd_history(config: &TrackerConfig, store: &Store, raw_id: &str) -> Result<HistoryView, ConfigError> {
    let id = extract_scholar_id(raw_id)?;
    if !config.scholar_ids.contains(&id) {
        return Err(ConfigError::NotTracked(id));
    }
    let history = store.history(&id);
    let rows = history
        .iter()
        .enumerate()
        .map(|(i, s)| HistoryRow {
            fetched_at: s.fetched_at,
            citations_all: s.profile.citations_all,
            delta_citations: i
                .checked_sub(1)
                .map(|p| s.profile.citations_all as i64 - history[p].profile.citations_all as i64),
            h_index_all: s.profile.h_index_all,
            i10_all: s.profile.i10_all,
        })
        .collect();
    let name = history.last().map(|s| s.profile.name.clone());
    Ok(HistoryView { scholar_id: id, name, rows })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ListEntry {
    pub scholar_id: ScholarId,
    pub name: Option<String>,
    pub citations_all: Option<u64>,
    #[serde(with = "crate::store::utc_seconds::option")]
    pub fetched_at: Option<DateTime<Utc>>,
}

pub fn cmd_list(config: &TrackerConfig, store: &Store) -> Vec<ListEntry> {
    config
        .scholar_ids
        .iter()
        .map(|id| {
            let latest = store.latest(id);
            ListEntry {
                scholar_id: id.clone(),
                name: latest.map(|s| s.profile.name.clone()),
                citations_all: latest.map(|s| s.profile.citations_all),
                fetched_at: latest.map(|s| s.fetched_at),
            }
        })
        .collect()
}

/// Adds the ID and saves the config.
pub fn cmd_add(
    config_path: &std::path::Path,
    config: &TrackerConfig,
    raw: &str,
) -> Result<(TrackerConfig, ScholarId), ConfigError> {
    let next = config::add_id(config, raw)?;
    config::save_config(config_path, &next)?;
    let id = next.scholar_ids.last().cloned().expect("just added");
    Ok((next, id))
}

pub fn cmd_remove(
    config_path: &std::path::Path,
    config: &TrackerConfig,
    raw: &str,
) -> Result<(TrackerConfig, ScholarId), ConfigError> {
    let id = extract_scholar_id(raw)?;
    let next = config::remove_id(config, &id)?;
    config::save_config(config_path, &next)?;
    Ok((next, id))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown export format {0:?} (expected json or csv)")]
pub struct UnknownFormat(pub String);

impl std::str::FromStr for ExportFormat {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            _ => Err(UnknownFormat(s.to_string())),
        }
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "scholar_id",
    "name",
    "citations_all",
    "citations_recent",
    "h_index_all",
    "h_index_recent",
    "i10_all",
    "i10_recent",
    "fetched_at",
];

/// Latest snapshot of every researcher in the store, ordered by ID.
pub fn cmd_export(store: &Store, format: ExportFormat) -> String {
    let latest: Vec<Snapshot> = store.all_latest().into_values().collect();
    match format {
        ExportFormat::Json => {
            let mut out = serde_json::to_string_pretty(&latest).expect("snapshots serialize");
            out.push('\n');
            out
        }
        ExportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(CSV_HEADER).expect("in-memory write");
            for s in &latest {
                let p = &s.profile;
                w.write_record([
                    p.scholar_id.to_string(),
                    p.name.clone(),
                    p.citations_all.to_string(),
                    p.citations_recent.to_string(),
                    p.h_index_all.to_string(),
                    p.h_index_recent.to_string(),
                    p.i10_all.to_string(),
                    p.i10_recent.to_string(),
                    crate::store::utc_seconds::format(&s.fetched_at),
                ])
                .expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv of UTF-8 fields")
        }
    }
}
