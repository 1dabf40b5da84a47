//! Rankings, per-update deltas and the h-index.

use std::cmp::Ordering;
use std::collections::HashSet;

use chrono::{DateTime, Utc};
use serde::Serialize;
use thiserror::Error;

use crate::parser::ScholarId;
use crate::store::Snapshot;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankedRow {
    /// 1-based position; tied researchers still get distinct ranks.
    pub rank: usize,
    pub scholar_id: ScholarId,
    pub name: String,
    pub citations_all: u64,
    /// Change in `citations_all` since the previous snapshot, if any.
    pub delta_citations: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CitationDelta {
    pub scholar_id: ScholarId,
    pub previous_at: DateTime<Utc>,
    pub current_at: DateTime<Utc>,
    pub d_citations_all: i64,
    pub d_h_index_all: i64,
    pub d_i10_all: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("more than one snapshot for {0}")]
    DuplicateId(ScholarId),
    #[error("cannot compare snapshots of {previous} and {current}")]
    IdMismatch { previous: ScholarId, current: ScholarId },
    #[error("current snapshot ({current}) predates previous snapshot ({previous})")]
    TimeOrder { previous: DateTime<Utc>, current: DateTime<Utc> },
}

/// Ranking order: most citations first, then name (case-insensitive), then
/// ID bytes.
pub fn ranking_order(a: &Snapshot, b: &Snapshot) -> Ordering {
    b.profile
        .citations_all
        .cmp(&a.profile.citations_all)
        .then_with(|| a.profile.name.to_lowercase().cmp(&b.profile.name.to_lowercase()))
        .then_with(|| a.scholar_id().as_str().as_bytes().cmp(b.scholar_id().as_str().as_bytes()))
}

/// Orders the latest snapshots of each researcher. Deltas are left empty;
/// see [`RankedRow::delta_citations`].
pub fn rank<'a, I>(latest: I) -> Result<Vec<RankedRow>, MetricsError>
where
    I: IntoIterator<Item = &'a Snapshot>,
{
    let mut seen = HashSet::new();
    let mut rows: Vec<&Snapshot> = Vec::new();
    for s in latest {
        if !seen.insert(s.scholar_id()) {
            return Err(MetricsError::DuplicateId(s.scholar_id().clone()));
        }
        rows.push(s);
    }
    rows.sort_by(|a, b| ranking_order(a, b));
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(i, s)| RankedRow {
            rank: i + 1,
            scholar_id: s.scholar_id().clone(),
            name: s.profile.name.clone(),
            citations_all: s.profile.citations_all,
            delta_citations: None,
        })
        .collect())
}

/// The largest `h` such that at least `h` of the counts are `>= h`.
pub fn compute_h_index(citation_counts: &[u64]) -> u64 {
    let mut sorted = citation_counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted
        .iter()
        .enumerate()
        .take_while(|&(i, &c)| c > i as u64)
        .count() as u64
}

pub fn delta(previous: &Snapshot, current: &Snapshot) -> Result<CitationDelta, MetricsError> {
    if previous.scholar_id() != current.scholar_id() {
        return Err(MetricsError::IdMismatch {
            previous: previous.scholar_id().clone(),
            current: current.scholar_id().clone(),
        });
    }
    if current.fetched_at < previous.fetched_at {
        return Err(MetricsError::TimeOrder { previous: previous.fetched_at, current: current.fetched_at });
    }
    let diff = |c: u64, p: u64| c as i64 - p as i64;
    Ok(CitationDelta {
        scholar_id: current.scholar_id().clone(),
        previous_at: previous.fetched_at,
        current_at: current.fetched_at,
        d_citations_all: diff(current.profile.citations_all, previous.profile.citations_all),
        d_h_index_all: diff(current.profile.h_index_all, previous.profile.h_index_all),
        d_i10_all: diff(current.profile.i10_all, previous.profile.i10_all),
    })
}
