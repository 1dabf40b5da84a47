//! Plain aligned text and JSON renderings of command results.
//!
//! Text output has no styling so it can be compared byte-for-byte.

use std::fmt::Write as _;

use serde_json::json;

use super::commands::{HistoryView, ListEntry, RankView, UpdateEntry, UpdateReport, UpdateStatus};
use crate::store::utc_seconds;

/// `3d`, `5h`, `12m`, or `now`.
pub fn human_age(seconds: i64) -> String {
    match seconds {
        s if s < 60 => "now".to_string(),
        s if s < 3600 => format!("{}m", s / 60),
        s if s < 86_400 => format!("{}h", s / 3600),
        s => format!("{}d", s / 86_400),
    }
}

fn signed(delta: Option<i64>) -> String {
    match delta {
        Some(d) if d > 0 => format!("+{d}"),
        Some(d) => d.to_string(),
        None => "-".to_string(),
    }
}

/// Left-aligns text columns and right-aligns the rest.
fn table(header: &[&str], right_aligned: &[bool], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    for row in std::iter::once(&header).chain(rows) {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            let pad = widths[i] - cell.chars().count();
            if right_aligned[i] {
                line.extend(std::iter::repeat_n(' ', pad));
                line.push_str(cell);
            } else {
                line.push_str(cell);
                line.extend(std::iter::repeat_n(' ', pad));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn rank_text(view: &RankView) -> String {
    let rows: Vec<Vec<String>> = view
        .rows
        .iter()
        .map(|e| {
            vec![
                e.row.rank.to_string(),
                e.row.scholar_id.to_string(),
                e.row.name.clone(),
                e.row.citations_all.to_string(),
                signed(e.row.delta_citations),
                human_age(e.age_seconds),
                if e.stale { "stale".into() } else { String::new() },
            ]
        })
        .collect();
    let mut out = table(
        &["RANK", "SCHOLAR ID", "NAME", "CITATIONS", "DELTA", "AGE", ""],
        &[true, false, false, true, true, true, false],
        &rows,
    );
    if !view.never_fetched.is_empty() {
        out.push_str("\nnever fetched:\n");
        for id in &view.never_fetched {
            let _ = writeln!(out, "  {id}");
        }
    }
    out
}

/// Ranked rows first, then never-fetched IDs with null metrics, in the same
/// order as [`rank_text`].
pub fn rank_json(view: &RankView) -> serde_json::Value {
    let mut items: Vec<serde_json::Value> =
        view.rows.iter().map(|e| serde_json::to_value(e).expect("rank entries serialize")).collect();
    items.extend(view.never_fetched.iter().map(|id| {
        json!({
            "rank": null,
            "scholar_id": id,
            "name": null,
            "citations_all": null,
            "delta_citations": null,
            "fetched_at": null,
            "age_seconds": null,
            "stale": null,
        })
    }));
    serde_json::Value::Array(items)
}

pub fn history_text(view: &HistoryView) -> String {
    let mut out = String::new();
    let name = view.name.as_deref().unwrap_or("(never fetched)");
    let _ = writeln!(out, "{} {}", view.scholar_id, name);
    let rows: Vec<Vec<String>> = view
        .rows
        .iter()
        .map(|r| {
            vec![
                utc_seconds::format(&r.fetched_at),
                r.citations_all.to_string(),
                signed(r.delta_citations),
                r.h_index_all.to_string(),
                r.i10_all.to_string(),
            ]
        })
        .collect();
    out.push_str(&table(
        &["FETCHED AT", "CITATIONS", "DELTA", "H-INDEX", "I10-INDEX"],
        &[false, true, true, true, true],
        &rows,
    ));
    out
}

pub fn history_json(view: &HistoryView) -> serde_json::Value {
    serde_json::to_value(&view.rows).expect("history rows serialize")
}

pub fn list_text(entries: &[ListEntry]) -> String {
    if entries.is_empty() {
        return "no researchers tracked\n".to_string();
    }
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            vec![
                e.scholar_id.to_string(),
                e.name.clone().unwrap_or_else(|| "-".into()),
                e.citations_all.map_or_else(|| "-".into(), |c| c.to_string()),
                e.fetched_at.map_or_else(|| "never".into(), |t| utc_seconds::format(&t)),
            ]
        })
        .collect();
    table(&["SCHOLAR ID", "NAME", "CITATIONS", "FETCHED AT"], &[false, false, true, false], &rows)
}

pub fn update_entry_line(entry: &UpdateEntry) -> String {
    match (&entry.snapshot, &entry.error) {
        (Some(s), _) => {
            let delta = entry.delta.as_ref().map(|d| d.d_citations_all);
            format!(
                "{}  {}  {}  {} citations ({})",
                entry.scholar_id,
                entry.status.as_str(),
                s.profile.name,
                s.profile.citations_all,
                signed(delta)
            )
        }
        (None, Some(err)) => format!("{}  {}  {err}", entry.scholar_id, entry.status.as_str()),
        (None, None) => format!("{}  {}", entry.scholar_id, entry.status.as_str()),
    }
}

pub fn update_text(report: &UpdateReport) -> String {
    let mut out = String::new();
    for entry in &report.entries {
        out.push_str(&update_entry_line(entry));
        out.push('\n');
    }
    let counts: Vec<String> = UpdateStatus::ALL
        .iter()
        .filter(|s| report.count(**s) > 0)
        .map(|s| format!("{} {}", report.count(*s), s.as_str()))
        .collect();
    let summary = if counts.is_empty() { "nothing to update".to_string() } else { counts.join(", ") };
    let _ = writeln!(out, "{summary} ({} configured)", report.entries.len());
    out
}
