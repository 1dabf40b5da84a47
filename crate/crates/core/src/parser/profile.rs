use scraper::{ElementRef, Html, Selector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::count::parse_count;
use super::id::ScholarId;
use super::selectors;

/// Metrics read from one profile page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResearcherProfile {
    pub scholar_id: ScholarId,
    pub name: String,
    pub citations_all: u64,
    pub citations_recent: u64,
    pub h_index_all: u64,
    pub h_index_recent: u64,
    pub i10_all: u64,
    pub i10_recent: u64,
    /// The year in the "Since YYYY" column header.
    #[serde(default)]
    pub recent_since_year: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileInvariantError {
    #[error("name is empty")]
    EmptyName,
    #[error("{metric}: recent value {recent} exceeds all-time value {all}")]
    RecentExceedsAll { metric: &'static str, recent: u64, all: u64 },
    #[error("h-index {h_index} exceeds citation count {citations}")]
    HIndexExceedsCitations { h_index: u64, citations: u64 },
    #[error("since-year {0} outside 1900..=2100")]
    YearOutOfRange(i32),
}

impl ResearcherProfile {
    pub fn validate(&self) -> Result<(), ProfileInvariantError> {
        if self.name.trim().is_empty() {
            return Err(ProfileInvariantError::EmptyName);
        }
        let pairs = [
            ("citations", self.citations_recent, self.citations_all),
            ("h-index", self.h_index_recent, self.h_index_all),
            ("i10-index", self.i10_recent, self.i10_all),
        ];
        for (metric, recent, all) in pairs {
            if recent > all {
                return Err(ProfileInvariantError::RecentExceedsAll { metric, recent, all });
            }
        }
        if self.h_index_all > self.citations_all {
            return Err(ProfileInvariantError::HIndexExceedsCitations {
                h_index: self.h_index_all,
                citations: self.citations_all,
            });
        }
        if let Some(year) = self.recent_since_year {
            if !(1900..=2100).contains(&year) {
                return Err(ProfileInvariantError::YearOutOfRange(year));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("blocked page: {reason}")]
    BlockedPage { reason: String },
    #[error("malformed profile at {element}: {detail}")]
    MalformedProfile { element: String, detail: String },
}

impl ParseError {
    fn malformed(element: impl Into<String>, detail: impl Into<String>) -> Self {
        Self::MalformedProfile { element: element.into(), detail: detail.into() }
    }
}

/// True when `html` looks like a block/captcha interstitial rather than a
/// profile, using the default block phrases.
pub fn detect_block(html: &str) -> bool {
    detect_block_with(html, selectors::DEFAULT_BLOCK_PHRASES)
}

pub fn detect_block_with<S: AsRef<str>>(html: &str, phrases: &[S]) -> bool {
    block_reason(html, &Html::parse_document(html), phrases).is_some()
}

fn block_reason<S: AsRef<str>>(raw: &str, doc: &Html, phrases: &[S]) -> Option<String> {
    let lowered = raw.to_lowercase();
    if let Some(phrase) = phrases
        .iter()
        .map(AsRef::as_ref)
        .find(|p| !p.is_empty() && lowered.contains(&p.to_lowercase()))
    {
        return Some(format!("document contains {phrase:?}"));
    }
    let has_name = doc.select(&sel(selectors::PROFILE_NAME)).next().is_some();
    let has_table = doc.select(&sel(selectors::STATS_TABLE)).next().is_some();
    if !has_name && !has_table {
        return Some("no profile name and no statistics table".into());
    }
    None
}

/// Parses a profile page with the default block phrases.
pub fn parse_profile(html: &str, id: &ScholarId) -> Result<ResearcherProfile, ParseError> {
    parse_profile_with(html, id, selectors::DEFAULT_BLOCK_PHRASES)
}

pub fn parse_profile_with<S: AsRef<str>>(
    html: &str,
    id: &ScholarId,
    block_phrases: &[S],
) -> Result<ResearcherProfile, ParseError> {
    let doc = Html::parse_document(html);
    if let Some(reason) = block_reason(html, &doc, block_phrases) {
        return Err(ParseError::BlockedPage { reason });
    }

    let name = doc
        .select(&sel(selectors::PROFILE_NAME))
        .next()
        .map(element_text)
        .filter(|n| !n.is_empty())
        .ok_or_else(|| ParseError::malformed(selectors::PROFILE_NAME, "profile name element missing or empty"))?;

    let table = doc
        .select(&sel(selectors::STATS_TABLE))
        .next()
        .ok_or_else(|| ParseError::malformed(selectors::STATS_TABLE, "statistics table missing"))?;
    let stats = StatsTable::read(table)?;

    let profile = ResearcherProfile {
        scholar_id: id.clone(),
        name,
        citations_all: stats.cell(selectors::CITATIONS_ROW, stats.all_col)?,
        citations_recent: stats.cell(selectors::CITATIONS_ROW, stats.since_col)?,
        h_index_all: stats.cell(selectors::H_INDEX_ROW, stats.all_col)?,
        h_index_recent: stats.cell(selectors::H_INDEX_ROW, stats.since_col)?,
        i10_all: stats.cell(selectors::I10_INDEX_ROW, stats.all_col)?,
        i10_recent: stats.cell(selectors::I10_INDEX_ROW, stats.since_col)?,
        recent_since_year: stats.since_year,
    };
    profile
        .validate()
        .map_err(|e| ParseError::malformed(selectors::STATS_TABLE, e.to_string()))?;
    Ok(profile)
}

struct StatsTable {
    all_col: usize,
    since_col: usize,
    since_year: Option<i32>,
    /// (row label, cell texts) for every body row.
    rows: Vec<(String, Vec<String>)>,
}

impl StatsTable {
    fn read(table: ElementRef<'_>) -> Result<Self, ParseError> {
        let headers: Vec<String> = table.select(&sel(selectors::STATS_HEADER_CELL)).map(element_text).collect();
        let all_col = headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(selectors::ALL_COLUMN))
            .ok_or_else(|| ParseError::malformed("statistics header", "no \"All\" column"))?;
        let since_col = headers
            .iter()
            .position(|h| h.starts_with(selectors::SINCE_COLUMN_PREFIX))
            .ok_or_else(|| ParseError::malformed("statistics header", "no \"Since YYYY\" column"))?;
        // An unreadable year is cosmetic; the metrics are still usable.
        let since_year = headers[since_col][selectors::SINCE_COLUMN_PREFIX.len()..]
            .trim()
            .parse::<i32>()
            .ok()
            .filter(|y| (1900..=2100).contains(y));

        let cell_sel = sel(selectors::STATS_CELL);
        let rows = table
            .select(&sel(selectors::STATS_ROW))
            .filter_map(|row| {
                let cells: Vec<String> = row.select(&cell_sel).map(element_text).collect();
                let label = cells.first()?.clone();
                Some((label, cells))
            })
            .collect();
        Ok(Self { all_col, since_col, since_year, rows })
    }

    fn cell(&self, label: &str, col: usize) -> Result<u64, ParseError> {
        let (_, cells) = self
            .rows
            .iter()
            .find(|(l, _)| l.eq_ignore_ascii_case(label))
            .ok_or_else(|| ParseError::malformed(format!("{label} row"), "row missing"))?;
        let text = cells
            .get(col)
            .ok_or_else(|| ParseError::malformed(format!("{label} row"), format!("no cell in column {col}")))?;
        parse_count(text).map_err(|e| ParseError::malformed(format!("{label} row, column {col}"), e.to_string()))
    }
}

/// Text content with runs of whitespace (including no-break spaces) collapsed.
fn element_text(el: ElementRef<'_>) -> String {
    let raw: String = el.text().collect();
    // Keep narrow no-break spaces: they are digit-group separators, not word breaks.
    raw.split(|c: char| c.is_whitespace() && c != '\u{202F}')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn sel(css: &str) -> Selector {
    Selector::parse(css).expect("selector table entries are valid CSS")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id() -> ScholarId {
        ScholarId::new("vAx7VsoAAAAJ").unwrap()
    }

    fn page(name: &str, since: &str, cells: [&str; 6]) -> String {
        format!(
            r#"<html><body><div id="gsc_prf_in">{name}</div>
<table id="gsc_rsb_st"><thead><tr><th></th><th>All</th><th>{since}</th></tr></thead><tbody>
<tr><td><a>Citations</a></td><td>{}</td><td>{}</td></tr>
<tr><td><a>h-index</a></td><td>{}</td><td>{}</td></tr>
<tr><td><a>i10-index</a></td><td>{}</td><td>{}</td></tr>
</tbody></table></body></html>"#,
            cells[0], cells[1], cells[2], cells[3], cells[4], cells[5]
        )
    }

    #[test]
    fn all_zero_profile() {
        let p = parse_profile(&page("Test Person", "Since 2020", ["0"; 6]), &id()).unwrap();
        assert_eq!(
            p,
            ResearcherProfile {
                scholar_id: id(),
                name: "Test Person".into(),
                citations_all: 0,
                citations_recent: 0,
                h_index_all: 0,
                h_index_recent: 0,
                i10_all: 0,
                i10_recent: 0,
                recent_since_year: Some(2020),
            }
        );
    }

    #[test]
    fn empty_document_is_blocked() {
        assert!(detect_block(""));
        assert!(matches!(parse_profile("", &id()), Err(ParseError::BlockedPage { .. })));
    }

    #[test]
    fn block_phrase_case_insensitive() {
        let html = page("X Y", "Since 2020", ["1", "1", "1", "1", "0", "0"]);
        assert!(!detect_block(&html));
        let blocked = html.replace("X Y", "Please prove you are NOT A ROBOT");
        assert!(detect_block(&blocked));
        assert!(detect_block("<p>Our systems have detected unusual traffic from your computer network</p>"));
    }

    #[test]
    fn custom_block_phrases() {
        let html = page("Captcha Required", "Since 2020", ["0"; 6]);
        assert!(!detect_block(&html));
        assert!(detect_block_with(&html, &["captcha required"]));
        assert!(matches!(
            parse_profile_with(&html, &id(), &["captcha"]),
            Err(ParseError::BlockedPage { .. })
        ));
    }

    #[test]
    fn missing_name_is_malformed() {
        let html = page("Test", "Since 2020", ["0"; 6]).replace("gsc_prf_in", "something_else");
        match parse_profile(&html, &id()) {
            Err(ParseError::MalformedProfile { element, .. }) => assert_eq!(element, "#gsc_prf_in"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_table_is_malformed() {
        let html = page("Test", "Since 2020", ["0"; 6]).replace("gsc_rsb_st", "other");
        match parse_profile(&html, &id()) {
            Err(ParseError::MalformedProfile { element, .. }) => assert_eq!(element, "#gsc_rsb_st"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_metric_cell_names_row() {
        let html = page("Test", "Since 2020", ["10", "5", "n/a", "2", "0", "0"]);
        match parse_profile(&html, &id()) {
            Err(ParseError::MalformedProfile { element, .. }) => assert!(element.starts_with("h-index"), "{element}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_since_column_is_malformed() {
        let html = page("Test", "Recent", ["0"; 6]);
        assert!(matches!(parse_profile(&html, &id()), Err(ParseError::MalformedProfile { .. })));
    }

    #[test]
    fn unreadable_year_keeps_metrics() {
        let p = parse_profile(&page("Test", "Since soon", ["3", "2", "1", "1", "0", "0"]), &id()).unwrap();
        assert_eq!(p.recent_since_year, None);
        assert_eq!(p.citations_all, 3);
        let p = parse_profile(&page("Test", "Since 1066", ["3", "2", "1", "1", "0", "0"]), &id()).unwrap();
        assert_eq!(p.recent_since_year, None);
    }

    #[test]
    fn recent_above_all_is_rejected() {
        let html = page("Test", "Since 2020", ["10", "11", "1", "1", "0", "0"]);
        assert!(matches!(parse_profile(&html, &id()), Err(ParseError::MalformedProfile { .. })));
    }

    #[test]
    fn h_index_above_citations_is_rejected() {
        let html = page("Test", "Since 2020", ["2", "2", "3", "1", "0", "0"]);
        assert!(matches!(parse_profile(&html, &id()), Err(ParseError::MalformedProfile { .. })));
    }

    #[test]
    fn deterministic() {
        let html = page("Test", "Since 2020", ["12,345", "1,000", "40", "20", "90", "30"]);
        assert_eq!(parse_profile(&html, &id()), parse_profile(&html, &id()));
    }
}
