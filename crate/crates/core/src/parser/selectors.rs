//! Every page marker the parser relies on lives here, so a Scholar redesign
//! is a one-file change. The fixture corpus under `fixtures/profiles` is the
//! contract these values must satisfy.

/// Element holding the researcher's display name.
pub const PROFILE_NAME: &str = "#gsc_prf_in";

/// The "Cited by" statistics table.
pub const STATS_TABLE: &str = "#gsc_rsb_st";

/// Column headers of the statistics table (blank, `All`, `Since YYYY`).
pub const STATS_HEADER_CELL: &str = "th";

pub const STATS_ROW: &str = "tr";

pub const STATS_CELL: &str = "td";

/// Header text of the all-time column.
pub const ALL_COLUMN: &str = "All";

/// Header prefix of the recent-window column; the year follows it.
pub const SINCE_COLUMN_PREFIX: &str = "Since";

/// Row labels, matched case-insensitively against the first cell of a row.
pub const CITATIONS_ROW: &str = "Citations";
pub const H_INDEX_ROW: &str = "h-index";
pub const I10_INDEX_ROW: &str = "i10-index";

/// Phrases that mark an interstitial "are you a robot" page. Matched
/// case-insensitively anywhere in the document.
pub const DEFAULT_BLOCK_PHRASES: &[&str] = &["unusual traffic", "not a robot"];
