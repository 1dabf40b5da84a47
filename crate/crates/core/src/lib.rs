//! Track Google Scholar citation metrics for a curated list of researchers.
//!
//! The crate is split along the life of a data point:
//!
//! - [`parser`] turns a profile page into a [`ResearcherProfile`] and normalizes
//!   profile URLs into [`ScholarId`]s.
//! - [`fetcher`] retrieves pages politely over an injectable [`Transport`].
//! - [`store`] keeps an append-only JSON Lines history of [`Snapshot`]s so that
//!   every command except `update` works offline.
//! - [`metrics`] ranks researchers and computes deltas and h-indices.
//! - [`config`] loads and edits the tracked-ID list and fetch policy.
//! - [`cli`] wires everything into the `scholar-tracker` commands.

pub mod cli;
pub mod config;
pub mod fetcher;
pub mod metrics;
pub mod parser;
pub mod store;
pub mod testing;

pub use config::TrackerConfig;
pub use fetcher::{Clock, FetchError, FetchPolicy, PageFetch, SystemClock, Transport};
pub use metrics::{compute_h_index, rank, CitationDelta, RankedRow};
pub use parser::{extract_scholar_id, parse_profile, profile_url, ResearcherProfile, ScholarId};
pub use store::{Snapshot, Store};
