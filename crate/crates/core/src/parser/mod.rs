//! Profile page parsing and Scholar ID normalization.

mod count;
mod id;
mod profile;
pub mod selectors;

pub use count::{parse_count, NotANumber};
pub use id::{extract_scholar_id, profile_url, IdError, ScholarId};
pub use profile::{detect_block, detect_block_with, parse_profile, ParseError, ProfileInvariantError, ResearcherProfile};
