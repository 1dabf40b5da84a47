use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

const MIN_LEN: usize = 10;
const MAX_LEN: usize = 16;

const CITATIONS_PATH: &str = "/citations";
const PROFILE_BASE: &str = "https://scholar.google.com/citations";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("invalid Scholar ID {0:?}: expected 10-16 characters from [A-Za-z0-9_-]")]
    InvalidId(String),
    #[error("profile URL {0:?} has no `user=` parameter")]
    MissingUserParam(String),
}

/// A Google Scholar profile identifier, the `user=` parameter of a
/// citations URL.
///
/// Comparison is byte-exact and case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ScholarId(String);

impl ScholarId {
    pub fn new(value: impl Into<String>) -> Result<Self, IdError> {
        let value = value.into();
        let len_ok = (MIN_LEN..=MAX_LEN).contains(&value.len());
        let chars_ok = value
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-');
        if len_ok && chars_ok {
            Ok(Self(value))
        } else {
            Err(IdError::InvalidId(value))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ScholarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for ScholarId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        extract_scholar_id(s)
    }
}

impl TryFrom<String> for ScholarId {
    type Error = IdError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<ScholarId> for String {
    fn from(id: ScholarId) -> Self {
        id.0
    }
}

impl AsRef<str> for ScholarId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Accepts either a bare ID or a Scholar citations URL and returns the
/// validated ID.
///
/// URLs copied without a scheme (`scholar.google.com/citations?user=...`)
/// are accepted too. A URL whose path is not `/citations` is treated as a
/// bare string and therefore rejected.
pub fn extract_scholar_id(input: &str) -> Result<ScholarId, IdError> {
    let input = input.trim();
    if let Some(url) = parse_citations_url(input) {
        let user = url
            .query_pairs()
            .find(|(k, _)| k == "user")
            .map(|(_, v)| v.into_owned());
        return match user {
            Some(user) => ScholarId::new(user),
            None => Err(IdError::MissingUserParam(input.to_string())),
        };
    }
    ScholarId::new(input)
}

fn parse_citations_url(input: &str) -> Option<Url> {
    let url = match Url::parse(input) {
        Ok(url) => url,
        Err(url::ParseError::RelativeUrlWithoutBase) if input.starts_with("scholar.google.") => {
            Url::parse(&format!("https://{input}")).ok()?
        }
        Err(_) => return None,
    };
    let is_http = matches!(url.scheme(), "http" | "https");
    (is_http && url.path().trim_end_matches('/') == CITATIONS_PATH).then_some(url)
}

/// The profile page URL for `id`, pinned to English so that the statistics
/// header and number formatting stay predictable.
pub fn profile_url(id: &ScholarId) -> String {
    // IDs are restricted to unreserved URL characters; no escaping needed.
    format!("{PROFILE_BASE}?user={id}&hl=en")
}
