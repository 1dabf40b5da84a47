use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use crate::parser::{ProfileInvariantError, ResearcherProfile, ScholarId};

/// A parsed profile stamped with the time its page was fetched.
///
/// Serialized as one flat JSON object: the profile fields plus
/// `fetched_at` (`YYYY-MM-DDThh:mm:ssZ`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    #[serde(flatten)]
    pub profile: ResearcherProfile,
    #[serde(with = "utc_seconds")]
    pub fetched_at: DateTime<Utc>,
}

impl Snapshot {
    /// Sub-second precision is dropped so the stored form roundtrips exactly.
    pub fn new(profile: ResearcherProfile, fetched_at: DateTime<Utc>) -> Self {
        Self { profile, fetched_at: fetched_at.trunc_subsecs(0) }
    }

    pub fn scholar_id(&self) -> &ScholarId {
        &self.profile.scholar_id
    }

    pub fn validate(&self) -> Result<(), ProfileInvariantError> {
        self.profile.validate()
    }
}

/// Serde helpers for `YYYY-MM-DDThh:mm:ssZ` timestamps.
pub mod utc_seconds {
    use chrono::{DateTime, NaiveDateTime, Utc};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub const FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

    pub fn format(t: &DateTime<Utc>) -> String {
        t.format(FORMAT).to_string()
    }

    pub fn parse(s: &str) -> Result<DateTime<Utc>, chrono::ParseError> {
        NaiveDateTime::parse_from_str(s, FORMAT).map(|n| n.and_utc())
    }

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        parse(&raw).map_err(|e| de::Error::custom(format!("bad timestamp {raw:?}: {e}")))
    }

    pub mod option {
        use chrono::{DateTime, Utc};
        use serde::Serializer;

        pub fn serialize<S: Serializer>(t: &Option<DateTime<Utc>>, s: S) -> Result<S::Ok, S::Error> {
            match t {
                Some(t) => super::serialize(t, s),
                None => s.serialize_none(),
            }
        }
    }
}
