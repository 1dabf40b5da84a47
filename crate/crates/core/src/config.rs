//! The tracked-researcher list and fetch policy, stored as `config.json`.
//!
//! ```json
//! {
//!   "scholar_ids": ["vAx7VsoAAAAJ"],
//!   "rate_limit_ms": 2000,
//!   "timeout_ms": 10000,
//!   "max_retries": 2,
//!   "backoff_base_ms": 500,
//!   "user_agent": "scholar-tracker/0.1.0 (+...)",
//!   "store_path": "./scholar-store"
//! }
//! ```
//!
//! Every key is optional. Unknown keys are reported as warnings.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::fetcher::FetchPolicy;
use crate::parser::{extract_scholar_id, IdError, ScholarId};

pub const DEFAULT_CONFIG_FILE: &str = "config.json";
pub const DEFAULT_STORE_PATH: &str = "./scholar-store";
pub const CONFIG_ENV_VAR: &str = "SCHOLAR_TRACKER_CONFIG";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackerConfig {
    /// In the user's curation order, without duplicates.
    pub scholar_ids: Vec<ScholarId>,
    pub policy: FetchPolicy,
    pub store_path: PathBuf,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self { scholar_ids: Vec::new(), policy: FetchPolicy::default(), store_path: PathBuf::from(DEFAULT_STORE_PATH) }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}:{line}:{column}: {message}", path.display())]
    ConfigSyntax { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{}: invalid `{key}`: {message}", path.display())]
    ConfigInvalid { path: PathBuf, key: String, message: String },
    #[error("{}: {source}", path.display())]
    IoDenied {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    InvalidId(#[from] IdError),
    #[error("{0} is already tracked")]
    AlreadyTracked(ScholarId),
    #[error("{0} is not tracked")]
    NotTracked(ScholarId),
}

pub fn load_config(path: impl AsRef<Path>) -> Result<TrackerConfig, ConfigError> {
    load_config_with_warnings(path).map(|(config, _)| config)
}

/// Loads `path`, also returning one warning per unrecognized key.
pub fn load_config_with_warnings(path: impl AsRef<Path>) -> Result<(TrackerConfig, Vec<String>), ConfigError> {
    let path = path.as_ref();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok((TrackerConfig::default(), Vec::new())),
        Err(e) => return Err(ConfigError::IoDenied { path: path.to_path_buf(), source: e }),
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| ConfigError::ConfigSyntax {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    from_value(path, value)
}

fn from_value(path: &Path, value: Value) -> Result<(TrackerConfig, Vec<String>), ConfigError> {
    let invalid = |key: &str, message: String| ConfigError::ConfigInvalid {
        path: path.to_path_buf(),
        key: key.to_string(),
        message,
    };
    let Value::Object(mut map) = value else {
        return Err(invalid("(root)", "expected a JSON object".into()));
    };

    let mut config = TrackerConfig::default();

    if let Some(ids) = map.remove("scholar_ids") {
        let Value::Array(items) = ids else {
            return Err(invalid("scholar_ids", "expected an array of strings".into()));
        };
        let mut seen = HashSet::new();
        for (i, item) in items.into_iter().enumerate() {
            let key = format!("scholar_ids[{i}]");
            let raw = item.as_str().ok_or_else(|| invalid(&key, "expected a string".into()))?;
            let id = extract_scholar_id(raw).map_err(|e| invalid(&key, e.to_string()))?;
            if !seen.insert(id.clone()) {
                return Err(invalid(&key, format!("duplicate ID {id}")));
            }
            config.scholar_ids.push(id);
        }
    }

    let policy = &mut config.policy;
    if let Some(v) = take_u64(&mut map, "rate_limit_ms").map_err(|m| invalid("rate_limit_ms", m))? {
        policy.rate_limit_ms = v;
    }
    if let Some(v) = take_u64(&mut map, "timeout_ms").map_err(|m| invalid("timeout_ms", m))? {
        policy.timeout_ms = v;
    }
    if let Some(v) = take_u64(&mut map, "max_retries").map_err(|m| invalid("max_retries", m))? {
        policy.max_retries = u32::try_from(v).map_err(|_| invalid("max_retries", "too large".into()))?;
    }
    if let Some(v) = take_u64(&mut map, "backoff_base_ms").map_err(|m| invalid("backoff_base_ms", m))? {
        policy.backoff_base_ms = v;
    }
    if let Some(v) = take_u64(&mut map, "block_breaker").map_err(|m| invalid("block_breaker", m))? {
        policy.block_breaker = u32::try_from(v).map_err(|_| invalid("block_breaker", "too large".into()))?;
    }
    if let Some(v) = take_string(&mut map, "user_agent").map_err(|m| invalid("user_agent", m))? {
        policy.user_agent = v;
    }
    if let Some(v) = take_string(&mut map, "store_path").map_err(|m| invalid("store_path", m))? {
        if v.is_empty() {
            return Err(invalid("store_path", "must not be empty".into()));
        }
        config.store_path = PathBuf::from(v);
    }
    config.policy.validate().map_err(|e| invalid(e.key, e.reason.into()))?;

    let warnings = map
        .keys()
        .map(|k| {
            let msg = format!("{}: ignoring unknown key `{k}`", path.display());
            log::warn!("{msg}");
            msg
        })
        .collect();
    Ok((config, warnings))
}

fn take_u64(map: &mut Map<String, Value>, key: &str) -> Result<Option<u64>, String> {
    match map.remove(key) {
        None => Ok(None),
        Some(v) => v.as_u64().map(Some).ok_or_else(|| format!("expected a non-negative integer, got {v}")),
    }
}

fn take_string(map: &mut Map<String, Value>, key: &str) -> Result<Option<String>, String> {
    match map.remove(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(v) => Err(format!("expected a string, got {v}")),
    }
}

#[derive(Serialize)]
struct ConfigFile<'a> {
    scholar_ids: &'a [ScholarId],
    rate_limit_ms: u64,
    timeout_ms: u64,
    max_retries: u32,
    backoff_base_ms: u64,
    block_breaker: u32,
    user_agent: &'a str,
    store_path: String,
}

fn render(config: &TrackerConfig) -> Vec<u8> {
    let file = ConfigFile {
        scholar_ids: &config.scholar_ids,
        rate_limit_ms: config.policy.rate_limit_ms,
        timeout_ms: config.policy.timeout_ms,
        max_retries: config.policy.max_retries,
        backoff_base_ms: config.policy.backoff_base_ms,
        block_breaker: config.policy.block_breaker,
        user_agent: &config.policy.user_agent,
        store_path: config.store_path.to_string_lossy().into_owned(),
    };
    let mut out = serde_json::to_vec_pretty(&file).expect("config serializes");
    out.push(b'\n');
    out
}

/// Writes `config` to a sibling temp file and renames it over `path`.
pub fn save_config(path: impl AsRef<Path>, config: &TrackerConfig) -> Result<(), ConfigError> {
    save_config_with(path.as_ref(), config, |file, bytes| file.write_all(bytes))
}

pub(crate) fn save_config_with<W>(path: &Path, config: &TrackerConfig, write: W) -> Result<(), ConfigError>
where
    W: FnOnce(&mut File, &[u8]) -> io::Result<()>,
{
    let io_err = |source| ConfigError::IoDenied { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let file_name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{file_name}.tmp-{}", std::process::id()));

    let result = (|| {
        let mut file = File::create(&tmp)?;
        write(&mut file, &render(config))?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(e));
    }
    Ok(())
}

/// Returns a copy of `config` with the ID (bare or profile URL) appended.
pub fn add_id(config: &TrackerConfig, raw: &str) -> Result<TrackerConfig, ConfigError> {
    let id = extract_scholar_id(raw)?;
    if config.scholar_ids.contains(&id) {
        return Err(ConfigError::AlreadyTracked(id));
    }
    let mut next = config.clone();
    next.scholar_ids.push(id);
    Ok(next)
}

pub fn remove_id(config: &TrackerConfig, id: &ScholarId) -> Result<TrackerConfig, ConfigError> {
    let pos = config
        .scholar_ids
        .iter()
        .position(|i| i == id)
        .ok_or_else(|| ConfigError::NotTracked(id.clone()))?;
    let mut next = config.clone();
    next.scholar_ids.remove(pos);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EXAMPLE: &str = "vAx7VsoAAAAJ";

    fn id(s: &str) -> ScholarId {
        ScholarId::new(s).unwrap()
    }

    #[test]
    fn missing_file_is_default() {
        let dir = tempfile::tempdir().unwrap();
        let config = load_config(dir.path().join("config.json")).unwrap();
        assert_eq!(config, TrackerConfig::default());
        assert!(config.scholar_ids.is_empty());
        assert_eq!(config.policy.rate_limit_ms, 2000);
        assert_eq!(config.policy.timeout_ms, 10_000);
        assert_eq!(config.policy.max_retries, 2);
        assert_eq!(config.policy.backoff_base_ms, 500);
        assert_eq!(config.store_path, PathBuf::from("./scholar-store"));
    }

    #[test]
    fn single_id_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        fs::write(&path, r#"{"scholar_ids": ["vAx7VsoAAAAJ"]}"#).unwrap();
        let config = load_config(&path).unwrap();
        assert_eq!(config.scholar_ids, vec![id(EXAMPLE)]);
        assert_eq!(config.policy, FetchPolicy::default());
    }

    #[test]
    fn duplicate_id_is_invalid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        fs::write(&path, r#"{"scholar_ids": ["vAx7VsoAAAAJ", "vAx7VsoAAAAJ"]}"#).unwrap();
        match load_config(&path) {
            Err(ConfigError::ConfigInvalid { key, message, .. }) => {
                assert_eq!(key, "scholar_ids[1]");
                assert!(message.contains(EXAMPLE));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        fs::write(&path, "{\n  \"scholar_ids\": [,]\n}").unwrap();
        match load_config(&path) {
            Err(ConfigError::ConfigSyntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_values_name_their_key() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        for (body, key) in [
            (r#"{"timeout_ms": 0}"#, "timeout_ms"),
            (r#"{"rate_limit_ms": -1}"#, "rate_limit_ms"),
            (r#"{"max_retries": "two"}"#, "max_retries"),
            (r#"{"backoff_base_ms": 0}"#, "backoff_base_ms"),
            (r#"{"user_agent": ""}"#, "user_agent"),
            (r#"{"store_path": 3}"#, "store_path"),
            (r#"{"scholar_ids": ["bad id"]}"#, "scholar_ids[0]"),
            (r#"{"scholar_ids": "vAx7VsoAAAAJ"}"#, "scholar_ids"),
            (r#"[]"#, "(root)"),
        ] {
            fs::write(&path, body).unwrap();
            match load_config(&path) {
                Err(ConfigError::ConfigInvalid { key: k, .. }) => assert_eq!(k, key, "{body}"),
                other => panic!("{body}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn unknown_keys_warn() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        fs::write(&path, r#"{"scholarIds": [], "theme": "dark"}"#).unwrap();
        let (config, warnings) = load_config_with_warnings(&path).unwrap();
        assert_eq!(config, TrackerConfig::default());
        assert_eq!(warnings.len(), 2);
        assert!(warnings.iter().any(|w| w.contains("scholarIds")));
    }

    #[test]
    fn url_entries_are_normalized() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        fs::write(&path, r#"{"scholar_ids": ["https://scholar.google.com/citations?user=vAx7VsoAAAAJ"]}"#).unwrap();
        assert_eq!(load_config(&path).unwrap().scholar_ids, vec![id(EXAMPLE)]);
    }

    #[test]
    fn default_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        save_config(&path, &TrackerConfig::default()).unwrap();
        assert_eq!(load_config(&path).unwrap(), TrackerConfig::default());
    }

    #[test]
    fn failed_write_keeps_previous_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        let original = add_id(&TrackerConfig::default(), EXAMPLE).unwrap();
        save_config(&path, &original).unwrap();
        let before = fs::read(&path).unwrap();

        let changed = remove_id(&original, &id(EXAMPLE)).unwrap();
        let err = save_config_with(&path, &changed, |file, bytes| {
            file.write_all(&bytes[..bytes.len() / 2])?;
            Err(io::Error::other("disk full"))
        })
        .unwrap_err();
        assert!(matches!(err, ConfigError::IoDenied { .. }));
        assert_eq!(fs::read(&path).unwrap(), before);
        let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn add_examples() {
        let empty = TrackerConfig::default();
        let by_id = add_id(&empty, EXAMPLE).unwrap();
        assert_eq!(by_id.scholar_ids, vec![id(EXAMPLE)]);
        let by_url = add_id(&empty, "https://scholar.google.com/citations?user=vAx7VsoAAAAJ").unwrap();
        assert_eq!(by_url, by_id);
        assert!(empty.scholar_ids.is_empty());
        assert!(matches!(add_id(&by_id, EXAMPLE), Err(ConfigError::AlreadyTracked(_))));
        assert!(matches!(add_id(&empty, "nope!"), Err(ConfigError::InvalidId(_))));
    }

    #[test]
    fn remove_examples() {
        let one = add_id(&TrackerConfig::default(), EXAMPLE).unwrap();
        assert!(remove_id(&one, &id(EXAMPLE)).unwrap().scholar_ids.is_empty());

        let three = ["aaaaaaaaaaAJ", "bbbbbbbbbbAJ", "ccccccccccAJ"]
            .iter()
            .try_fold(TrackerConfig::default(), |c, raw| add_id(&c, raw))
            .unwrap();
        let two = remove_id(&three, &id("bbbbbbbbbbAJ")).unwrap();
        assert_eq!(two.scholar_ids, vec![id("aaaaaaaaaaAJ"), id("ccccccccccAJ")]);
        assert!(matches!(remove_id(&two, &id("bbbbbbbbbbAJ")), Err(ConfigError::NotTracked(_))));
    }

    fn arb_config() -> impl Strategy<Value = TrackerConfig> {
        (
            prop::collection::btree_set("[A-Za-z0-9_-]{10,16}", 0..8)
                .prop_map(|set| set.into_iter().map(|s| ScholarId::new(s).unwrap()).collect::<Vec<_>>())
                .prop_shuffle(),
            0u64..10_000,
            1u64..60_000,
            0u32..10,
            1u64..5000,
            0u32..6,
            "[ -~]{1,40}".prop_filter("non-blank", |s| !s.trim().is_empty()),
            "[a-z0-9_./-]{1,20}",
        )
            .prop_map(|(ids, rate, timeout, retries, backoff, breaker, ua, store)| TrackerConfig {
                scholar_ids: ids,
                policy: FetchPolicy {
                    rate_limit_ms: rate,
                    timeout_ms: timeout,
                    max_retries: retries,
                    backoff_base_ms: backoff,
                    user_agent: ua,
                    block_breaker: breaker,
                },
                store_path: PathBuf::from(store),
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn save_load_roundtrip(config in arb_config()) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("config.json");
            save_config(&path, &config).unwrap();
            prop_assert_eq!(load_config(&path).unwrap(), config);
        }

        #[test]
        fn add_then_remove_is_identity(config in arb_config(), fresh in "[A-Za-z0-9_-]{10,16}") {
            let fresh_id = ScholarId::new(fresh.clone()).unwrap();
            prop_assume!(!config.scholar_ids.contains(&fresh_id));
            let added = add_id(&config, &fresh).unwrap();
            prop_assert_eq!(added.scholar_ids.last(), Some(&fresh_id));
            prop_assert_eq!(remove_id(&added, &fresh_id).unwrap(), config);
        }
    }
}
