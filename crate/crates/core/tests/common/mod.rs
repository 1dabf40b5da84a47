#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, TimeZone, Utc};
use scholar_tracker::cli::{run, Cli, Env};
use scholar_tracker::parser::ResearcherProfile;
use scholar_tracker::testing::{FakeClock, StubTransport};
use scholar_tracker::{profile_url, ScholarId, Snapshot};

use clap::Parser;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// (name, html, expected) for every profile fixture, sorted by name.
pub fn profile_fixtures() -> Vec<(String, String, ResearcherProfile)> {
    let dir = fixtures_dir().join("profiles");
    let mut names: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| {
            let name = e.unwrap().file_name().to_string_lossy().into_owned();
            name.strip_suffix(".html").map(str::to_string)
        })
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let html = fs::read_to_string(dir.join(format!("{name}.html"))).unwrap();
            let expected = fs::read_to_string(dir.join(format!("{name}.expected.json"))).unwrap();
            let expected: ResearcherProfile = serde_json::from_str(&expected).unwrap();
            (name, html, expected)
        })
        .collect()
}

pub fn block_page() -> String {
    fs::read_to_string(fixtures_dir().join("blocked/unusual_traffic.html")).unwrap()
}

pub fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 5, 1, 9, 0, 0).unwrap()
}

pub fn id(s: &str) -> ScholarId {
    ScholarId::new(s).unwrap()
}

/// A stub serving each profile fixture at its researcher's profile URL.
pub fn serving_fixtures(clock: &FakeClock) -> (StubTransport, Vec<ResearcherProfile>) {
    let stub = StubTransport::new().with_clock(clock.clone());
    let mut expected = Vec::new();
    for (_, html, profile) in profile_fixtures() {
        stub.serve(profile_url(&profile.scholar_id), html);
        expected.push(profile);
    }
    (stub, expected)
}

pub fn snapshot(id_str: &str, name: &str, citations: u64, at: DateTime<Utc>) -> Snapshot {
    Snapshot::new(
        ResearcherProfile {
            scholar_id: id(id_str),
            name: name.into(),
            citations_all: citations,
            citations_recent: citations / 3,
            h_index_all: citations.min(12),
            h_index_recent: citations.min(5),
            i10_all: citations / 50,
            i10_recent: citations / 100,
            recent_since_year: Some(2021),
        },
        at,
    )
}

/// A scratch directory holding `config.json` and a `store/` directory.
pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    pub fn config_path(&self) -> PathBuf {
        self.dir.path().join("config.json")
    }

    pub fn store_path(&self) -> PathBuf {
        self.dir.path().join("store")
    }

    pub fn write_config(&self, ids: &[&str]) {
        let body = serde_json::json!({ "scholar_ids": ids });
        fs::write(self.config_path(), body.to_string()).unwrap();
    }

    pub fn snapshots_bytes(&self) -> Vec<u8> {
        fs::read(self.store_path().join("snapshots.jsonl")).unwrap_or_default()
    }

    /// Runs the CLI with `args` (after the binary name) and returns
    /// (exit code, stdout, stderr).
    pub fn run(&self, args: &[&str], stub: &StubTransport, clock: &FakeClock) -> (i32, String, String) {
        let config = self.config_path();
        let store = self.store_path();
        let mut argv = vec![
            "scholar-tracker".to_string(),
            "--config".into(),
            config.to_string_lossy().into_owned(),
            "--store".into(),
            store.to_string_lossy().into_owned(),
        ];
        argv.extend(args.iter().map(|s| s.to_string()));
        let cli = Cli::try_parse_from(argv).expect("valid arguments");
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut env = Env { transport: stub, clock, stdout: &mut out, stderr: &mut err };
        let code = run(&cli, &mut env);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }
}
