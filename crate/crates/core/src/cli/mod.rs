//! The `scholar-tracker` command line.
//!
//! Exit codes: 0 success, 1 some profiles failed to update, 2 usage or
//! configuration error, 3 environmental failure (store unusable, I/O, or
//! every profile failed).

pub mod commands;
pub mod render;

use std::io::{self, Write};
use std::path::PathBuf;

use chrono::Duration;
use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::config::{self, ConfigError, CONFIG_ENV_VAR, DEFAULT_CONFIG_FILE};
use crate::fetcher::{Clock, Transport};
use crate::store::{Store, StoreError};

pub use commands::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ENVIRONMENT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "scholar-tracker", version, about = "Track Google Scholar citation counts for a list of researchers")]
pub struct Cli {
    /// Config file [default: $SCHOLAR_TRACKER_CONFIG, else ./config.json]
    #[arg(long, global = true, env = CONFIG_ENV_VAR, default_value = DEFAULT_CONFIG_FILE, hide_default_value = true, hide_env = true)]
    pub config: PathBuf,

    /// Snapshot store directory (overrides `store_path` from the config)
    #[arg(long, global = true)]
    pub store: Option<PathBuf>,

    /// Machine-readable JSON output
    #[arg(long, global = true)]
    pub json: bool,

    /// Break a store lock older than one hour
    #[arg(long, global = true)]
    pub force_unlock: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Track a researcher by Scholar ID or profile URL
    Add { id_or_url: String },
    /// Stop tracking a researcher
    Remove { id_or_url: String },
    /// Show tracked researchers with their last known counts
    List,
    /// Fetch fresh metrics for every tracked researcher
    Update,
    /// Rank tracked researchers by citations, from stored data
    Rank {
        /// Flag rows whose snapshot is older than this many days
        #[arg(long, default_value_t = DEFAULT_STALE_AFTER_DAYS)]
        stale_days: i64,
    },
    /// Show every stored snapshot of one researcher
    History { id_or_url: String },
    /// Dump the latest snapshot of every researcher
    Export {
        /// json or csv
        #[arg(long, default_value = "json")]
        format: String,
        /// Write to a file instead of stdout
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    UnknownFormat(#[from] UnknownFormat),
    #[error("{}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("writing output: {0}")]
    Stdout(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::IoDenied { .. }) => EXIT_ENVIRONMENT,
            CliError::Config(_) | CliError::UnknownFormat(_) => EXIT_USAGE,
            CliError::Store(_) | CliError::Output { .. } | CliError::Stdout(_) => EXIT_ENVIRONMENT,
        }
    }
}

/// Everything a command needs from the outside world.
pub struct Env<'a> {
    pub transport: &'a dyn Transport,
    pub clock: &'a dyn Clock,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli, env: &mut Env<'_>) -> i32 {
    match execute(cli, env) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(env.stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, env: &mut Env<'_>) -> Result<i32, CliError> {
    let (config, warnings) = config::load_config_with_warnings(&cli.config)?;
    for w in warnings {
        writeln!(env.stderr, "warning: {w}")?;
    }
    let store_root = cli.store.clone().unwrap_or_else(|| config.store_path.clone());
    let open_read_only = |stderr: &mut dyn Write| -> Result<Store, CliError> {
        let store = Store::open_read_only(&store_root)?;
        for w in store.warnings() {
            writeln!(stderr, "warning: {w}")?;
        }
        Ok(store)
    };

    match &cli.command {
        Command::Add { id_or_url } => {
            let (next, id) = cmd_add(&cli.config, &config, id_or_url)?;
            if cli.json {
                emit_json(env, &serde_json::json!({ "added": id, "tracked": next.scholar_ids.len() }))?;
            } else {
                writeln!(env.stdout, "added {id} (tracking {})", next.scholar_ids.len())?;
            }
            Ok(EXIT_OK)
        }
        Command::Remove { id_or_url } => {
            let (next, id) = cmd_remove(&cli.config, &config, id_or_url)?;
            if cli.json {
                emit_json(env, &serde_json::json!({ "removed": id, "tracked": next.scholar_ids.len() }))?;
            } else {
                writeln!(env.stdout, "removed {id} (tracking {})", next.scholar_ids.len())?;
            }
            Ok(EXIT_OK)
        }
        Command::List => {
            let store = open_read_only(env.stderr)?;
            let entries = cmd_list(&config, &store);
            if cli.json {
                emit_json(env, &entries)?;
            } else {
                write!(env.stdout, "{}", render::list_text(&entries))?;
            }
            Ok(EXIT_OK)
        }
        Command::Update => {
            let mut store = Store::open_with(&store_root, cli.force_unlock)?;
            for w in store.warnings() {
                writeln!(env.stderr, "warning: {w}")?;
            }
            let total = config.scholar_ids.len();
            let stderr = &mut *env.stderr;
            let report = cmd_update(&config, &mut store, env.transport, env.clock, |i, entry| {
                let _ = writeln!(stderr, "[{}/{total}] {}", i + 1, render::update_entry_line(entry));
            })?;
            if cli.json {
                emit_json(env, &report)?;
            } else {
                write!(env.stdout, "{}", render::update_text(&report))?;
            }
            Ok(report.exit_code())
        }
        Command::Rank { stale_days } => {
            let store = open_read_only(env.stderr)?;
            let view = cmd_rank(&config, &store, env.clock.now(), Duration::days(*stale_days));
            if cli.json {
                emit_json(env, &render::rank_json(&view))?;
            } else {
                write!(env.stdout, "{}", render::rank_text(&view))?;
            }
            Ok(EXIT_OK)
        }
        Command::History { id_or_url } => {
            let store = open_read_only(env.stderr)?;
            let view = cmd_history(&config, &store, id_or_url)?;
            if cli.json {
                emit_json(env, &render::history_json(&view))?;
            } else {
                write!(env.stdout, "{}", render::history_text(&view))?;
            }
            Ok(EXIT_OK)
        }
        Command::Export { format, output } => {
            let format: ExportFormat = format.parse()?;
            let store = open_read_only(env.stderr)?;
            let data = cmd_export(&store, format);
            match output {
                Some(path) => {
                    std::fs::write(path, data).map_err(|source| CliError::Output { path: path.clone(), source })?
                }
                None => env.stdout.write_all(data.as_bytes())?,
            }
            Ok(EXIT_OK)
        }
    }
}

fn emit_json<T: serde::Serialize + ?Sized>(env: &mut Env<'_>, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *env.stdout, value).map_err(io::Error::from)?;
    writeln!(env.stdout)?;
    Ok(())
}
