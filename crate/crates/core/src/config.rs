//! Settings shared by the command line and the service.
//!
//! Read from a TOML file; every key is optional:
//!
//! ```toml
//! store = "ensemble.db"
//! data_dir = "data"
//! bind = "127.0.0.1:8080"
//! ensemble_config = "ensemble.toml"
//! log = "info"
//! sync_threshold = 10000
//! jobs = 4
//! ```
//!
//! Command-line flags win over environment variables (`ENSEL_STORE`,
//! `ENSEL_BIND`), which win over the file, which wins over the defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
/// Runs of at most this many records complete within the request.
pub const DEFAULT_SYNC_THRESHOLD: usize = 10_000;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub store: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub bind: String,
    pub ensemble_config: Option<PathBuf>,
    pub log: String,
    pub sync_threshold: usize,
    /// Post-processing workers; 0 means one per core.
    pub jobs: usize,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            store: None,
            data_dir: None,
            bind: DEFAULT_BIND.into(),
            ensemble_config: None,
            log: "warn".into(),
            sync_threshold: DEFAULT_SYNC_THRESHOLD,
            jobs: 0,
        }
    }
}

impl CliConfig {
    /// Parse a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        let mut config: CliConfig = toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.into(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut config.store, &mut config.data_dir, &mut config.ensemble_config]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        config.check()?;
        Ok(config)
    }

    /// The file at `path` if given, otherwise the defaults.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        path.map_or_else(|| Ok(Self::default()), Self::from_file)
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.bind.parse::<std::net::SocketAddr>().is_err() {
            return Err(ConfigError::Invalid(format!(
                "bind: `{}` is not a socket address",
                self.bind
            )));
        }
        Ok(())
    }

    pub fn workers(&self) -> usize {
        if self.jobs > 0 {
            self.jobs
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }
}
