//! Configuration file loading.
//!
//! The file is TOML with `backend`, `decoding`, `lexicon`, `corpus`,
//! `experiment` and `output` sections. Any key can be overridden from the
//! environment as `SDEA_<SECTION>_<KEY>`, e.g. `SDEA_BACKEND_URL` or
//! `SDEA_DECODING_TOP_P`. Relative paths resolve against the directory
//! holding the config file.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use sdea_core::generation::{
    Backend, DecodingParams, FixtureBackend, RemoteBackend, RemoteConfig, DEFAULT_EOS_MARKER,
};
use sdea_core::reranker::Protocol;
use sdea_core::{Lexicon, SdLevel};
use serde::{Deserialize, Serialize};

use crate::experiment::NotFoundPolicy;

pub const ENV_PREFIX: &str = "SDEA_";
const SECTIONS: [&str; 6] = ["backend", "decoding", "lexicon", "corpus", "experiment", "output"];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub backend: BackendSection,
    #[serde(default)]
    pub decoding: DecodingSection,
    #[serde(default)]
    pub lexicon: LexiconSection,
    #[serde(default)]
    pub corpus: Option<CorpusSection>,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Exactly one of `fixture` or `url` must be set.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendSection {
    #[serde(default)]
    pub fixture: Option<PathBuf>,
    #[serde(default)]
    pub url: Option<String>,
    #[serde(default = "default_endpoint")]
    pub endpoint: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_parallelism")]
    pub max_in_flight: usize,
    #[serde(default = "default_eos")]
    pub eos_marker: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodingSection {
    #[serde(default = "default_top_p")]
    pub top_p: f64,
    #[serde(default = "default_sequence_length")]
    pub sequence_length: u32,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconSection {
    /// Bundled lexicon when unset.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormat {
    /// One dialog per line, `__eou__` between turns.
    Dailydialog,
    /// One turn per line, blank line between conversations.
    Linewise,
    /// Already extracted prompt JSON Lines.
    Prompts,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub path: PathBuf,
    pub format: CorpusFormat,
    #[serde(default)]
    pub dataset_id: Option<String>,
    #[serde(default = "default_min_tokens")]
    pub min_tokens: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "default_target")]
    pub target: SdLevel,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub not_found: NotFoundPolicy,
    #[serde(default)]
    pub protocol: Protocol,
    #[serde(default)]
    pub yates: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// JSON report.
    #[serde(default)]
    pub report: Option<PathBuf>,
    /// Rendered text table.
    #[serde(default)]
    pub table: Option<PathBuf>,
    /// Per-prompt records as CSV.
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

fn default_endpoint() -> String {
    RemoteConfig::DEFAULT_ENDPOINT_PATH.to_string()
}
fn default_timeout() -> f64 {
    RemoteConfig::DEFAULT_TIMEOUT.as_secs_f64()
}
fn default_parallelism() -> usize {
    4
}
fn default_eos() -> String {
    DEFAULT_EOS_MARKER.to_string()
}
fn default_top_p() -> f64 {
    DecodingParams::DEFAULT_TOP_P
}
fn default_sequence_length() -> u32 {
    DecodingParams::DEFAULT_SEQUENCE_LENGTH
}
fn default_temperature() -> f64 {
    DecodingParams::DEFAULT_TEMPERATURE
}
fn default_min_tokens() -> usize {
    sdea_core::corpus::DEFAULT_MIN_TOKENS
}
fn default_target() -> SdLevel {
    SdLevel::Medium
}

impl Default for DecodingSection {
    fn default() -> Self {
        Self {
            top_p: default_top_p(),
            sequence_length: default_sequence_length(),
            temperature: default_temperature(),
            seed: None,
        }
    }
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            target: default_target(),
            parallelism: default_parallelism(),
            not_found: NotFoundPolicy::default(),
            protocol: Protocol::default(),
            yates: false,
        }
    }
}

impl Config {
    /// Reads `path` and applies overrides from the process environment.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let content = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&content, base, std::env::vars())
    }

    pub fn parse(
        content: &str,
        base_dir: &Path,
        env: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, ConfigError> {
        let mut table: toml::Table =
            toml::from_str(content).map_err(|e| ConfigError::Parse(e.to_string()))?;
        apply_env(&mut table, env)?;
        let mut config: Config = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        config.resolve_paths(base_dir);
        config.check_common()?;
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.backend.fixture.as_mut() {
            fix(p);
        }
        if let Some(p) = self.lexicon.path.as_mut() {
            fix(p);
        }
        if let Some(c) = self.corpus.as_mut() {
            fix(&mut c.path);
        }
        for p in [
            self.output.report.as_mut(),
            self.output.table.as_mut(),
            self.output.csv.as_mut(),
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    fn check_common(&self) -> Result<(), ConfigError> {
        match (&self.backend.fixture, &self.backend.url) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::Invalid(
                    "backend: set either fixture or url, not both".into(),
                ))
            }
            (None, None) => {
                return Err(ConfigError::Invalid("backend: fixture or url is required".into()))
            }
            _ => {}
        }
        if self.backend.eos_marker.is_empty() {
            return Err(ConfigError::Invalid("backend.eos_marker is empty".into()));
        }
        if !(self.backend.timeout_secs > 0.0 && self.backend.timeout_secs.is_finite()) {
            return Err(ConfigError::Invalid("backend.timeout_secs must be positive".into()));
        }
        if self.backend.max_in_flight == 0 || self.experiment.parallelism == 0 {
            return Err(ConfigError::Invalid(
                "max_in_flight and parallelism must be at least 1".into(),
            ));
        }
        self.decoding_params()?;
        if let Some(p) = &self.backend.fixture {
            readable(p)?;
        }
        if let Some(p) = &self.lexicon.path {
            readable(p)?;
        }
        Ok(())
    }

    /// Checks what `run_experiment` needs beyond the common sections.
    pub fn check_experiment(&self) -> Result<&CorpusSection, ConfigError> {
        let corpus = self
            .corpus
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("corpus section is required".into()))?;
        readable(&corpus.path)?;
        if corpus.min_tokens == 0 {
            return Err(ConfigError::Invalid("corpus.min_tokens must be at least 1".into()));
        }
        Ok(corpus)
    }

    pub fn decoding_params(&self) -> Result<DecodingParams, ConfigError> {
        let d = &self.decoding;
        DecodingParams::new(d.top_p, d.sequence_length, d.temperature, d.seed)
            .map_err(|e| ConfigError::Invalid(format!("decoding: {e}")))
    }

    pub fn load_lexicon(&self) -> Result<Lexicon, ConfigError> {
        match &self.lexicon.path {
            None => Ok(Lexicon::default_lexicon()),
            Some(path) => load_lexicon_file(path),
        }
    }

    pub fn build_backend(&self) -> Result<Arc<dyn Backend>, ConfigError> {
        build_backend(&self.backend)
    }

    pub fn dataset_id(&self) -> String {
        match &self.corpus {
            Some(CorpusSection {
                dataset_id: Some(id),
                ..
            }) => id.clone(),
            Some(c) => c
                .path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "corpus".into()),
            None => "corpus".into(),
        }
    }

    /// JSON snapshot of the resolved configuration, embedded in reports.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

pub fn build_backend(section: &BackendSection) -> Result<Arc<dyn Backend>, ConfigError> {
    if let Some(path) = &section.fixture {
        let backend = FixtureBackend::from_path(path, section.eos_marker.as_str())
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        return Ok(Arc::new(backend));
    }
    let url = section
        .url
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid("backend: fixture or url is required".into()))?;
    let remote = RemoteConfig {
        base_url: url.clone(),
        endpoint_path: section.endpoint.clone(),
        timeout: Duration::from_secs_f64(section.timeout_secs),
        max_in_flight: section.max_in_flight,
        eos_marker: section.eos_marker.clone(),
    };
    let backend = RemoteBackend::new(remote).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(Arc::new(backend))
}

pub fn load_lexicon_file(path: &Path) -> Result<Lexicon, ConfigError> {
    let content = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Lexicon::from_source(&content)
        .map_err(|e| ConfigError::Invalid(format!("lexicon {}: {e}", path.display())))
}

fn readable(path: &Path) -> Result<(), ConfigError> {
    std::fs::File::open(path)
        .map(drop)
        .map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn apply_env(
    table: &mut toml::Table,
    env: impl IntoIterator<Item = (String, String)>,
) -> Result<(), ConfigError> {
    let mut vars: Vec<(String, String)> = env
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    vars.sort();
    for (var, raw) in vars {
        let rest = var[ENV_PREFIX.len()..].to_ascii_lowercase();
        let Some((section, key)) = rest.split_once('_') else {
            continue;
        };
        if !SECTIONS.contains(&section) || key.is_empty() {
            continue;
        }
        let value = parse_env_value(&raw);
        let entry = table
            .entry(section.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        match entry {
            toml::Value::Table(t) => {
                t.insert(key.to_string(), value);
            }
            _ => return Err(ConfigError::Invalid(format!("{var}: {section} is not a section"))),
        }
    }
    Ok(())
}

/// TOML scalar when `raw` parses as one (number, bool), a string otherwise.
fn parse_env_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .filter(|v| !v.is_table() && !v.is_array())
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
