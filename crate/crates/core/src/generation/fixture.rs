use std::collections::HashMap;
use std::path::Path;

use async_trait::async_trait;
use serde::Deserialize;

use super::{Backend, GenerationError, GenerationRequest, RawSequence};

#[derive(Debug, thiserror::Error)]
pub enum FixtureLoadError {
    #[error("reading fixture {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("fixture line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("fixture line {line}: duplicate prompt {prompt:?}")]
    Duplicate { line: usize, prompt: String },
}

#[derive(Deserialize)]
struct FixtureRecord {
    prompt: String,
    sequence: String,
}

/// Replays stored sequences keyed by prompt.
///
/// Accepts either a single JSON object mapping prompt to sequence, or JSON
/// Lines with `{"prompt": .., "sequence": ..}` records. Prompts are matched
/// after trimming surrounding whitespace.
#[derive(Debug, Clone)]
pub struct FixtureBackend {
    id: String,
    eos_marker: String,
    sequences: HashMap<String, String>,
}

impl FixtureBackend {
    pub fn new(
        id: impl Into<String>,
        eos_marker: impl Into<String>,
        sequences: impl IntoIterator<Item = (String, String)>,
    ) -> Self {
        let eos_marker = eos_marker.into();
        assert!(!eos_marker.is_empty(), "eos marker must be non-empty");
        Self {
            id: id.into(),
            eos_marker,
            sequences: sequences
                .into_iter()
                .map(|(k, v)| (k.trim().to_string(), v))
                .collect(),
        }
    }

    pub fn from_content(
        id: impl Into<String>,
        eos_marker: impl Into<String>,
        content: &str,
    ) -> Result<Self, FixtureLoadError> {
        let trimmed = content.trim_start();
        let mut sequences: HashMap<String, String> = HashMap::new();
        // A JSON object spanning the whole file, as opposed to JSON Lines.
        let whole: Option<serde_json::Map<String, serde_json::Value>> = if trimmed.starts_with('{') {
            serde_json::from_str(trimmed).ok()
        } else {
            None
        };
        if let Some(map) = whole.filter(|m| !looks_like_record(m)) {
            for (prompt, value) in map {
                let Some(sequence) = value.as_str() else {
                    return Err(FixtureLoadError::Parse {
                        line: 1,
                        message: format!("value for {prompt:?} is not a string"),
                    });
                };
                sequences.insert(prompt.trim().to_string(), sequence.to_string());
            }
        } else {
            for (idx, line) in content.lines().enumerate() {
                let line_no = idx + 1;
                if line.trim().is_empty() {
                    continue;
                }
                let record: FixtureRecord =
                    serde_json::from_str(line).map_err(|e| FixtureLoadError::Parse {
                        line: line_no,
                        message: e.to_string(),
                    })?;
                let key = record.prompt.trim().to_string();
                if sequences.contains_key(&key) {
                    return Err(FixtureLoadError::Duplicate {
                        line: line_no,
                        prompt: record.prompt,
                    });
                }
                sequences.insert(key, record.sequence);
            }
        }
        Ok(Self::new(id, eos_marker, sequences))
    }

    pub fn from_path(
        path: impl AsRef<Path>,
        eos_marker: impl Into<String>,
    ) -> Result<Self, FixtureLoadError> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|source| FixtureLoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_content(format!("fixture:{}", path.display()), eos_marker, &content)
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn get(&self, prompt: &str) -> Option<&str> {
        self.sequences.get(prompt.trim()).map(String::as_str)
    }
}

fn looks_like_record(map: &serde_json::Map<String, serde_json::Value>) -> bool {
    map.len() == 2 && map.contains_key("prompt") && map.contains_key("sequence")
}

#[async_trait]
impl Backend for FixtureBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn eos_marker(&self) -> &str {
        &self.eos_marker
    }

    async fn generate(&self, request: &GenerationRequest) -> Result<RawSequence, GenerationError> {
        match self.get(request.prompt()) {
            Some(text) => Ok(RawSequence::new(text, self.eos_marker.as_str())),
            None => Err(GenerationError::UnknownPrompt {
                backend: self.id.clone(),
                prompt: request.prompt().to_string(),
            }),
        }
    }
}
