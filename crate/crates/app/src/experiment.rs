//! Batch experiment: vanilla vs re-ranked responses over a prompt set.

use std::path::PathBuf;
use std::sync::Arc;

use futures::stream::{self, StreamExt};
use sdea_core::corpus::{self, CorpusError, PromptSet};
use sdea_core::generation::{Backend, DecodingParams};
use sdea_core::reranker::{enhance_with, EnhanceError, EnhancedResult, Protocol};
use sdea_core::{Lexicon, SdLevel};
use serde::{Deserialize, Serialize};

use crate::config::{Config, ConfigError, CorpusFormat};
use crate::report::{ExperimentReport, PromptRecord};

/// Which SDEA level to count for prompts where no candidate hit the target.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotFoundPolicy {
    /// Count the rendered fallback, i.e. the vanilla response's level.
    #[default]
    Fallback,
    /// Leave those prompts out of the SDEA distribution.
    Exclude,
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("prompt set is empty")]
    EmptyPromptSet,
    #[error("prompt {index} failed after {completed} completed prompt(s): {source}{}",
        .checkpoint.as_ref().map(|p| format!(" (checkpoint: {})", p.display())).unwrap_or_default())]
    Backend {
        index: usize,
        completed: usize,
        checkpoint: Option<PathBuf>,
        #[source]
        source: EnhanceError,
    },
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Everything needed to run prompts through the pipeline.
#[derive(Clone)]
pub struct Runner {
    pub backend: Arc<dyn Backend>,
    pub lexicon: Arc<Lexicon>,
    pub params: DecodingParams,
    pub target: SdLevel,
    pub parallelism: usize,
    pub protocol: Protocol,
}

/// Records completed before a failure, plus the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub completed: Vec<PromptRecord>,
    pub index: usize,
    pub error: EnhanceError,
}

impl Runner {
    /// Runs every prompt with at most `parallelism` in flight. Records come
    /// back in prompt order whatever the interleaving. Stops at the first
    /// failure, returning the in-order prefix that succeeded.
    pub async fn run(&self, prompts: &PromptSet) -> Result<Vec<PromptRecord>, RunFailure> {
        let mut results = stream::iter(prompts.prompts.iter().enumerate())
            .map(|(i, prompt)| async move {
                let outcome = enhance_with(
                    &prompt.text,
                    self.target,
                    &self.params,
                    self.backend.as_ref(),
                    &self.lexicon,
                    self.protocol,
                )
                .await;
                (i, prompt, outcome)
            })
            .buffered(self.parallelism.max(1));

        let mut records = Vec::with_capacity(prompts.len());
        while let Some((index, prompt, outcome)) = results.next().await {
            match outcome {
                Ok(result) => records.push(PromptRecord::new(prompt, &result)),
                Err(error) => {
                    return Err(RunFailure {
                        completed: records,
                        index,
                        error,
                    })
                }
            }
        }
        Ok(records)
    }

    pub async fn enhance(&self, prompt: &str) -> Result<EnhancedResult, EnhanceError> {
        enhance_with(
            prompt,
            self.target,
            &self.params,
            self.backend.as_ref(),
            &self.lexicon,
            self.protocol,
        )
        .await
    }
}

/// Loads the corpus named in `config` and extracts its prompt set.
pub fn load_prompts(config: &Config) -> Result<PromptSet, ExperimentError> {
    let section = config.check_experiment()?;
    let content = std::fs::read_to_string(&section.path).map_err(|source| ConfigError::Io {
        path: section.path.display().to_string(),
        source,
    })?;
    let dataset = config.dataset_id();
    let set = match section.format {
        CorpusFormat::Prompts => PromptSet::from_jsonl(dataset, &content)?,
        CorpusFormat::Dailydialog | CorpusFormat::Linewise => {
            let loaded = if section.format == CorpusFormat::Dailydialog {
                corpus::load_dailydialog(&content)
            } else {
                corpus::load_linewise(&content)
            };
            if loaded.skipped_lines > 0 {
                tracing::warn!(skipped = loaded.skipped_lines, "corpus lines without turns");
            }
            let set =
                corpus::extract_first_prompts(dataset, &loaded.conversations, section.min_tokens)?;
            if set.skipped > 0 {
                tracing::info!(skipped = set.skipped, "conversations without a usable first turn");
            }
            set
        }
    };
    Ok(set)
}

/// Loads inputs, runs every prompt, aggregates, and persists the outputs
/// named in `config.output`.
pub async fn run_experiment(config: &Config) -> Result<ExperimentReport, ExperimentError> {
    let prompts = load_prompts(config)?;
    if prompts.is_empty() {
        return Err(ExperimentError::EmptyPromptSet);
    }
    let lexicon = Arc::new(config.load_lexicon()?);
    let runner = Runner {
        backend: config.build_backend()?,
        lexicon: lexicon.clone(),
        params: config.decoding_params()?,
        target: config.experiment.target,
        parallelism: config.experiment.parallelism,
        protocol: config.experiment.protocol,
    };
    tracing::info!(
        prompts = prompts.len(),
        backend = runner.backend.id(),
        parallelism = runner.parallelism,
        "running experiment"
    );

    let records = match runner.run(&prompts).await {
        Ok(records) => records,
        Err(failure) => {
            let checkpoint = config
                .output
                .report
                .as_ref()
                .map(|p| crate::report::checkpoint_path(p));
            if let Some(path) = &checkpoint {
                crate::report::write_checkpoint(path, &failure)
                    .map_err(|source| ExperimentError::Io {
                        path: path.display().to_string(),
                        source,
                    })?;
            }
            return Err(ExperimentError::Backend {
                index: failure.index,
                completed: failure.completed.len(),
                checkpoint,
                source: failure.error,
            });
        }
    };

    let report = ExperimentReport::build(
        prompts.dataset_id.clone(),
        config.experiment.target,
        config.experiment.not_found,
        config.experiment.yates,
        lexicon.version().to_string(),
        config.snapshot(),
        records,
    );
    report.persist(&config.output)?;
    Ok(report)
}
