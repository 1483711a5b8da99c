use std::collections::HashMap;
use std::io::{BufRead, Read, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;


use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use sdea_core::classifier::classify_text;
use sdea_core::corpus::{self, PromptSet};
use sdea_core::generation::{split_candidates, DecodingParams, RawSequence, DEFAULT_EOS_MARKER};
use sdea_core::reranker::Protocol;
use sdea_core::{Lexicon, SdLevel};

use crate::config::{self, BackendSection, Config, ConfigError};
use crate::experiment::{self, ExperimentError, Runner};
use crate::mock_backend::{self, MockBackend};
use crate::server::{self, ServiceState};

#[derive(Debug, Parser)]
#[command(name = "sdea", version, about = "Self-disclosure enhancement by candidate re-ranking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the disclosure level (G/M/H) of every input line.
    Classify {
        /// Input file; stdin when omitted.
        input: Option<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Split a sampled sequence into candidates.
    Split {
        /// Sequence text; read from stdin when omitted.
        #[arg(long)]
        text: Option<String>,
        #[arg(long, default_value = DEFAULT_EOS_MARKER)]
        eos: String,
    },
    /// Re-rank one prompt and print vanilla and enhanced responses.
    Enhance {
        #[arg(long)]
        prompt: String,
        #[arg(long, default_value = "M")]
        target: SdLevel,
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        decoding: DecodingArgs,
        /// Print the full result as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run a full experiment described by a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Serve the HTTP API.
    Serve {
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        decoding: DecodingArgs,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
    /// Check a lexicon file and print a summary.
    LexiconValidate { path: PathBuf },
    /// Extract first-turn prompts from a corpus as JSON Lines.
    ExtractPrompts {
        input: PathBuf,
        #[arg(long, value_enum)]
        format: FormatArg,
        #[arg(long, default_value_t = corpus::DEFAULT_MIN_TOKENS)]
        min_tokens: usize,
    },
    /// Run a stand-in completion endpoint for local testing.
    MockBackend {
        #[arg(long, default_value = "127.0.0.1:8081")]
        bind: SocketAddr,
        /// JSON object mapping prompts to fixed sequences.
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum FormatArg {
    Dailydialog,
    Linewise,
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    /// Config file providing backend, decoding and lexicon sections.
    #[arg(long, conflicts_with_all = ["backend", "url"])]
    config: Option<PathBuf>,
    /// Fixture file (JSON object or JSON Lines) to replay.
    #[arg(long)]
    backend: Option<PathBuf>,
    /// Remote completion endpoint base URL.
    #[arg(long, conflicts_with = "backend")]
    url: Option<String>,
    #[arg(long, default_value = "/generate")]
    endpoint: String,
    #[arg(long, default_value = DEFAULT_EOS_MARKER)]
    eos: String,
    #[arg(long, default_value_t = 30.0)]
    timeout_secs: f64,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    dual_run: bool,
}

#[derive(Debug, Args)]
pub struct DecodingArgs {
    #[arg(long)]
    top_p: Option<f64>,
    #[arg(long)]
    sequence_length: Option<u32>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Error with the exit status it maps to: 2 for usage and configuration
/// problems, 1 for failures while running.
pub struct CliError {
    pub status: u8,
    pub error: anyhow::Error,
}

impl CliError {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self {
            status: 2,
            error: error.into(),
        }
    }

    fn runtime(error: impl Into<anyhow::Error>) -> Self {
        Self {
            status: 1,
            error: error.into(),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::usage(e)
    }
}

struct Resolved {
    runner: Runner,
}

impl BackendArgs {
    fn resolve(&self, decoding: &DecodingArgs, target: SdLevel) -> Result<Resolved, CliError> {
        let (backend, lexicon, base, protocol, parallelism) = match &self.config {
            Some(path) => {
                let cfg = Config::load(path)?;
                let lexicon = match &self.lexicon {
                    Some(p) => config::load_lexicon_file(p)?,
                    None => cfg.load_lexicon()?,
                };
                let protocol = if self.dual_run {
                    Protocol::DualRun
                } else {
                    cfg.experiment.protocol
                };
                (
                    cfg.build_backend()?,
                    lexicon,
                    cfg.decoding_params()?,
                    protocol,
                    cfg.experiment.parallelism,
                )
            }
            None => {
                if self.backend.is_none() && self.url.is_none() {
                    return Err(CliError::usage(anyhow::anyhow!(
                        "one of --backend, --url or --config is required"
                    )));
                }
                let section = BackendSection {
                    fixture: self.backend.clone(),
                    url: self.url.clone(),
                    endpoint: self.endpoint.clone(),
                    timeout_secs: self.timeout_secs,
                    max_in_flight: 4,
                    eos_marker: self.eos.clone(),
                };
                let lexicon = match &self.lexicon {
                    Some(p) => config::load_lexicon_file(p)?,
                    None => Lexicon::default_lexicon(),
                };
                let protocol = if self.dual_run {
                    Protocol::DualRun
                } else {
                    Protocol::SingleSequence
                };
                (
                    config::build_backend(&section)?,
                    lexicon,
                    DecodingParams::default(),
                    protocol,
                    4,
                )
            }
        };
        let params = DecodingParams::new(
            decoding.top_p.unwrap_or(base.top_p()),
            decoding.sequence_length.unwrap_or(base.sequence_length()),
            decoding.temperature.unwrap_or(base.temperature()),
            decoding.seed.or(base.seed()),
        )
        .map_err(CliError::usage)?;
        Ok(Resolved {
            runner: Runner {
                backend,
                lexicon: Arc::new(lexicon),
                params,
                target,
                parallelism,
                protocol,
            },
        })
    }
}

fn read_input(path: Option<&PathBuf>) -> Result<String, CliError> {
    let mut content = String::new();
    match path {
        Some(p) => {
            content = std::fs::read_to_string(p)
                .with_context(|| format!("reading {}", p.display()))
                .map_err(CliError::usage)?;
        }
        None => {
            std::io::stdin()
                .read_to_string(&mut content)
                .context("reading stdin")
                .map_err(CliError::runtime)?;
        }
    }
    Ok(content)
}

pub async fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Classify { input, lexicon } => {
            let lexicon = match lexicon {
                Some(p) => config::load_lexicon_file(&p)?,
                None => Lexicon::default_lexicon(),
            };
            let content = read_input(input.as_ref())?;
            for line in content.as_bytes().lines() {
                let line = line.map_err(CliError::runtime)?;
                writeln!(out, "{}", classify_text(&line, &lexicon)).map_err(CliError::runtime)?;
            }
        }
        Command::Split { text, eos } => {
            if eos.is_empty() {
                return Err(CliError::usage(anyhow::anyhow!("--eos must not be empty")));
            }
            let text = match text {
                Some(t) => t,
                None => read_input(None)?,
            };
            for c in split_candidates(&RawSequence::new(text, eos)) {
                let state = if c.complete { "complete" } else { "incomplete" };
                writeln!(out, "{}\t{}\t{}", c.index, state, c.text).map_err(CliError::runtime)?;
            }
        }
        Command::Enhance {
            prompt,
            target,
            backend,
            decoding,
            json,
        } => {
            let resolved = backend.resolve(&decoding, target)?;
            let result = resolved
                .runner
                .enhance(&prompt)
                .await
                .map_err(CliError::runtime)?;
            if json {
                let body = serde_json::to_string_pretty(&result).map_err(CliError::runtime)?;
                writeln!(out, "{body}").map_err(CliError::runtime)?;
            } else {
                writeln!(out, "vanilla  [{}] {}", result.vanilla.level, result.vanilla.text())
                    .map_err(CliError::runtime)?;
                match &result.enhanced {
                    Some(e) => writeln!(out, "enhanced [{}] {}", e.level, e.text()),
                    None => writeln!(out, "enhanced (no {target}-level candidate)"),
                }
                .map_err(CliError::runtime)?;
            }
        }
        Command::Experiment { config } => {
            let cfg = Config::load(&config)?;
            let report = match experiment::run_experiment(&cfg).await {
                Ok(r) => r,
                Err(e @ (ExperimentError::Config(_) | ExperimentError::Corpus(_))) => {
                    return Err(CliError::usage(e))
                }
                Err(e) => return Err(CliError::runtime(e)),
            };
            write!(out, "{}", report.render_table()).map_err(CliError::runtime)?;
        }
        Command::Serve {
            backend,
            decoding,
            bind,
        } => {
            let resolved = backend.resolve(&decoding, SdLevel::Medium)?;
            let state = Arc::new(ServiceState {
                backend: resolved.runner.backend,
                lexicon: resolved.runner.lexicon,
                params: resolved.runner.params,
                protocol: resolved.runner.protocol,
            });
            server::serve(bind, state)
                .await
                .with_context(|| format!("serving on {bind}"))
                .map_err(CliError::runtime)?;
        }
        Command::LexiconValidate { path } => {
            let lexicon = match config::load_lexicon_file(&path) {
                Ok(l) => l,
                Err(e @ ConfigError::Io { .. }) => return Err(CliError::usage(e)),
                Err(e) => return Err(CliError::runtime(e)),
            };
            writeln!(
                out,
                "ok: {} first-person terms, {} high-disclosure terms, version {}",
                lexicon.first_person_terms().count(),
                lexicon.high_disclosure_terms().count(),
                lexicon.version()
            )
            .map_err(CliError::runtime)?;
        }
        Command::ExtractPrompts {
            input,
            format,
            min_tokens,
        } => {
            let content = read_input(Some(&input))?;
            let loaded = match format {
                FormatArg::Dailydialog => corpus::load_dailydialog(&content),
                FormatArg::Linewise => corpus::load_linewise(&content),
            };
            let dataset = input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let set: PromptSet =
                corpus::extract_first_prompts(dataset, &loaded.conversations, min_tokens)
                    .map_err(CliError::usage)?;
            write!(out, "{}", set.to_jsonl()).map_err(CliError::runtime)?;
            eprintln!(
                "{} prompts, {} conversations skipped, {} empty lines skipped",
                set.len(),
                set.skipped,
                loaded.skipped_lines
            );
        }
        Command::MockBackend { bind, fixture } => {
            let fixtures: HashMap<String, String> = match fixture {
                Some(p) => {
                    let content = read_input(Some(&p))?;
                    serde_json::from_str(&content)
                        .with_context(|| format!("parsing {}", p.display()))
                        .map_err(CliError::usage)?
                }
                None => HashMap::new(),
            };
            let listener = tokio::net::TcpListener::bind(bind)
                .await
                .map_err(CliError::runtime)?;
            eprintln!("mock backend on http://{}", listener.local_addr().map_err(CliError::runtime)?);
            axum::serve(listener, mock_backend::router(Arc::new(MockBackend::new(fixtures))))
                .with_graceful_shutdown(async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await
                .map_err(CliError::runtime)?;
        }
    }
    Ok(())
}

pub fn exit_code(result: Result<(), CliError>) -> ExitCode {
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.status)
        }
    }
}
