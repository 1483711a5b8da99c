//! Generation backends and candidate splitting.
//!
//! Sampling itself is owned by the backend; this module only describes the
//! request, obtains one long continuation per prompt, and cuts it into
//! candidates on the end-of-sequence marker.

mod fixture;
mod params;
mod remote;
mod sequence;

use async_trait::async_trait;

pub use fixture::{FixtureBackend, FixtureLoadError};
pub use params::{DecodingParams, GenerationRequest, ParamsError};
pub use remote::{RemoteBackend, RemoteConfig, WireRequest, WireResponse};
pub use sequence::{split_candidates, Candidate, RawSequence, DEFAULT_EOS_MARKER};

/// Failure to obtain a sequence. Every variant names the backend and prompt.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenerationError {
    #[error("{backend}: no fixture sequence for prompt {prompt:?}")]
    UnknownPrompt { backend: String, prompt: String },
    #[error("{backend}: unreachable while generating for {prompt:?}: {detail}")]
    Unreachable {
        backend: String,
        prompt: String,
        detail: String,
    },
    #[error("{backend}: timed out generating for {prompt:?}")]
    Timeout { backend: String, prompt: String },
    #[error("{backend}: HTTP status {status} for prompt {prompt:?}")]
    Status {
        backend: String,
        prompt: String,
        status: u16,
    },
    #[error("{backend}: malformed response for {prompt:?}: {detail}")]
    Malformed {
        backend: String,
        prompt: String,
        detail: String,
    },
}

impl GenerationError {
    pub fn prompt(&self) -> &str {
        match self {
            GenerationError::UnknownPrompt { prompt, .. }
            | GenerationError::Unreachable { prompt, .. }
            | GenerationError::Timeout { prompt, .. }
            | GenerationError::Status { prompt, .. }
            | GenerationError::Malformed { prompt, .. } => prompt,
        }
    }

    pub fn backend(&self) -> &str {
        match self {
            GenerationError::UnknownPrompt { backend, .. }
            | GenerationError::Unreachable { backend, .. }
            | GenerationError::Timeout { backend, .. }
            | GenerationError::Status { backend, .. }
            | GenerationError::Malformed { backend, .. } => backend,
        }
    }
}

/// Source of sampled continuations.
///
/// Implementations must not carry conversational state between calls: each
/// request is answered from the prompt and decoding parameters alone.
#[async_trait]
pub trait Backend: Send + Sync {
    /// Identity used in diagnostics and reports.
    fn id(&self) -> &str;

    /// Delimiter the backend emits between responses.
    fn eos_marker(&self) -> &str;

    async fn generate(&self, request: &GenerationRequest) -> Result<RawSequence, GenerationError>;
}

#[async_trait]
impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn eos_marker(&self) -> &str {
        (**self).eos_marker()
    }

    async fn generate(&self, request: &GenerationRequest) -> Result<RawSequence, GenerationError> {
        (**self).generate(request).await
    }
}
