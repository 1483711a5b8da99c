//! Candidate re-ranking: split a sampled sequence, classify every candidate
//! and render the first one at the requested disclosure level.

use serde::{Deserialize, Serialize};

use crate::classifier::{classify, Lexicon, SdLevel, Utterance};
use crate::generation::{
    split_candidates, Backend, Candidate, DecodingParams, GenerationError, GenerationRequest,
    ParamsError,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedCandidate {
    #[serde(flatten)]
    pub candidate: Candidate,
    pub level: SdLevel,
}

impl RankedCandidate {
    pub fn text(&self) -> &str {
        &self.candidate.text
    }

    pub fn index(&self) -> usize {
        self.candidate.index
    }
}

/// Vanilla and enhanced responses for one prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnhancedResult {
    pub prompt: String,
    pub target: SdLevel,
    /// First candidate of the vanilla sequence.
    pub vanilla: RankedCandidate,
    /// Lowest-index candidate at `target`, if any.
    pub enhanced: Option<RankedCandidate>,
    pub candidates: Vec<RankedCandidate>,
}

impl EnhancedResult {
    pub fn not_found(&self) -> bool {
        self.enhanced.is_none()
    }
}

/// How the vanilla response is obtained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Vanilla is the first candidate of the same sequence that is re-ranked.
    #[default]
    SingleSequence,
    /// Vanilla comes from an independent generation call. When a seed is set
    /// the vanilla call uses `seed + 1`.
    DualRun,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnhanceError {
    #[error(transparent)]
    InvalidRequest(#[from] ParamsError),
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error("{backend}: generation for {prompt:?} produced no candidates")]
    EmptyGeneration { backend: String, prompt: String },
}

/// Pairs each candidate with its level, preserving order.
pub fn rank(candidates: Vec<Candidate>, lexicon: &Lexicon) -> Vec<RankedCandidate> {
    candidates
        .into_iter()
        .map(|candidate| {
            let level = classify(&Utterance::new(candidate.text.as_str()), lexicon);
            RankedCandidate { candidate, level }
        })
        .collect()
}

/// Lowest-index candidate whose level equals `target`.
pub fn select_by_level(ranked: &[RankedCandidate], target: SdLevel) -> Option<&RankedCandidate> {
    ranked.iter().find(|c| c.level == target)
}

/// Runs generate, split, rank and select for one prompt using the
/// single-sequence protocol.
pub async fn enhance<B: Backend + ?Sized>(
    prompt: &str,
    target: SdLevel,
    params: &DecodingParams,
    backend: &B,
    lexicon: &Lexicon,
) -> Result<EnhancedResult, EnhanceError> {
    enhance_with(prompt, target, params, backend, lexicon, Protocol::SingleSequence).await
}

pub async fn enhance_with<B: Backend + ?Sized>(
    prompt: &str,
    target: SdLevel,
    params: &DecodingParams,
    backend: &B,
    lexicon: &Lexicon,
    protocol: Protocol,
) -> Result<EnhancedResult, EnhanceError> {
    let candidates = ranked_generation(prompt, params, backend, lexicon).await?;
    let enhanced = select_by_level(&candidates, target).cloned();
    let vanilla = match protocol {
        Protocol::SingleSequence => candidates[0].clone(),
        Protocol::DualRun => {
            let vanilla_params = params.with_seed(params.seed().map(|s| s.wrapping_add(1)));
            ranked_generation(prompt, &vanilla_params, backend, lexicon)
                .await?
                .swap_remove(0)
        }
    };
    Ok(EnhancedResult {
        prompt: prompt.to_string(),
        target,
        vanilla,
        enhanced,
        candidates,
    })
}

/// Generates, splits and ranks; the returned list is never empty.
async fn ranked_generation<B: Backend + ?Sized>(
    prompt: &str,
    params: &DecodingParams,
    backend: &B,
    lexicon: &Lexicon,
) -> Result<Vec<RankedCandidate>, EnhanceError> {
    let request = GenerationRequest::new(prompt, *params)?;
    let sequence = backend.generate(&request).await?;
    let ranked = rank(split_candidates(&sequence), lexicon);
    if ranked.is_empty() {
        return Err(EnhanceError::EmptyGeneration {
            backend: backend.id().to_string(),
            prompt: prompt.to_string(),
        });
    }
    Ok(ranked)
}
