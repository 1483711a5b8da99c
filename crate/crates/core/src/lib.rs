//! Self-disclosure enhancement for single-turn dialog responses.
//!
//! A sampled generation is split into end-of-sequence delimited candidates,
//! each candidate is assigned a disclosure level with a first-person pronoun
//! plus seed n-gram rule, and the first candidate at the requested level is
//! rendered in place of the vanilla (first) candidate. The [`stats`] module
//! provides the Pearson chi-square machinery used to compare the level
//! distributions of the two systems.
//!
//! Numeric code in [`stats`] is generic over [`num_traits::Float`]; the
//! aliases below fix it to `f64`, which is what the rest of the toolkit uses.

pub mod classifier;
pub mod corpus;
pub mod generation;
pub mod reranker;
pub mod stats;

pub use classifier::{classify, normalize_tokens, Lexicon, LexiconError, SdLevel, Utterance};
pub use corpus::{Conversation, CorpusError, Prompt, PromptSet};
pub use generation::{
    split_candidates, Backend, Candidate, DecodingParams, FixtureBackend, GenerationError,
    GenerationRequest, RawSequence, RemoteBackend, DEFAULT_EOS_MARKER,
};
pub use reranker::{
    enhance, enhance_with, rank, select_by_level, EnhanceError, EnhancedResult, Protocol,
    RankedCandidate,
};
pub use stats::{ContingencyTable, StatsError};

/// Chi-square test output in double precision.
pub type ChiSquareResult = stats::ChiSquareResult<f64>;
/// Chi-square test output in single precision.
pub type ChiSquareResult32 = stats::ChiSquareResult<f32>;
