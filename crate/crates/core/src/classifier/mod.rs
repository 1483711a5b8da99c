//! Rule-based self-disclosure recognition.
//!
//! An utterance is High when any contiguous token n-gram (n <= 3) is a
//! high-disclosure seed, otherwise Medium when any token is a first-person
//! term, otherwise General.

mod lexicon;
mod tokenize;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use lexicon::{Lexicon, LexiconError, DEFAULT_LEXICON_SOURCE, MAX_NGRAM};
pub use tokenize::normalize_tokens;

/// Self-disclosure level, ordered by how sensitive the revealed information is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SdLevel {
    /// No disclosure: the utterance is about a third party, an event or a thing.
    #[serde(rename = "G")]
    General,
    /// Non-sensitive information about oneself.
    #[serde(rename = "M")]
    Medium,
    /// Sensitive or vulnerable information: concerns, insecurities, secrets.
    #[serde(rename = "H")]
    High,
}

impl SdLevel {
    pub const ALL: [SdLevel; 3] = [SdLevel::General, SdLevel::Medium, SdLevel::High];

    pub fn as_str(self) -> &'static str {
        match self {
            SdLevel::General => "G",
            SdLevel::Medium => "M",
            SdLevel::High => "H",
        }
    }

    /// Position in [`SdLevel::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SdLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown self-disclosure level {0:?} (expected G, M or H)")]
pub struct ParseLevelError(pub String);

impl FromStr for SdLevel {
    type Err = ParseLevelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g" | "general" => Ok(SdLevel::General),
            "m" | "medium" => Ok(SdLevel::Medium),
            "h" | "high" => Ok(SdLevel::High),
            _ => Err(ParseLevelError(s.to_string())),
        }
    }
}

/// A single response or candidate text together with its normalized tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    raw: String,
    tokens: Vec<String>,
}

impl Utterance {
    pub fn new(raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let tokens = normalize_tokens(&raw);
        Self { raw, tokens }
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

impl From<&str> for Utterance {
    fn from(raw: &str) -> Self {
        Utterance::new(raw)
    }
}

/// Assigns a disclosure level to `utterance` under `lexicon`.
pub fn classify(utterance: &Utterance, lexicon: &Lexicon) -> SdLevel {
    classify_tokens(utterance.tokens(), lexicon)
}

/// Same as [`classify`] for an already tokenized utterance.
pub fn classify_tokens<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> SdLevel {
    let mut gram = String::new();
    for start in 0..tokens.len() {
        gram.clear();
        for (n, token) in tokens[start..].iter().take(lexicon.max_ngram()).enumerate() {
            if n > 0 {
                gram.push(' ');
            }
            gram.push_str(token.as_ref());
            if lexicon.is_high_disclosure(&gram) {
                return SdLevel::High;
            }
        }
    }
    if tokens.iter().any(|t| lexicon.is_first_person(t.as_ref())) {
        SdLevel::Medium
    } else {
        SdLevel::General
    }
}

/// Convenience wrapper that tokenizes `text` and classifies it.
pub fn classify_text(text: &str, lexicon: &Lexicon) -> SdLevel {
    classify_tokens(&normalize_tokens(text), lexicon)
}
