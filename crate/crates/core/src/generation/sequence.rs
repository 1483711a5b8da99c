use serde::{Deserialize, Serialize};

/// GPT-2 family end-of-text token.
pub const DEFAULT_EOS_MARKER: &str = "<|endoftext|>";

/// A full sampled continuation and the delimiter it uses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSequence {
    text: String,
    eos_marker: String,
    terminated: bool,
}

impl RawSequence {
    /// # Panics
    ///
    /// If `eos_marker` is empty.
    pub fn new(text: impl Into<String>, eos_marker: impl Into<String>) -> Self {
        let text = text.into();
        let eos_marker = eos_marker.into();
        assert!(!eos_marker.is_empty(), "eos marker must be non-empty");
        let terminated = text.trim_end().ends_with(eos_marker.as_str());
        Self {
            text,
            eos_marker,
            terminated,
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn eos_marker(&self) -> &str {
        &self.eos_marker
    }

    /// Whether the text (ignoring trailing whitespace) ends with the marker.
    pub fn terminated(&self) -> bool {
        self.terminated
    }
}

/// One response candidate cut out of a [`RawSequence`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub text: String,
    pub index: usize,
    /// False for a trailing fragment that was cut off by the token budget.
    pub complete: bool,
}

/// Splits `sequence` on every occurrence of its marker.
///
/// Fragments are trimmed and empty ones dropped. The unterminated tail is
/// kept (marked incomplete) only when no complete fragment exists.
pub fn split_candidates(sequence: &RawSequence) -> Vec<Candidate> {
    let mut parts: Vec<&str> = sequence.text.split(sequence.eos_marker.as_str()).collect();
    // `split` always yields at least one element; the last one is the tail
    // after the final marker, empty when the sequence is terminated.
    let tail = parts.pop().unwrap_or_default().trim();

    let mut out: Vec<Candidate> = parts
        .into_iter()
        .map(str::trim)
        .filter(|frag| !frag.is_empty())
        .enumerate()
        .map(|(index, frag)| Candidate {
            text: frag.to_string(),
            index,
            complete: true,
        })
        .collect();

    if out.is_empty() && !tail.is_empty() {
        out.push(Candidate {
            text: tail.to_string(),
            index: 0,
            complete: false,
        });
    }
    out
}
