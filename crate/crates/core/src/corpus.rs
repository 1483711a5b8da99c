//! Dialog corpus ingestion and first-turn prompt extraction.

use serde::{Deserialize, Serialize};

use crate::classifier::normalize_tokens;

/// DailyDialog end-of-utterance delimiter.
pub const EOU: &str = "__eou__";

pub const DEFAULT_MIN_TOKENS: usize = 3;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("min_tokens must be at least 1")]
    MinTokens,
    #[error("prompt line {line}: {message}")]
    PromptParse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversation {
    pub id: String,
    pub turns: Vec<String>,
}

/// Result of loading a corpus file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadedCorpus {
    pub conversations: Vec<Conversation>,
    /// Non-blank lines that contained no turn once delimiters were removed.
    pub skipped_lines: usize,
}

/// One conversation per non-blank line, turns separated by `__eou__`.
/// Conversation ids are sequential over the kept lines.
pub fn load_dailydialog(content: &str) -> LoadedCorpus {
    let mut out = LoadedCorpus::default();
    for line in content.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let turns: Vec<String> = line
            .split(EOU)
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(String::from)
            .collect();
        if turns.is_empty() {
            out.skipped_lines += 1;
            continue;
        }
        let id = out.conversations.len().to_string();
        out.conversations.push(Conversation { id, turns });
    }
    out
}

/// One turn per line; blank lines separate conversations.
pub fn load_linewise(content: &str) -> LoadedCorpus {
    let mut out = LoadedCorpus::default();
    let mut turns: Vec<String> = Vec::new();
    let flush = |turns: &mut Vec<String>, out: &mut LoadedCorpus| {
        if !turns.is_empty() {
            let id = out.conversations.len().to_string();
            out.conversations.push(Conversation {
                id,
                turns: std::mem::take(turns),
            });
        }
    };
    for line in content.lines() {
        let line = line.trim();
        if line.is_empty() {
            flush(&mut turns, &mut out);
        } else {
            turns.push(line.to_string());
        }
    }
    flush(&mut turns, &mut out);
    out
}

pub fn serialize_dailydialog(conversations: &[Conversation]) -> String {
    let mut out = String::new();
    for conv in conversations {
        for turn in &conv.turns {
            out.push_str(turn);
            out.push(' ');
            out.push_str(EOU);
            out.push(' ');
        }
        out.pop();
        out.push('\n');
    }
    out
}

pub fn serialize_linewise(conversations: &[Conversation]) -> String {
    conversations
        .iter()
        .map(|c| c.turns.join("\n"))
        .collect::<Vec<_>>()
        .join("\n\n")
        + "\n"
}

/// A selected single-turn prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub conv_id: String,
    /// 0 for the first turn, 1 when the first turn was noisy.
    pub turn: u8,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    pub dataset_id: String,
    pub prompts: Vec<Prompt>,
    /// Conversations with neither of their first two turns usable.
    pub skipped: usize,
}

impl PromptSet {
    pub fn len(&self) -> usize {
        self.prompts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prompts.is_empty()
    }

    /// One JSON record per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for prompt in &self.prompts {
            out.push_str(&serde_json::to_string(prompt).expect("prompt serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(dataset_id: impl Into<String>, content: &str) -> Result<Self, CorpusError> {
        let mut prompts = Vec::new();
        for (idx, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let prompt: Prompt =
                serde_json::from_str(line).map_err(|e| CorpusError::PromptParse {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            if prompt.turn > 1 {
                return Err(CorpusError::PromptParse {
                    line: idx + 1,
                    message: format!("turn must be 0 or 1, got {}", prompt.turn),
                });
            }
            prompts.push(prompt);
        }
        Ok(Self {
            dataset_id: dataset_id.into(),
            prompts,
            skipped: 0,
        })
    }
}

/// Fewer than `min_tokens` tokens containing an alphabetic character.
pub fn is_noisy(text: &str, min_tokens: usize) -> bool {
    normalize_tokens(text)
        .iter()
        .filter(|t| t.chars().any(char::is_alphabetic))
        .count()
        < min_tokens
}

/// Picks turn 0 of each conversation, or turn 1 when turn 0 is noisy.
pub fn extract_first_prompts(
    dataset_id: impl Into<String>,
    conversations: &[Conversation],
    min_tokens: usize,
) -> Result<PromptSet, CorpusError> {
    if min_tokens == 0 {
        return Err(CorpusError::MinTokens);
    }
    let mut prompts = Vec::with_capacity(conversations.len());
    let mut skipped = 0;
    for conv in conversations {
        let pick = conv
            .turns
            .iter()
            .take(2)
            .enumerate()
            .find(|(_, text)| !is_noisy(text, min_tokens));
        match pick {
            Some((turn, text)) => prompts.push(Prompt {
                conv_id: conv.id.clone(),
                turn: turn as u8,
                text: text.clone(),
            }),
            None => skipped += 1,
        }
    }
    Ok(PromptSet {
        dataset_id: dataset_id.into(),
        prompts,
        skipped,
    })
}
