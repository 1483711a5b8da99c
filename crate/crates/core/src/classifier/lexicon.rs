use std::collections::HashSet;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::normalize_tokens;

/// Longest seed n-gram accepted in the high-disclosure section.
pub const MAX_NGRAM: usize = 3;

/// Lexicon shipped with the crate.
pub const DEFAULT_LEXICON_SOURCE: &str = include_str!("../../data/default_lexicon.txt");

const FIRST_PERSON_HEADER: &str = "[first_person]";
const HIGH_DISCLOSURE_HEADER: &str = "[high_disclosure]";
const REQUIRED_FIRST_PERSON: [&str; 2] = ["i", "my"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate entry {term:?} (first seen on line {first_line})")]
    Duplicate {
        line: usize,
        first_line: usize,
        term: String,
    },
    #[error("line {line}: empty term set for section {section}")]
    EmptySection { line: usize, section: &'static str },
    #[error("first_person section must contain {0:?}")]
    MissingRequired(&'static str),
}

/// Term sets that drive classification. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    first_person: HashSet<String>,
    high_disclosure: HashSet<String>,
    max_ngram: usize,
    version: String,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    FirstPerson,
    HighDisclosure,
}

impl Section {
    fn name(self) -> &'static str {
        match self {
            Section::FirstPerson => "first_person",
            Section::HighDisclosure => "high_disclosure",
        }
    }
}

impl Lexicon {
    /// The bundled lexicon.
    pub fn default_lexicon() -> Self {
        Self::from_source(DEFAULT_LEXICON_SOURCE).expect("bundled lexicon is valid")
    }

    /// Parses the line-oriented lexicon format.
    ///
    /// Sections are introduced by `[first_person]` and `[high_disclosure]`;
    /// each following line holds one term (or a space separated n-gram for
    /// the high-disclosure section). `#` starts a comment and blank lines are
    /// ignored. An optional `version = <id>` line may precede the first
    /// section; without it the version is derived from a content hash.
    pub fn from_source(source: &str) -> Result<Self, LexiconError> {
        let mut section: Option<Section> = None;
        let mut version: Option<String> = None;
        let mut first_person: Vec<(String, usize)> = Vec::new();
        let mut high: Vec<(String, usize)> = Vec::new();
        let mut header_lines = [0usize; 2];
        let mut last_line = 0;

        for (idx, raw_line) in source.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                let next = match line.to_ascii_lowercase().as_str() {
                    FIRST_PERSON_HEADER => Section::FirstPerson,
                    HIGH_DISCLOSURE_HEADER => Section::HighDisclosure,
                    other => {
                        return Err(LexiconError::Parse {
                            line: line_no,
                            message: format!("unknown section {other}"),
                        })
                    }
                };
                let slot = &mut header_lines[next as usize];
                if *slot != 0 {
                    return Err(LexiconError::Parse {
                        line: line_no,
                        message: format!("section {} repeated", next.name()),
                    });
                }
                *slot = line_no;
                section = Some(next);
                continue;
            }
            let Some(current) = section else {
                if let Some(value) = line.strip_prefix("version") {
                    if let Some(value) = value.trim_start().strip_prefix('=') {
                        let value = value.trim();
                        if !value.is_empty() && version.is_none() {
                            version = Some(value.to_string());
                            continue;
                        }
                    }
                }
                return Err(LexiconError::Parse {
                    line: line_no,
                    message: "term outside of any section".into(),
                });
            };

            let tokens = normalize_tokens(line);
            if tokens.is_empty() {
                return Err(LexiconError::Parse {
                    line: line_no,
                    message: format!("{line:?} normalizes to an empty term"),
                });
            }
            let limit = match current {
                Section::FirstPerson => 1,
                Section::HighDisclosure => MAX_NGRAM,
            };
            if tokens.len() > limit {
                return Err(LexiconError::Parse {
                    line: line_no,
                    message: format!(
                        "{line:?} has {} tokens, at most {limit} allowed in {}",
                        tokens.len(),
                        current.name()
                    ),
                });
            }
            let term = tokens.join(" ");
            let bucket = match current {
                Section::FirstPerson => &mut first_person,
                Section::HighDisclosure => &mut high,
            };
            if let Some((_, first_line)) = bucket.iter().find(|(t, _)| *t == term) {
                return Err(LexiconError::Duplicate {
                    line: line_no,
                    first_line: *first_line,
                    term,
                });
            }
            bucket.push((term, line_no));
        }

        for (bucket, sect) in [
            (&first_person, Section::FirstPerson),
            (&high, Section::HighDisclosure),
        ] {
            if bucket.is_empty() {
                let header = header_lines[sect as usize];
                return Err(LexiconError::EmptySection {
                    line: if header == 0 { last_line } else { header },
                    section: sect.name(),
                });
            }
        }
        for required in REQUIRED_FIRST_PERSON {
            if !first_person.iter().any(|(t, _)| t == required) {
                return Err(LexiconError::MissingRequired(required));
            }
        }

        let version = version.unwrap_or_else(|| content_version(source));
        Ok(Self::assemble(
            first_person.into_iter().map(|(t, _)| t),
            high.into_iter().map(|(t, _)| t),
            version,
        ))
    }

    /// Builds a lexicon from term lists, applying the same normalization
    /// and invariants as the file loader.
    pub fn from_terms<I, J, S, T>(
        first_person: I,
        high_disclosure: J,
        version: &str,
    ) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let mut source = format!("version = {version}\n{FIRST_PERSON_HEADER}\n");
        for term in first_person {
            let _ = writeln!(source, "{}", term.as_ref());
        }
        let _ = writeln!(source, "{HIGH_DISCLOSURE_HEADER}");
        for term in high_disclosure {
            let _ = writeln!(source, "{}", term.as_ref());
        }
        Self::from_source(&source)
    }

    fn assemble(
        first_person: impl Iterator<Item = String>,
        high: impl Iterator<Item = String>,
        version: String,
    ) -> Self {
        let high_disclosure: HashSet<String> = high.collect();
        let max_ngram = high_disclosure
            .iter()
            .map(|t| t.split(' ').count())
            .max()
            .unwrap_or(1);
        Self {
            first_person: first_person.collect(),
            high_disclosure,
            max_ngram,
            version,
        }
    }

    pub fn is_first_person(&self, token: &str) -> bool {
        self.first_person.contains(token)
    }

    /// `gram` is a single space separated sequence of normalized tokens.
    pub fn is_high_disclosure(&self, gram: &str) -> bool {
        self.high_disclosure.contains(gram)
    }

    pub fn first_person_terms(&self) -> impl Iterator<Item = &str> {
        self.first_person.iter().map(String::as_str)
    }

    pub fn high_disclosure_terms(&self) -> impl Iterator<Item = &str> {
        self.high_disclosure.iter().map(String::as_str)
    }

    /// Longest n-gram present in the high-disclosure set.
    pub fn max_ngram(&self) -> usize {
        self.max_ngram
    }

    pub fn version(&self) -> &str {
        &self.version
    }
}

fn content_version(source: &str) -> String {
    let digest = Sha256::digest(source.as_bytes());
    let mut out = String::from("sha256:");
    for byte in &digest[..6] {
        let _ = write!(out, "{byte:02x}");
    }
    out
}
