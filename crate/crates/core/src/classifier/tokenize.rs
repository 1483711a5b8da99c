/// Lowercases `text`, splits it on whitespace and strips leading and
/// trailing punctuation from every token. Characters inside a token are
/// kept, so "I'm" stays a single token. Typographic apostrophes are folded
/// to ASCII `'`. Tokens that are pure punctuation are dropped.
pub fn normalize_tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let trimmed = raw.trim_matches(|c: char| !c.is_alphanumeric());
            if trimmed.is_empty() {
                return None;
            }
            Some(
                trimmed
                    .chars()
                    .map(|c| if matches!(c, '\u{2019}' | '\u{2018}') { '\'' } else { c })
                    .flat_map(char::to_lowercase)
                    .collect(),
            )
        })
        .collect()
}
