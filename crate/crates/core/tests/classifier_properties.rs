use proptest::prelude::*;
use sdea_core::classifier::{classify_text, normalize_tokens, Lexicon, SdLevel};

const VOCAB: &[&str] = &[
    "i", "my", "me", "we", "you", "your", "the", "dog", "sad", "very", "afraid", "of", "dark",
    "secret", "job", "lost", "is", "nice",
];

fn word() -> impl Strategy<Value = &'static str> {
    prop::sample::select(VOCAB)
}

/// First-person terms always include "i" and "my"; total terms stay <= 10.
fn lexicon_terms() -> impl Strategy<Value = (Vec<String>, Vec<String>)> {
    (
        prop::collection::btree_set(word(), 0..3),
        prop::collection::btree_set(prop::collection::vec(word(), 1..=3), 1..6),
    )
        .prop_map(|(fp, high)| {
            let mut first: Vec<String> = vec!["i".into(), "my".into()];
            for w in fp {
                if !first.iter().any(|f| f == w) {
                    first.push(w.to_string());
                }
            }
            let mut high: Vec<String> = high.into_iter().map(|g| g.join(" ")).collect();
            high.dedup();
            high.truncate(10 - first.len());
            (first, high)
        })
}

fn lexicon((first, high): &(Vec<String>, Vec<String>)) -> Lexicon {
    Lexicon::from_terms(first, high, "random").unwrap()
}

/// Exhaustive scan over every contiguous 1..=3 token window, comparing each
/// against every term in the plain lists.
fn oracle(text: &str, first: &[String], high: &[String]) -> SdLevel {
    let tokens = normalize_tokens(text);
    for i in 0..tokens.len() {
        for j in i + 1..=(i + 3).min(tokens.len()) {
            let window = &tokens[i..j];
            if high.iter().any(|h| h.split(' ').eq(window.iter().map(String::as_str))) {
                return SdLevel::High;
            }
        }
    }
    for t in &tokens {
        if first.iter().any(|f| f == t) {
            return SdLevel::Medium;
        }
    }
    SdLevel::General
}

fn utterance(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec((word(), prop::sample::select(&["", ",", ".", "!", "?"][..])), 0..=max)
        .prop_map(|ws| {
            ws.into_iter()
                .map(|(w, p)| format!("{w}{p}"))
                .collect::<Vec<_>>()
                .join(" ")
        })
}

fn flip_case(text: &str, mask: u64) -> String {
    text.chars()
        .enumerate()
        .map(|(i, c)| {
            if mask >> (i % 64) & 1 == 1 {
                c.to_ascii_uppercase()
            } else {
                c
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn agrees_with_exhaustive_ngram_scan(terms in lexicon_terms(), text in utterance(8)) {
        let lex = lexicon(&terms);
        prop_assert_eq!(classify_text(&text, &lex), oracle(&text, &terms.0, &terms.1));
    }

    #[test]
    fn deterministic(terms in lexicon_terms(), text in utterance(12)) {
        let lex = lexicon(&terms);
        prop_assert_eq!(classify_text(&text, &lex), classify_text(&text, &lex));
    }

    #[test]
    fn case_invariant(terms in lexicon_terms(), text in utterance(12), mask in any::<u64>()) {
        let lex = lexicon(&terms);
        prop_assert_eq!(classify_text(&text, &lex), classify_text(&flip_case(&text, mask), &lex));
        prop_assert_eq!(classify_text(&text, &lex), classify_text(&text.to_uppercase(), &lex));
    }

    #[test]
    fn high_precedes_medium(terms in lexicon_terms(), text in utterance(6)) {
        let lex = lexicon(&terms);
        let both = format!("{} {} {}", terms.0[0], text, terms.1[0]);
        prop_assert_eq!(classify_text(&both, &lex), SdLevel::High);
    }

    #[test]
    fn monotone_under_append(terms in lexicon_terms(), text in utterance(10), pick in any::<prop::sample::Index>()) {
        let lex = lexicon(&terms);
        let high = pick.get(&terms.1);
        prop_assert_eq!(classify_text(&format!("{text} {high}"), &lex), SdLevel::High);
        let fp = pick.get(&terms.0);
        let with_fp = classify_text(&format!("{text} {fp}"), &lex);
        prop_assert!(with_fp >= SdLevel::Medium);
        let punctuated = classify_text(&format!("{text}. {fp}!"), &lex);
        prop_assert!(punctuated >= classify_text(&text, &lex));
    }
}

#[test]
fn default_lexicon_worked_examples() {
    let lex = Lexicon::default_lexicon();
    let cases = [
        ("I am overweight and trying to loose some weight", SdLevel::High),
        ("My birthday is in June", SdLevel::Medium),
        ("I went to the park yesterday", SdLevel::Medium),
        ("Thank you", SdLevel::General),
        ("What kind of food do you like ?", SdLevel::General),
        ("Hello is John in", SdLevel::General),
        ("I'm afraid of heights", SdLevel::High),
    ];
    for (text, level) in cases {
        assert_eq!(classify_text(text, &lex), level, "{text}");
    }
}
