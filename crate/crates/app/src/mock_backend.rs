//! Stand-in completion endpoint speaking the remote backend wire format.
//!
//! Prompts present in the optional fixture map are answered verbatim. Any
//! other prompt gets a synthetic sequence drawn from a small phrase bank,
//! deterministic for a given `(prompt, seed)` pair. `max_tokens` is treated
//! as a word budget, so short budgets yield a truncated final candidate.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use axum::routing::post;
use axum::{Json, Router};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdea_core::generation::{WireRequest, WireResponse, DEFAULT_EOS_MARKER};

const PHRASES: &[&str] = &[
    "That sounds like a lot of fun",
    "What did you do next",
    "The weather has been nice lately",
    "I love going to the beach in summer",
    "My sister lives near there",
    "Thank you",
    "That is a good question",
    "We had pizza for dinner",
    "Honestly I am worried about my job",
    "People say it is a great place",
    "I think so too",
    "It depends on the day",
    "My favorite team lost again",
    "I feel a bit lonely these days",
    "Sure, why not",
];

pub struct MockBackend {
    fixtures: HashMap<String, String>,
    eos_marker: String,
}

impl MockBackend {
    pub fn new(fixtures: HashMap<String, String>) -> Self {
        Self {
            fixtures: fixtures
                .into_iter()
                .map(|(k, v)| (k.trim().to_string(), v))
                .collect(),
            eos_marker: DEFAULT_EOS_MARKER.to_string(),
        }
    }

    pub fn respond(&self, req: &WireRequest) -> WireResponse {
        if let Some(text) = self.fixtures.get(req.prompt.trim()) {
            return WireResponse { text: text.clone() };
        }
        let mut rng = match req.seed {
            Some(seed) => {
                let mut h = std::collections::hash_map::DefaultHasher::new();
                req.prompt.hash(&mut h);
                ChaCha8Rng::seed_from_u64(seed ^ h.finish())
            }
            None => ChaCha8Rng::from_os_rng(),
        };
        let budget = req.max_tokens as usize;
        let mut used = 0;
        let mut text = String::new();
        while used < budget {
            let phrase = PHRASES[rng.random_range(0..PHRASES.len())];
            let words: Vec<&str> = phrase.split(' ').collect();
            let room = budget - used;
            if words.len() + 1 > room {
                text.push_str(&words[..room.min(words.len())].join(" "));
                break;
            }
            text.push_str(phrase);
            text.push_str(&self.eos_marker);
            used += words.len() + 1;
        }
        WireResponse { text }
    }
}

pub fn router(mock: Arc<MockBackend>) -> Router {
    Router::new().route(
        "/generate",
        post(move |Json(req): Json<WireRequest>| {
            let mock = mock.clone();
            async move { Json(mock.respond(&req)) }
        }),
    )
}
