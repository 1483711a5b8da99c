use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamsError {
    #[error("top_p must be in (0, 1], got {0}")]
    TopP(f64),
    #[error("sequence_length must be at least 1")]
    SequenceLength,
    #[error("temperature must be positive and finite, got {0}")]
    Temperature(f64),
    #[error("prompt is empty")]
    EmptyPrompt,
}

/// Decoding hyperparameters forwarded to the backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct DecodingParams {
    top_p: f64,
    sequence_length: u32,
    temperature: f64,
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(default = "default_top_p")]
    top_p: f64,
    #[serde(default = "default_sequence_length")]
    sequence_length: u32,
    #[serde(default = "default_temperature")]
    temperature: f64,
    #[serde(default)]
    seed: Option<u64>,
}

fn default_top_p() -> f64 {
    DecodingParams::DEFAULT_TOP_P
}
fn default_sequence_length() -> u32 {
    DecodingParams::DEFAULT_SEQUENCE_LENGTH
}
fn default_temperature() -> f64 {
    DecodingParams::DEFAULT_TEMPERATURE
}

impl TryFrom<RawParams> for DecodingParams {
    type Error = ParamsError;

    fn try_from(raw: RawParams) -> Result<Self, Self::Error> {
        DecodingParams::new(raw.top_p, raw.sequence_length, raw.temperature, raw.seed)
    }
}

impl Default for DecodingParams {
    fn default() -> Self {
        Self {
            top_p: Self::DEFAULT_TOP_P,
            sequence_length: Self::DEFAULT_SEQUENCE_LENGTH,
            temperature: Self::DEFAULT_TEMPERATURE,
            seed: None,
        }
    }
}

impl DecodingParams {
    pub const DEFAULT_TOP_P: f64 = 0.9;
    pub const DEFAULT_SEQUENCE_LENGTH: u32 = 100;
    pub const DEFAULT_TEMPERATURE: f64 = 1.0;

    pub fn new(
        top_p: f64,
        sequence_length: u32,
        temperature: f64,
        seed: Option<u64>,
    ) -> Result<Self, ParamsError> {
        // NaN fails both comparisons.
        if !(top_p > 0.0 && top_p <= 1.0) {
            return Err(ParamsError::TopP(top_p));
        }
        if sequence_length == 0 {
            return Err(ParamsError::SequenceLength);
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(ParamsError::Temperature(temperature));
        }
        Ok(Self {
            top_p,
            sequence_length,
            temperature,
            seed,
        })
    }

    pub fn top_p(&self) -> f64 {
        self.top_p
    }

    /// Token budget, passed to the backend as its max-new-tokens limit.
    pub fn sequence_length(&self) -> u32 {
        self.sequence_length
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }
}

/// One stateless generation call: the prompt is the whole context.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRequest {
    prompt: String,
    params: DecodingParams,
}

impl GenerationRequest {
    pub fn new(prompt: impl Into<String>, params: DecodingParams) -> Result<Self, ParamsError> {
        let prompt = prompt.into();
        if prompt.trim().is_empty() {
            return Err(ParamsError::EmptyPrompt);
        }
        Ok(Self { prompt, params })
    }

    pub fn prompt(&self) -> &str {
        &self.prompt
    }

    pub fn params(&self) -> &DecodingParams {
        &self.params
    }

    /// Always true: no history is ever attached to a request.
    pub fn stateless(&self) -> bool {
        true
    }
}
