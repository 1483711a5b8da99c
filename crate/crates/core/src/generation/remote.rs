use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

use super::{Backend, GenerationError, GenerationRequest, RawSequence, DEFAULT_EOS_MARKER};

/// JSON body POSTed to a completion endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRequest {
    pub prompt: String,
    pub max_tokens: u32,
    pub top_p: f64,
    pub temperature: f64,
    pub seed: Option<u64>,
}

impl From<&GenerationRequest> for WireRequest {
    fn from(request: &GenerationRequest) -> Self {
        let params = request.params();
        Self {
            prompt: request.prompt().to_string(),
            max_tokens: params.sequence_length(),
            top_p: params.top_p(),
            temperature: params.temperature(),
            seed: params.seed(),
        }
    }
}

/// JSON body returned by a completion endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireResponse {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteConfig {
    pub base_url: String,
    pub endpoint_path: String,
    pub timeout: Duration,
    pub max_in_flight: usize,
    pub eos_marker: String,
}

impl RemoteConfig {
    pub const DEFAULT_ENDPOINT_PATH: &'static str = "/generate";
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
    pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;

    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            endpoint_path: Self::DEFAULT_ENDPOINT_PATH.to_string(),
            timeout: Self::DEFAULT_TIMEOUT,
            max_in_flight: Self::DEFAULT_MAX_IN_FLIGHT,
            eos_marker: DEFAULT_EOS_MARKER.to_string(),
        }
    }

    pub fn url(&self) -> String {
        let base = self.base_url.trim_end_matches('/');
        let path = self.endpoint_path.trim_start_matches('/');
        format!("{base}/{path}")
    }
}

/// HTTP completion endpoint client.
///
/// At most `max_in_flight` requests are outstanding at once; further calls
/// wait for a slot.
#[derive(Debug, Clone)]
pub struct RemoteBackend {
    id: String,
    url: String,
    eos_marker: String,
    client: reqwest::Client,
    slots: Arc<Semaphore>,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, reqwest::Error> {
        assert!(!config.eos_marker.is_empty(), "eos marker must be non-empty");
        let client = reqwest::Client::builder().timeout(config.timeout).build()?;
        let url = config.url();
        Ok(Self {
            id: format!("remote:{url}"),
            url,
            eos_marker: config.eos_marker,
            client,
            slots: Arc::new(Semaphore::new(config.max_in_flight.max(1))),
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

#[async_trait]
impl Backend for RemoteBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn eos_marker(&self) -> &str {
        &self.eos_marker
    }

    async fn generate(&self, request: &GenerationRequest) -> Result<RawSequence, GenerationError> {
        let prompt = request.prompt().to_string();
        let backend = self.id.clone();
        let _permit = self.slots.acquire().await.expect("semaphore never closed");

        let transport = |err: reqwest::Error| {
            if err.is_timeout() {
                GenerationError::Timeout {
                    backend: backend.clone(),
                    prompt: prompt.clone(),
                }
            } else if err.is_decode() || err.is_body() {
                GenerationError::Malformed {
                    backend: backend.clone(),
                    prompt: prompt.clone(),
                    detail: err.to_string(),
                }
            } else {
                GenerationError::Unreachable {
                    backend: backend.clone(),
                    prompt: prompt.clone(),
                    detail: err.to_string(),
                }
            }
        };

        let response = self
            .client
            .post(&self.url)
            .json(&WireRequest::from(request))
            .send()
            .await
            .map_err(transport)?;
        let status = response.status();
        if !status.is_success() {
            return Err(GenerationError::Status {
                backend,
                prompt,
                status: status.as_u16(),
            });
        }
        let body = response.bytes().await.map_err(transport)?;
        let parsed: WireResponse =
            serde_json::from_slice(&body).map_err(|e| GenerationError::Malformed {
                backend: backend.clone(),
                prompt: prompt.clone(),
                detail: e.to_string(),
            })?;
        Ok(RawSequence::new(parsed.text, self.eos_marker.as_str()))
    }
}
