use std::sync::{Condvar, Mutex};
use std::time::Duration;

use base64::Engine;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dsp::encode_wav_bytes;
use crate::providers::{
    ClipRef, GenerationParams, ModelProvider, ProviderError, SentenceEmbedder, SentenceEmbedding,
    SpeechEmbedding, TextEncoding, TextGenerator, TranscriptText,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpProviderConfig {
    pub base_url: String,
    pub timeout_s: f64,
    pub max_in_flight: usize,
}

impl Default for HttpProviderConfig {
    fn default() -> Self {
        Self {
            base_url: "http://127.0.0.1:8765".into(),
            timeout_s: 120.0,
            max_in_flight: 4,
        }
    }
}

/// Counting semaphore bounding concurrent requests.
#[derive(Debug)]
struct InFlight {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

/// Client for the inference sidecar's JSON-over-HTTP contract.
pub struct HttpProvider {
    base_url: String,
    agent: ureq::Agent,
    in_flight: InFlight,
}

#[derive(Deserialize)]
struct TextResponse {
    text: String,
}

#[derive(Deserialize)]
struct ErrorBody {
    error: String,
    #[serde(default)]
    stage: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Health {
    pub ready: bool,
    #[serde(default)]
    pub models: serde_json::Map<String, serde_json::Value>,
}

impl HttpProvider {
    pub fn new(config: &HttpProviderConfig) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs_f64(config.timeout_s.max(0.001)))
            .build();
        Self {
            base_url: config.base_url.trim_end_matches('/').to_string(),
            agent,
            in_flight: InFlight::new(config.max_in_flight),
        }
    }

    fn url(&self, endpoint: &str) -> String {
        format!("{}{endpoint}", self.base_url)
    }

    fn map_error(endpoint: &str, err: ureq::Error) -> ProviderError {
        match err {
            ureq::Error::Status(status, resp) => {
                let body = resp.into_string().unwrap_or_default();
                let message = match serde_json::from_str::<ErrorBody>(&body) {
                    Ok(e) => match e.stage {
                        Some(stage) => format!("{} (stage {stage})", e.error),
                        None => e.error,
                    },
                    Err(_) => body,
                };
                ProviderError::Server {
                    endpoint: endpoint.into(),
                    status,
                    message,
                }
            }
            ureq::Error::Transport(t) => {
                let detail = t.to_string();
                if detail.contains("timed out") || detail.contains("Timeout") {
                    ProviderError::Timeout(endpoint.into())
                } else {
                    ProviderError::Transport {
                        endpoint: endpoint.into(),
                        detail,
                    }
                }
            }
        }
    }

    fn post<R: DeserializeOwned>(&self, endpoint: &str, body: serde_json::Value) -> Result<R, ProviderError> {
        let _permit = self.in_flight.acquire();
        let resp = self
            .agent
            .post(&self.url(endpoint))
            .send_json(body)
            .map_err(|e| Self::map_error(endpoint, e))?;
        resp.into_json::<R>().map_err(|e| ProviderError::Malformed {
            what: endpoint.into(),
            detail: e.to_string(),
        })
    }

    /// `GET /healthz`; a sidecar that is not ready is a transport error.
    pub fn check_health(&self) -> Result<Health, ProviderError> {
        let endpoint = "/healthz";
        let _permit = self.in_flight.acquire();
        let health: Health = self
            .agent
            .get(&self.url(endpoint))
            .call()
            .map_err(|e| Self::map_error(endpoint, e))?
            .into_json()
            .map_err(|e| ProviderError::Malformed {
                what: endpoint.into(),
                detail: e.to_string(),
            })?;
        if !health.ready {
            return Err(ProviderError::Transport {
                endpoint: endpoint.into(),
                detail: "sidecar reports not ready".into(),
            });
        }
        Ok(health)
    }

    fn audio_body(input: ClipRef<'_>) -> Result<serde_json::Value, ProviderError> {
        let wav = encode_wav_bytes(input.clip).map_err(|e| ProviderError::Precondition(e.to_string()))?;
        Ok(json!({ "audio": base64::engine::general_purpose::STANDARD.encode(wav) }))
    }
}

impl SentenceEmbedder for HttpProvider {
    fn embed_sentence(&self, text: &str) -> Result<SentenceEmbedding, ProviderError> {
        self.post("/v1/embed/sentence", json!({ "text": text }))
    }
}

impl TextGenerator for HttpProvider {
    fn generate(&self, prompt: &str, params: GenerationParams) -> Result<String, ProviderError> {
        params.validate()?;
        let r: TextResponse = self.post(
            "/v1/generate",
            json!({
                "prompt": prompt,
                "temperature": params.temperature,
                "top_p": params.top_p,
                "max_tokens": params.max_tokens,
            }),
        )?;
        Ok(r.text)
    }
}

impl ModelProvider for HttpProvider {
    fn transcribe(&self, input: ClipRef<'_>) -> Result<TranscriptText, ProviderError> {
        let r: TextResponse = self.post("/v1/asr", Self::audio_body(input)?)?;
        Ok(TranscriptText::new(r.text))
    }

    fn embed_speech(&self, input: ClipRef<'_>) -> Result<SpeechEmbedding, ProviderError> {
        self.post("/v1/embed/speech", Self::audio_body(input)?)
    }

    fn encode_text(&self, _recording: &str, text: &TranscriptText) -> Result<TextEncoding, ProviderError> {
        self.post("/v1/embed/text", json!({ "text": text.normalized }))
    }
}
