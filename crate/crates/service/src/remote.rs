use std::time::Duration;

use argchat_core::nlu::{Completion, Encoder, EncoderError, FallbackError};
use serde::{Deserialize, Serialize};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug)]
enum CallError {
    Timeout,
    Unreachable(String),
    Failed(String),
}

#[derive(Debug, Clone)]
struct Endpoint {
    agent: ureq::Agent,
    url: String,
    auth: Option<String>,
}

impl Endpoint {
    fn new(url: &str, auth: Option<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        Self {
            agent,
            url: url.to_owned(),
            auth,
        }
    }

    fn call<Req: Serialize, Resp: for<'de> Deserialize<'de>>(&self, body: &Req) -> Result<Resp, CallError> {
        let mut req = self.agent.post(&self.url);
        if let Some(auth) = &self.auth {
            req = req.header("Authorization", auth);
        }
        let mut resp = req.send_json(body).map_err(classify)?;
        resp.body_mut()
            .read_json::<Resp>()
            .map_err(|e| CallError::Failed(format!("malformed response from {}: {e}", self.url)))
    }
}

fn classify(e: ureq::Error) -> CallError {
    match e {
        ureq::Error::Timeout(_) => CallError::Timeout,
        ureq::Error::StatusCode(code) => CallError::Failed(format!("HTTP status {code}")),
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => CallError::Timeout,
        other => CallError::Unreachable(other.to_string()),
    }
}

#[derive(Serialize)]
struct EncodeRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct EncodeResponse {
    vector: Vec<f32>,
}

/// Sentence encoder behind an HTTP endpoint: `POST {"text"}` returns `{"vector"}`.
#[derive(Debug, Clone)]
pub struct RemoteEncoder {
    endpoint: Endpoint,
    dimension: usize,
}

impl RemoteEncoder {
    /// Probes the endpoint once to learn the vector dimension.
    pub fn connect(url: &str, auth: Option<String>, timeout: Duration) -> Result<Self, EncoderError> {
        let endpoint = Endpoint::new(url, auth, timeout);
        let probe: EncodeResponse = endpoint
            .call(&EncodeRequest { text: "" })
            .map_err(|e| EncoderError::Unavailable(format!("{url}: {}", describe(&e))))?;
        if probe.vector.is_empty() {
            return Err(EncoderError::Unavailable(format!("{url}: returned an empty vector")));
        }
        Ok(Self {
            dimension: probe.vector.len(),
            endpoint,
        })
    }
}

fn describe(e: &CallError) -> String {
    match e {
        CallError::Timeout => "timed out".to_owned(),
        CallError::Unreachable(m) | CallError::Failed(m) => m.clone(),
    }
}

impl Encoder for RemoteEncoder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn encode(&self, text: &str) -> Result<Vec<f32>, EncoderError> {
        let resp: EncodeResponse = self.endpoint.call(&EncodeRequest { text }).map_err(|e| match e {
            CallError::Unreachable(m) => EncoderError::Unavailable(m),
            other => EncoderError::Failed(describe(&other)),
        })?;
        if resp.vector.len() != self.dimension {
            return Err(EncoderError::Dimension {
                expected: self.dimension,
                got: resp.vector.len(),
            });
        }
        Ok(resp.vector)
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    prompt: &'a str,
}

#[derive(Deserialize)]
struct CompletionResponse {
    text: String,
}

/// Text completion behind an HTTP endpoint: `POST {"prompt"}` returns `{"text"}`.
#[derive(Debug, Clone)]
pub struct RemoteCompletion {
    endpoint: Endpoint,
}

impl RemoteCompletion {
    pub fn new(url: &str, auth: Option<String>, timeout: Duration) -> Self {
        Self {
            endpoint: Endpoint::new(url, auth, timeout),
        }
    }
}

impl Completion for RemoteCompletion {
    fn complete(&self, prompt: &str) -> Result<String, FallbackError> {
        self.endpoint
            .call::<_, CompletionResponse>(&CompletionRequest { prompt })
            .map(|r| r.text)
            .map_err(|e| match e {
                CallError::Timeout => FallbackError::Timeout,
                CallError::Unreachable(m) => FallbackError::ClientUnavailable(m),
                CallError::Failed(m) => FallbackError::Failed(m),
            })
    }
}
