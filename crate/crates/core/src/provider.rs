//! Text-generation providers and shared provider plumbing.

use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ProviderError {
    #[error("request to {url} failed: {message}")]
    Http { url: String, message: String },
    #[error("provider returned an unusable response: {0}")]
    BadResponse(String),
    #[error("provider failed: {0}")]
    Failed(String),
}

/// Posts a JSON body and decodes a JSON reply.
pub(crate) fn post_json<Req: Serialize, Resp: for<'de> Deserialize<'de>>(
    client: &reqwest::blocking::Client,
    url: &str,
    body: &Req,
) -> Result<Resp, ProviderError> {
    let http = |e: reqwest::Error| ProviderError::Http {
        url: url.to_string(),
        message: e.to_string(),
    };
    let resp = client.post(url).json(body).send().map_err(http)?;
    let resp = resp.error_for_status().map_err(http)?;
    resp.json().map_err(|e| ProviderError::BadResponse(e.to_string()))
}

pub(crate) fn http_client(timeout: Duration) -> reqwest::blocking::Client {
    reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .expect("http client builds")
}

/// Produces text for a prompt.
pub trait GenerationProvider: Send + Sync {
    fn model_id(&self) -> String;
    fn generate(&self, prompt: &str, temperature: f64) -> Result<String, ProviderError>;
}

/// Replies with the prompt itself. Useful for checking prompt plumbing.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoGenerator;

impl GenerationProvider for EchoGenerator {
    fn model_id(&self) -> String {
        "stub-echo".into()
    }

    fn generate(&self, prompt: &str, _temperature: f64) -> Result<String, ProviderError> {
        Ok(prompt.to_string())
    }
}

/// Replies with a fixed string regardless of the prompt.
#[derive(Debug, Clone, Default)]
pub struct FixedGenerator(pub String);

impl GenerationProvider for FixedGenerator {
    fn model_id(&self) -> String {
        "stub-fixed".into()
    }

    fn generate(&self, _prompt: &str, _temperature: f64) -> Result<String, ProviderError> {
        Ok(self.0.clone())
    }
}

/// Wraps a closure; handy for fault injection in tests.
pub struct FnGenerator<F>(pub F);

impl<F> GenerationProvider for FnGenerator<F>
where
    F: Fn(&str) -> Result<String, ProviderError> + Send + Sync,
{
    fn model_id(&self) -> String {
        "stub-fn".into()
    }

    fn generate(&self, prompt: &str, _temperature: f64) -> Result<String, ProviderError> {
        (self.0)(prompt)
    }
}

/// Records every prompt it receives, replying with the echo.
#[derive(Debug, Default)]
pub struct RecordingGenerator {
    pub prompts: Mutex<Vec<String>>,
}

impl GenerationProvider for RecordingGenerator {
    fn model_id(&self) -> String {
        "stub-recording".into()
    }

    fn generate(&self, prompt: &str, _temperature: f64) -> Result<String, ProviderError> {
        self.prompts.lock().expect("not poisoned").push(prompt.to_string());
        Ok(prompt.to_string())
    }
}

#[derive(Serialize)]
struct GenerateRequest<'a> {
    prompt: &'a str,
    temperature: f64,
    model: &'a str,
}

#[derive(Deserialize)]
struct GenerateReply {
    text: String,
}

/// Generation over HTTP: `POST {prompt, temperature, model}` returning `{text}`.
pub struct HttpGenerator {
    url: String,
    model: String,
    client: reqwest::blocking::Client,
}

impl HttpGenerator {
    pub fn new(url: impl Into<String>, model: impl Into<String>, timeout: Duration) -> Self {
        HttpGenerator {
            url: url.into(),
            model: model.into(),
            client: http_client(timeout),
        }
    }
}

impl GenerationProvider for HttpGenerator {
    fn model_id(&self) -> String {
        self.model.clone()
    }

    fn generate(&self, prompt: &str, temperature: f64) -> Result<String, ProviderError> {
        let reply: GenerateReply = post_json(
            &self.client,
            &self.url,
            &GenerateRequest {
                prompt,
                temperature,
                model: &self.model,
            },
        )?;
        Ok(reply.text)
    }
}
