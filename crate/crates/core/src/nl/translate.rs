use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{parse_request, serialize_request, SymbolicRequest};

use super::parse::{parse_nl, ParseError};

pub const DEFAULT_SYSTEM_PROMPT: &str = "Convert the user's travel request into a single JSON \
object with keys legs, trip_kind, airline, hotel and budget. Reply with the JSON object only.";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    pub url: String,
    pub model: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_system_prompt")]
    pub system_prompt: String,
}

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_max_retries() -> u32 {
    2
}

fn default_system_prompt() -> String {
    DEFAULT_SYSTEM_PROMPT.to_string()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TranslatorBackend {
    #[default]
    TemplateParser,
    ExternalEndpoint(EndpointConfig),
}

impl TranslatorBackend {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            TranslatorBackend::TemplateParser => Ok(()),
            TranslatorBackend::ExternalEndpoint(c) if c.timeout_ms == 0 => {
                Err("translator timeout_ms must be positive".into())
            }
            TranslatorBackend::ExternalEndpoint(c) if c.url.is_empty() => {
                Err("translator url must not be empty".into())
            }
            TranslatorBackend::ExternalEndpoint(_) => Ok(()),
        }
    }
}

/// Body sent to an external translator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireRequest {
    pub model: String,
    pub system_prompt: String,
    pub user_text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Translation {
    pub request: SymbolicRequest,
    /// Text the backend produced: canonical JSON for the template parser,
    /// the accepted response body for an external endpoint.
    pub raw_output: String,
    /// Whether the first attempt already produced a valid request.
    pub valid_json: bool,
    pub attempts: u32,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum TranslateError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("translator endpoint unreachable: {0}")]
    EndpointUnreachable(String),
    #[error(
        "translator returned no valid request in {attempts} attempts; last error: {last_error}"
    )]
    InvalidOutputAfterRetries { attempts: u32, last_error: String },
    #[error("translation failed: {0}")]
    Other(String),
}

/// Transport to an external translator. Returns the raw response body.
pub trait TranslatorClient: Send + Sync {
    fn complete(&self, request: &WireRequest) -> Result<String, String>;
}

/// Posts the wire request as JSON and reads the body as text.
pub struct HttpClient {
    url: String,
    agent: ureq::Agent,
}

impl HttpClient {
    pub fn new(config: &EndpointConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(config.timeout_ms)))
            .build()
            .into();
        HttpClient {
            url: config.url.clone(),
            agent,
        }
    }
}

impl TranslatorClient for HttpClient {
    fn complete(&self, request: &WireRequest) -> Result<String, String> {
        let mut response = self
            .agent
            .post(&self.url)
            .send_json(request)
            .map_err(|e| e.to_string())?;
        response
            .body_mut()
            .read_to_string()
            .map_err(|e| e.to_string())
    }
}

/// Anything that turns English into a request.
pub trait Translator: Send + Sync {
    fn translate(&self, text: &str) -> Result<Translation, TranslateError>;
}

pub struct TemplateTranslator;

impl Translator for TemplateTranslator {
    fn translate(&self, text: &str) -> Result<Translation, TranslateError> {
        let request = parse_nl(text)?;
        Ok(Translation {
            raw_output: serialize_request(&request),
            request,
            valid_json: true,
            attempts: 1,
        })
    }
}

pub struct ExternalTranslator {
    config: EndpointConfig,
    client: Box<dyn TranslatorClient>,
}

impl ExternalTranslator {
    pub fn new(config: EndpointConfig) -> Self {
        let client = Box::new(HttpClient::new(&config));
        ExternalTranslator { config, client }
    }

    pub fn with_client(config: EndpointConfig, client: Box<dyn TranslatorClient>) -> Self {
        ExternalTranslator { config, client }
    }
}

/// Accepts a response only if it is one JSON object in the canonical schema.
fn validate_output(body: &str) -> Result<SymbolicRequest, String> {
    parse_request(body.trim()).map_err(|e| e.to_string())
}

impl Translator for ExternalTranslator {
    fn translate(&self, text: &str) -> Result<Translation, TranslateError> {
        let wire = WireRequest {
            model: self.config.model.clone(),
            system_prompt: self.config.system_prompt.clone(),
            user_text: text.to_string(),
        };
        let max_attempts = self.config.max_retries + 1;
        let mut last_error = String::new();
        for attempt in 1..=max_attempts {
            let body = self
                .client
                .complete(&wire)
                .map_err(TranslateError::EndpointUnreachable)?;
            match validate_output(&body) {
                Ok(request) => {
                    return Ok(Translation {
                        request,
                        raw_output: body,
                        valid_json: attempt == 1,
                        attempts: attempt,
                    })
                }
                Err(e) => {
                    tracing::debug!(attempt, error = %e, "translator output rejected");
                    last_error = e;
                }
            }
        }
        Err(TranslateError::InvalidOutputAfterRetries {
            attempts: max_attempts,
            last_error,
        })
    }
}

/// Builds the translator a backend describes.
pub fn translator_for(backend: &TranslatorBackend) -> Box<dyn Translator> {
    match backend {
        TranslatorBackend::TemplateParser => Box::new(TemplateTranslator),
        TranslatorBackend::ExternalEndpoint(c) => Box::new(ExternalTranslator::new(c.clone())),
    }
}

pub fn translate(text: &str, backend: &TranslatorBackend) -> Result<Translation, TranslateError> {
    translator_for(backend).translate(text)
}
