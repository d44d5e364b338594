use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: "system".into(), content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: "user".into(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransportKind {
    /// Connection refused, timeout, DNS.
    Transport,
    /// Non-success HTTP status.
    Status,
    /// Body that is not a chat-completions response.
    Malformed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportError {
    pub kind: TransportKind,
    pub message: String,
}

impl std::fmt::Display for TransportError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

/// Something that answers chat requests.
pub trait Endpoint: Send + Sync {
    fn id(&self) -> &str;
    fn model(&self) -> &str;
    fn temperature(&self) -> Option<f64> {
        None
    }
    fn complete(&self, request: &ChatRequest) -> std::result::Result<String, TransportError>;
}

fn default_retries() -> u32 {
    3
}

fn default_parallelism() -> usize {
    1
}

fn default_timeout() -> u64 {
    300
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub id: String,
    pub base_url: String,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    /// Name of the environment variable holding the API key.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointsFile {
    pub endpoints: Vec<EndpointConfig>,
}

impl EndpointsFile {
    /// Reads a TOML or JSON endpoint list.
    pub fn load(path: &Path) -> Result<Vec<EndpointConfig>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: EndpointsFile = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text)?,
            _ => toml::from_str(&text)?,
        };
        let mut seen = std::collections::BTreeSet::new();
        for e in &file.endpoints {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::DuplicateId(e.id.clone()));
            }
            if e.parallelism == 0 {
                return Err(Error::Endpoint(format!("{}: parallelism must be positive", e.id)));
            }
        }
        Ok(file.endpoints)
    }
}

/// Chat-completions client over blocking HTTP.
pub struct HttpEndpoint {
    config: EndpointConfig,
    agent: ureq::Agent,
    api_key: Option<String>,
}

impl HttpEndpoint {
    pub fn new(config: EndpointConfig) -> Result<Self> {
        let api_key = match &config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                Error::Endpoint(format!("{}: environment variable {var} is not set", config.id))
            })?),
            None => None,
        };
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build();
        Ok(HttpEndpoint { config, agent, api_key })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }
}

impl Endpoint for HttpEndpoint {
    fn id(&self) -> &str {
        &self.config.id
    }

    fn model(&self) -> &str {
        &self.config.model
    }

    fn temperature(&self) -> Option<f64> {
        self.config.temperature
    }

    fn complete(&self, request: &ChatRequest) -> std::result::Result<String, TransportError> {
        let mut req = self.agent.post(&self.url()).set("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let body = serde_json::to_value(request).map_err(|e| TransportError {
            kind: TransportKind::Malformed,
            message: e.to_string(),
        })?;
        let resp = match req.send_json(body) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, r)) => {
                let text = r.into_string().unwrap_or_default();
                return Err(TransportError {
                    kind: TransportKind::Status,
                    message: format!("HTTP {code}: {}", text.chars().take(200).collect::<String>()),
                });
            }
            Err(e) => {
                return Err(TransportError {
                    kind: TransportKind::Transport,
                    message: e.to_string(),
                })
            }
        };
        let malformed = |m: String| TransportError { kind: TransportKind::Malformed, message: m };
        let json: serde_json::Value = resp.into_json().map_err(|e| malformed(e.to_string()))?;
        json.pointer("/choices/0/message/content")
            .and_then(|c| c.as_str())
            .map(str::to_string)
            .ok_or_else(|| malformed("response has no choices[0].message.content".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_file_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.toml");
        std::fs::write(
            &p,
            "[[endpoints]]\nid = \"qwen\"\nbase_url = \"http://localhost:8080/v1\"\nmodel = \"qwen3\"\n",
        )
        .unwrap();
        let e = EndpointsFile::load(&p).unwrap();
        assert_eq!(e[0].max_retries, 3);
        assert_eq!(e[0].parallelism, 1);
        assert_eq!(e[0].temperature, None);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.json");
        std::fs::write(
            &p,
            r#"{"endpoints": [{"id": "a", "base_url": "x", "model": "m"}, {"id": "a", "base_url": "y", "model": "m"}]}"#,
        )
        .unwrap();
        assert!(matches!(EndpointsFile::load(&p), Err(Error::DuplicateId(_))));
    }

    #[test]
    fn unreachable_endpoint_is_transport_error() {
        let ep = HttpEndpoint::new(EndpointConfig {
            id: "down".into(),
            base_url: "http://127.0.0.1:9".into(),
            model: "m".into(),
            temperature: None,
            max_retries: 0,
            parallelism: 1,
            timeout_secs: 2,
            api_key_env: None,
        })
        .unwrap();
        let err = ep
            .complete(&ChatRequest {
                model: "m".into(),
                messages: vec![ChatMessage::user("hi")],
                temperature: None,
                seed: 1,
            })
            .unwrap_err();
        assert_eq!(err.kind, TransportKind::Transport);
    }
}
