//! Completion provider speaking a minimal JSON-over-HTTP protocol.

use std::time::Duration;

use serde_json::{json, Value};

use super::provider::{CompletionRequest, Provider, ProviderError};
use crate::prompt::FENCE;

#[derive(Debug, Clone)]
pub struct HttpProviderConfig {
    pub endpoint: String,
    pub model: String,
    /// Bearer token; read from the environment by the caller.
    pub auth_token: Option<String>,
    pub timeout: Duration,
}

pub struct HttpProvider {
    config: HttpProviderConfig,
    agent: ureq::Agent,
    id: String,
}

impl HttpProvider {
    pub fn new(config: HttpProviderConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let id = format!("http:{}", config.model);
        HttpProvider { config, agent, id }
    }
}

/// Request body sent for one sample.
pub fn request_body(model: &str, request: &CompletionRequest<'_>) -> Value {
    json!({
        "model": model,
        "prompt": request.prompt,
        "temperature": request.params.temperature,
        "max_tokens": request.params.max_tokens,
        "n": 1,
        "stop": [FENCE],
    })
}

/// Accepts `{"text": ...}` or the common `{"choices": [{"text": ...}]}` shape.
pub fn extract_text(body: &Value) -> Result<String, ProviderError> {
    body.get("text")
        .or_else(|| body.pointer("/choices/0/text"))
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| ProviderError::Malformed("no `text` field in response".into()))
}

impl Provider for HttpProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, ProviderError> {
        let mut call = self
            .agent
            .post(&self.config.endpoint)
            .header("Content-Type", "application/json");
        if let Some(token) = &self.config.auth_token {
            call = call.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = call
            .send(request_body(&self.config.model, request).to_string())
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(ProviderError::Status { status, body: text });
        }
        let body: Value = serde_json::from_str(&text).map_err(|e| ProviderError::Malformed(e.to_string()))?;
        extract_text(&body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extracts_text_from_both_shapes() {
        assert_eq!(extract_text(&json!({"text": "a"})).unwrap(), "a");
        assert_eq!(extract_text(&json!({"choices": [{"text": "b"}]})).unwrap(), "b");
        assert!(extract_text(&json!({"choices": []})).is_err());
    }

    #[test]
    fn body_carries_sampling_contract() {
        let params = super::super::SamplingParams::default();
        let req = CompletionRequest {
            prompt: "p",
            params: &params,
            sample_index: 0,
            fingerprint: "f",
        };
        let body = request_body("m", &req);
        assert_eq!(body["temperature"], json!(0.7));
        assert_eq!(body["max_tokens"], json!(256));
        assert_eq!(body["n"], json!(1));
        assert_eq!(body["stop"], json!(["```"]));
    }
}
