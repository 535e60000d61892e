//! HTTP provider for OpenAI-compatible chat completion and embedding APIs.

use std::time::Duration;

use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Embedder, LlmError, LlmProvider, PromptBundle};

/// Default environment variable holding the API key.
pub const API_KEY_ENV: &str = "A11Y_REPAIR_API_KEY";

/// Endpoint settings. The key itself is never part of the config; only the
/// name of the variable it is read from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    /// Base URL, e.g. `https://api.openai.com/v1`.
    pub endpoint: String,
    pub model: String,
    pub embedding_model: String,
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub max_parallel: usize,
    pub max_retries: u32,
    pub multimodal: bool,
    pub temperature: Option<f32>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1".into(),
            model: "gpt-4o".into(),
            embedding_model: "text-embedding-3-small".into(),
            api_key_env: API_KEY_ENV.into(),
            timeout_secs: 120,
            max_parallel: 4,
            max_retries: 3,
            multimodal: true,
            temperature: None,
        }
    }
}

struct ApiKey(String);

impl std::fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ApiKey(<redacted>)")
    }
}

#[derive(Debug)]
pub struct OpenAiProvider {
    config: ProviderConfig,
    key: ApiKey,
    client: reqwest::blocking::Client,
}

impl OpenAiProvider {
    /// Builds a provider, reading the key from `config.api_key_env`.
    pub fn from_config(config: ProviderConfig) -> Result<Self, LlmError> {
        let key = std::env::var(&config.api_key_env)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| LlmError::MissingApiKey(config.api_key_env.clone()))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs.max(1)))
            .build()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        Ok(Self { config, key: ApiKey(key), client })
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    fn url(&self, path: &str) -> String {
        format!("{}/{}", self.config.endpoint.trim_end_matches('/'), path)
    }

    fn post(&self, path: &str, body: &Value) -> Result<Value, LlmError> {
        let resp = self
            .client
            .post(self.url(path))
            .bearer_auth(&self.key.0)
            .json(body)
            .send()
            .map_err(map_transport)?;
        let status = resp.status();
        let text = resp.text().map_err(map_transport)?;
        if status.as_u16() == 429 {
            return Err(LlmError::RateLimited);
        }
        if status.is_server_error() {
            return Err(LlmError::Transport(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(LlmError::Rejected(format!("HTTP {status}: {}", truncate(&text, 300))));
        }
        serde_json::from_str(&text).map_err(|e| LlmError::Rejected(format!("malformed response body: {e}")))
    }

    pub(crate) fn request_body(&self, bundle: &PromptBundle) -> Value {
        let mut parts = vec![json!({ "type": "text", "text": bundle.body() })];
        for a in &bundle.attachments {
            let data = base64::engine::general_purpose::STANDARD.encode(&a.bytes);
            parts.push(json!({
                "type": "image_url",
                "image_url": { "url": format!("data:{};base64,{data}", a.media_type) }
            }));
        }
        let mut messages = Vec::new();
        if !bundle.persona.is_empty() {
            messages.push(json!({ "role": "system", "content": bundle.persona }));
        }
        messages.push(json!({ "role": "user", "content": parts }));
        let mut body = json!({ "model": self.config.model, "messages": messages });
        if let Some(t) = self.config.temperature {
            body["temperature"] = json!(t);
        }
        body
    }
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

fn map_transport(e: reqwest::Error) -> LlmError {
    if e.is_timeout() {
        LlmError::Timeout
    } else {
        LlmError::Transport(e.to_string())
    }
}

impl LlmProvider for OpenAiProvider {
    fn name(&self) -> &str {
        &self.config.model
    }

    fn supports_images(&self) -> bool {
        self.config.multimodal
    }

    fn complete(&self, bundle: &PromptBundle) -> Result<String, LlmError> {
        let v = self.post("chat/completions", &self.request_body(bundle))?;
        v["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| LlmError::Rejected("response has no message content".into()))
    }
}

impl Embedder for OpenAiProvider {
    fn embed(&self, text: &str) -> Result<Vec<f32>, LlmError> {
        let v = self.post("embeddings", &json!({ "model": self.config.embedding_model, "input": text }))?;
        let arr = v["data"][0]["embedding"]
            .as_array()
            .ok_or_else(|| LlmError::Rejected("response has no embedding".into()))?;
        arr.iter()
            .map(|x| x.as_f64().map(|f| f as f32).ok_or_else(|| LlmError::Rejected("non-numeric embedding".into())))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{Attachment, MarkerProtocol, Segment, TemplateKind};

    #[test]
    fn missing_key_is_reported_by_variable_name() {
        let cfg = ProviderConfig { api_key_env: "A11Y_MEND_TEST_UNSET_KEY".into(), ..Default::default() };
        assert_eq!(
            OpenAiProvider::from_config(cfg).unwrap_err(),
            LlmError::MissingApiKey("A11Y_MEND_TEST_UNSET_KEY".into())
        );
    }

    #[test]
    fn key_never_leaks_through_debug_or_config() {
        std::env::set_var("A11Y_MEND_TEST_KEY", "sk-secret-value");
        let cfg = ProviderConfig { api_key_env: "A11Y_MEND_TEST_KEY".into(), ..Default::default() };
        let p = OpenAiProvider::from_config(cfg).unwrap();
        assert!(!format!("{p:?}").contains("sk-secret"));
        assert!(!serde_json::to_string(p.config()).unwrap().contains("sk-secret"));
        let b = PromptBundle {
            template: TemplateKind::Initial,
            persona: "persona".into(),
            segments: vec![Segment::fixed("hi")],
            attachments: vec![Attachment { source: "s.png".into(), media_type: "image/png".into(), bytes: vec![0, 1] }],
            markers: MarkerProtocol::default(),
        };
        let body = p.request_body(&b);
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][1]["content"][1]["image_url"]["url"], "data:image/png;base64,AAE=");
        assert!(!body.to_string().contains("sk-secret"));
    }
}
