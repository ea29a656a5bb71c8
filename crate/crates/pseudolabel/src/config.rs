use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Reconstructed transcription prompt. `{image}` marks where the image
/// goes relative to the instructions.
pub const DEFAULT_PROMPT: &str = "{image}\nTranscribe all visible Arabic and Moroccan Darija text in this image exactly as written. \
Preserve line breaks. Keep any diacritics, Latin words and digits as they appear. \
Output only the transcribed text, with no commentary, translation or formatting.";

pub const IMAGE_PLACEHOLDER: &str = "{image}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    /// `POST endpoint` with `{model, prompt, image: {mime_type, data}}`,
    /// answering `{text}`. Bearer token auth.
    Generic,
    /// Gemini `generateContent`; `endpoint` is the API base URL.
    Gemini,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Backoff {
    pub initial_ms: u64,
    pub multiplier: f64,
    pub max_ms: u64,
}

impl Default for Backoff {
    fn default() -> Self {
        Self {
            initial_ms: 500,
            multiplier: 2.0,
            max_ms: 30_000,
        }
    }
}

impl Backoff {
    /// Delay before retry number `retry` (1-based).
    pub fn delay_ms(&self, retry: u32) -> u64 {
        let d = self.initial_ms as f64 * self.multiplier.powi(retry.saturating_sub(1) as i32);
        (d.min(self.max_ms as f64)).max(0.0) as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelerConfig {
    pub provider: ProviderKind,
    pub endpoint: String,
    pub model_id: String,
    /// Name of the environment variable holding the API key.
    pub credential_env: String,
    pub prompt_template: String,
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub backoff: Backoff,
    /// Requests per minute, over a sliding 60 s window.
    pub rate_limit: u32,
    pub concurrency: usize,
    pub timeout_ms: u64,
    pub cache_dir: PathBuf,
}

impl Default for LabelerConfig {
    fn default() -> Self {
        Self {
            provider: ProviderKind::Gemini,
            endpoint: "https://generativelanguage.googleapis.com".into(),
            model_id: "gemini-2.0-flash".into(),
            credential_env: "DARIJAKIT_API_KEY".into(),
            prompt_template: DEFAULT_PROMPT.into(),
            max_retries: 4,
            backoff: Backoff::default(),
            rate_limit: 60,
            concurrency: 4,
            timeout_ms: 60_000,
            cache_dir: PathBuf::from("cache"),
        }
    }
}

impl LabelerConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.rate_limit == 0 {
            out.push("labeler.rate_limit must be > 0".to_string());
        }
        if self.prompt_template.trim().is_empty() {
            out.push("labeler.prompt_template is empty".to_string());
        }
        if self.concurrency == 0 {
            out.push("labeler.concurrency must be > 0".to_string());
        }
        if self.endpoint.trim().is_empty() {
            out.push("labeler.endpoint is empty".to_string());
        }
        if self.model_id.trim().is_empty() {
            out.push("labeler.model_id is empty".to_string());
        }
        if !(self.backoff.multiplier.is_finite() && self.backoff.multiplier >= 1.0) {
            out.push("labeler.backoff.multiplier must be >= 1".to_string());
        }
        out
    }

    /// Prompt text around the image: (before, after).
    pub fn prompt_parts(&self) -> (String, String) {
        match self.prompt_template.split_once(IMAGE_PLACEHOLDER) {
            Some((a, b)) => (a.trim().to_string(), b.trim().to_string()),
            None => (String::new(), self.prompt_template.trim().to_string()),
        }
    }
}

/// An API key. Never printed; use [`Secret::scrub`] on any text that
/// might echo it back.
#[derive(Clone)]
pub struct Secret(String);

impl Secret {
    pub fn new(value: impl Into<String>) -> Self {
        Self(value.into())
    }

    pub fn from_env(var: &str) -> Option<Self> {
        std::env::var(var).ok().filter(|v| !v.is_empty()).map(Self)
    }

    pub fn expose(&self) -> &str {
        &self.0
    }

    pub fn scrub(&self, text: &str) -> String {
        if self.0.is_empty() {
            text.to_string()
        } else {
            text.replace(&self.0, "***")
        }
    }
}

impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Secret(***)")
    }
}
