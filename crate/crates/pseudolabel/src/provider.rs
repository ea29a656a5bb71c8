//! Request/response mapping for each provider, plus transcription
//! extraction.

use serde_json::{json, Value};

use crate::config::{LabelerConfig, ProviderKind, Secret};

#[derive(Debug, Clone, PartialEq)]
pub struct HttpRequest {
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub body: Value,
}

pub struct ImagePayload<'a> {
    pub mime_type: &'a str,
    pub base64: &'a str,
}

pub fn build_request(cfg: &LabelerConfig, secret: &Secret, image: &ImagePayload) -> HttpRequest {
    let (before, after) = cfg.prompt_parts();
    match cfg.provider {
        ProviderKind::Generic => {
            let prompt = [before.as_str(), after.as_str()]
                .into_iter()
                .filter(|s| !s.is_empty())
                .collect::<Vec<_>>()
                .join("\n");
            HttpRequest {
                url: cfg.endpoint.clone(),
                headers: vec![("Authorization".into(), format!("Bearer {}", secret.expose()))],
                body: json!({
                    "model": cfg.model_id,
                    "prompt": prompt,
                    "image": { "mime_type": image.mime_type, "data": image.base64 },
                }),
            }
        }
        ProviderKind::Gemini => {
            let mut parts = Vec::new();
            if !before.is_empty() {
                parts.push(json!({ "text": before }));
            }
            parts.push(json!({ "inline_data": { "mime_type": image.mime_type, "data": image.base64 } }));
            if !after.is_empty() {
                parts.push(json!({ "text": after }));
            }
            HttpRequest {
                url: format!(
                    "{}/v1beta/models/{}:generateContent",
                    cfg.endpoint.trim_end_matches('/'),
                    cfg.model_id
                ),
                headers: vec![("x-goog-api-key".into(), secret.expose().to_string())],
                body: json!({
                    "contents": [{ "role": "user", "parts": parts }],
                    "generationConfig": { "temperature": 0.0 },
                }),
            }
        }
    }
}

/// The raw transcription from a successful response body, before
/// cleanup. `None` when the body has no text where the provider puts it.
pub fn response_text(kind: ProviderKind, body: &str) -> Option<String> {
    let v: Value = serde_json::from_str(body).ok()?;
    match kind {
        ProviderKind::Generic => v.get("text")?.as_str().map(String::from),
        ProviderKind::Gemini => {
            let parts = v.pointer("/candidates/0/content/parts")?.as_array()?;
            let text: String = parts.iter().filter_map(|p| p.get("text")?.as_str()).collect();
            Some(text)
        }
    }
}

/// Strips a surrounding Markdown code fence (with optional language tag)
/// and outer blank lines. Returns `None` when nothing is left.
pub fn clean_transcription(raw: &str) -> Option<String> {
    let trimmed = raw.trim_matches(|c: char| c == '\n' || c == '\r' || c == ' ');
    let inner = match trimmed.find("```") {
        Some(open) => {
            let after_open = &trimmed[open + 3..];
            // skip the language tag line
            let body_start = after_open.find('\n').map_or(after_open.len(), |i| i + 1);
            let body = &after_open[body_start..];
            match body.find("```") {
                Some(close) => &body[..close],
                None => body,
            }
        }
        None => trimmed,
    };
    let text: Vec<&str> = inner.lines().map(|l| l.trim_end()).collect();
    let text = text.join("\n");
    let text = text.trim_matches('\n').to_string();
    (!text.trim().is_empty()).then_some(text)
}
