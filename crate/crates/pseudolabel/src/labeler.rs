use std::io::Cursor;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use base64::Engine;
use darijakit_core::digest::sha256_hex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cache::{cache_key, Cache, CacheEntry};
use crate::clock::{Clock, RateLimiter, SystemClock};
use crate::config::{LabelerConfig, Secret};
use crate::provider::{build_request, clean_transcription, response_text, ImagePayload};
use crate::transport::{Transport, UreqTransport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudoLabel {
    pub sample_id: String,
    pub text: String,
    pub model_id: String,
    pub latency_ms: u64,
    /// Requests made; 0 when served from the cache.
    pub attempt_count: u32,
    pub raw_response_digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelError {
    #[error("credential rejected (HTTP {status})")]
    Auth { status: u16 },
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("no transcription in response: {detail}")]
    Extraction { detail: String },
    #[error("request failed after {attempts} attempts: {detail}")]
    Transport { attempts: u32, detail: String },
    #[error("HTTP {status}: {detail}")]
    Http { status: u16, detail: String },
    #[error("image does not decode: {detail}")]
    BadImage { detail: String },
}

impl LabelError {
    pub fn is_auth(&self) -> bool {
        matches!(self, Self::Auth { .. })
    }
}

enum Attempt {
    Done(String, String),
    Retry(LabelError),
    Fail(LabelError),
}

pub struct Labeler {
    cfg: LabelerConfig,
    secret: Secret,
    transport: Arc<dyn Transport>,
    clock: Arc<dyn Clock>,
    limiter: RateLimiter,
    cache: Cache,
    requests: AtomicUsize,
}

fn snippet(body: &str) -> String {
    body.chars().take(200).collect()
}

impl Labeler {
    pub fn new(cfg: LabelerConfig, secret: Secret) -> Self {
        Self::with_parts(cfg, secret, Arc::new(UreqTransport::default()), Arc::new(SystemClock::default()))
    }

    pub fn with_parts(cfg: LabelerConfig, secret: Secret, transport: Arc<dyn Transport>, clock: Arc<dyn Clock>) -> Self {
        Self {
            limiter: RateLimiter::new(cfg.rate_limit, clock.clone()),
            cache: Cache::new(&cfg.cache_dir),
            cfg,
            secret,
            transport,
            clock,
            requests: AtomicUsize::new(0),
        }
    }

    pub fn config(&self) -> &LabelerConfig {
        &self.cfg
    }

    /// HTTP requests sent so far.
    pub fn requests_sent(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn cache_key_for(&self, image: &[u8]) -> String {
        cache_key(&sha256_hex(image), &self.cfg.prompt_template, &self.cfg.model_id)
    }

    pub fn label_image(&self, sample_id: &str, image: &[u8]) -> Result<PseudoLabel, LabelError> {
        let key = self.cache_key_for(image);
        if let Some(hit) = self.cache.get(&self.cfg.model_id, &key) {
            return Ok(PseudoLabel {
                sample_id: sample_id.to_string(),
                text: hit.text,
                model_id: self.cfg.model_id.clone(),
                latency_ms: 0,
                attempt_count: 0,
                raw_response_digest: hit.raw_response_digest,
            });
        }

        let format = image::ImageReader::new(Cursor::new(image))
            .with_guessed_format()
            .map_err(|e| LabelError::BadImage { detail: e.to_string() })?;
        let mime = format.format().map(|f| f.to_mime_type()).unwrap_or("application/octet-stream");
        format.into_dimensions().map_err(|e| LabelError::BadImage { detail: e.to_string() })?;
        let b64 = base64::engine::general_purpose::STANDARD.encode(image);
        let req = build_request(&self.cfg, &self.secret, &ImagePayload { mime_type: mime, base64: &b64 });

        let started = self.clock.now();
        let mut attempts = 0u32;
        loop {
            attempts += 1;
            self.limiter.acquire();
            self.requests.fetch_add(1, Ordering::SeqCst);
            let outcome = match self.transport.post_json(&req, Duration::from_millis(self.cfg.timeout_ms)) {
                Err(e) => Attempt::Retry(LabelError::Transport { attempts, detail: self.secret.scrub(&e) }),
                Ok(resp) => match resp.status {
                    200..=299 => match response_text(self.cfg.provider, &resp.body).and_then(|t| clean_transcription(&t)) {
                        Some(text) => Attempt::Done(text, sha256_hex(resp.body.as_bytes())),
                        None => Attempt::Fail(LabelError::Extraction {
                            detail: self.secret.scrub(&snippet(&resp.body)),
                        }),
                    },
                    401 | 403 => Attempt::Fail(LabelError::Auth { status: resp.status }),
                    429 => Attempt::Retry(LabelError::RateLimited { attempts }),
                    500..=599 | 408 => Attempt::Retry(LabelError::Http {
                        status: resp.status,
                        detail: self.secret.scrub(&snippet(&resp.body)),
                    }),
                    s => Attempt::Fail(LabelError::Http { status: s, detail: self.secret.scrub(&snippet(&resp.body)) }),
                },
            };
            match outcome {
                Attempt::Done(text, digest) => {
                    let latency_ms = self.clock.now().saturating_sub(started).as_millis() as u64;
                    let entry = CacheEntry {
                        key,
                        model_id: self.cfg.model_id.clone(),
                        text: text.clone(),
                        raw_response_digest: digest.clone(),
                    };
                    if let Err(e) = self.cache.put(&entry) {
                        tracing::warn!(sample_id, error = %e, "cache write failed");
                    }
                    return Ok(PseudoLabel {
                        sample_id: sample_id.to_string(),
                        text,
                        model_id: self.cfg.model_id.clone(),
                        latency_ms,
                        attempt_count: attempts,
                        raw_response_digest: digest,
                    });
                }
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(e) if attempts > self.cfg.max_retries => {
                    return Err(match e {
                        LabelError::Http { status, detail } => LabelError::Transport {
                            attempts,
                            detail: format!("HTTP {status}: {detail}"),
                        },
                        LabelError::Transport { detail, .. } => LabelError::Transport { attempts, detail },
                        other => other,
                    })
                }
                Attempt::Retry(e) => {
                    let delay = self.cfg.backoff.delay_ms(attempts);
                    tracing::debug!(sample_id, attempt = attempts, delay_ms = delay, error = %e, "retrying");
                    self.clock.sleep(Duration::from_millis(delay));
                }
            }
        }
    }
}
