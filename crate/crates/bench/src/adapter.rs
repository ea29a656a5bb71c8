//! Model adapters: where hypotheses come from.

use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Duration;

use base64::Engine;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use wait_timeout::ChildExt;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdapterError {
    #[error("timed out after {0} ms")]
    Timeout(u64),
    #[error("{0}")]
    Failed(String),
    /// The model cannot be reached at all; the run aborts.
    #[error("adapter unavailable: {0}")]
    Unavailable(String),
}

pub struct SampleInput<'a> {
    pub sample_id: &'a str,
    pub image_path: &'a Path,
    pub ground_truth: &'a str,
}

/// Produces one hypothesis per sample. Implementations keep no state
/// between samples.
pub trait ModelAdapter: Send + Sync {
    fn model_id(&self) -> String;
    fn transcribe(&self, sample: &SampleInput) -> Result<String, AdapterError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdapterKind {
    EchoOracle,
    NoisyOracle,
    Subprocess,
    HttpEndpoint,
}

/// Serializable adapter description, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdapterSpec {
    pub kind: AdapterKind,
    /// Per-character corruption probability (noisy_oracle).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Program and leading arguments; the image path is appended (subprocess).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    /// Overrides the derived model name in reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    /// Extra attempts after a failed or timed-out one.
    #[serde(default = "default_retries")]
    pub max_retries: u32,
}

fn default_timeout_ms() -> u64 {
    60_000
}

fn default_retries() -> u32 {
    1
}

impl AdapterSpec {
    pub fn new(kind: AdapterKind) -> Self {
        Self {
            kind,
            p: None,
            seed: None,
            command: None,
            url: None,
            prompt: None,
            model_id: None,
            timeout_ms: default_timeout_ms(),
            max_retries: default_retries(),
        }
    }

    pub fn echo() -> Self {
        Self::new(AdapterKind::EchoOracle)
    }

    pub fn noisy(p: f64, seed: u64) -> Self {
        Self { p: Some(p), seed: Some(seed), ..Self::new(AdapterKind::NoisyOracle) }
    }

    pub fn subprocess(command: Vec<String>) -> Self {
        Self { command: Some(command), ..Self::new(AdapterKind::Subprocess) }
    }

    pub fn http(url: impl Into<String>) -> Self {
        Self { url: Some(url.into()), ..Self::new(AdapterKind::HttpEndpoint) }
    }

    /// Parses the command-line form:
    /// `echo`, `noisy:p=0.1,seed=7`, `subprocess:<command line>`,
    /// `http:<url>` or `@adapter.toml`.
    pub fn parse(s: &str) -> Result<Self, String> {
        if let Some(path) = s.strip_prefix('@') {
            let raw = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
            return toml::from_str(&raw).map_err(|e| format!("{path}: {e}"));
        }
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "echo" | "echo_oracle" if rest.is_empty() => Ok(Self::echo()),
            "noisy" | "noisy_oracle" => {
                let (mut p, mut seed) = (None, 0u64);
                for kv in rest.split(',').filter(|kv| !kv.is_empty()) {
                    match kv.split_once('=') {
                        Some(("p", v)) => p = Some(v.parse::<f64>().map_err(|e| format!("p: {e}"))?),
                        Some(("seed", v)) => seed = v.parse().map_err(|e| format!("seed: {e}"))?,
                        _ => return Err(format!("unknown noisy option `{kv}` (expected p=, seed=)")),
                    }
                }
                Ok(Self::noisy(p.ok_or("noisy adapter needs p=<probability>")?, seed))
            }
            "subprocess" | "cmd" => {
                let argv = shlex::split(rest).filter(|a| !a.is_empty()).ok_or("subprocess adapter needs a command")?;
                Ok(Self::subprocess(argv))
            }
            "http" | "http_endpoint" if !rest.is_empty() => Ok(Self::http(rest)),
            _ => Err(format!("unknown adapter `{s}` (echo | noisy:p=..,seed=.. | subprocess:<cmd> | http:<url> | @file.toml)")),
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        match self.kind {
            AdapterKind::EchoOracle => {}
            AdapterKind::NoisyOracle => match self.p {
                Some(p) if (0.0..=1.0).contains(&p) => {}
                Some(p) => errs.push(format!("adapter.p: {p} is outside [0, 1]")),
                None => errs.push("adapter.p: required for noisy_oracle".into()),
            },
            AdapterKind::Subprocess => {
                if self.command.as_ref().is_none_or(|c| c.is_empty()) {
                    errs.push("adapter.command: required for subprocess".into());
                }
            }
            AdapterKind::HttpEndpoint => match &self.url {
                Some(u) if u.starts_with("http://") || u.starts_with("https://") => {}
                Some(u) => errs.push(format!("adapter.url: `{u}` is not an http(s) URL")),
                None => errs.push("adapter.url: required for http_endpoint".into()),
            },
        }
        if self.timeout_ms == 0 {
            errs.push("adapter.timeout_ms: must be positive".into());
        }
        errs
    }

    pub fn build(&self) -> Result<Box<dyn ModelAdapter>, String> {
        let errs = self.validate();
        if !errs.is_empty() {
            return Err(errs.join("; "));
        }
        let timeout = Duration::from_millis(self.timeout_ms);
        let adapter: Box<dyn ModelAdapter> = match self.kind {
            AdapterKind::EchoOracle => Box::new(EchoOracle),
            AdapterKind::NoisyOracle => Box::new(NoisyOracle { p: self.p.unwrap_or(0.0), seed: self.seed.unwrap_or(0) }),
            AdapterKind::Subprocess => Box::new(Subprocess { argv: self.command.clone().unwrap_or_default(), timeout }),
            AdapterKind::HttpEndpoint => Box::new(HttpEndpoint::new(self.url.clone().unwrap_or_default(), self.prompt.clone(), timeout)),
        };
        Ok(match &self.model_id {
            Some(id) => Box::new(Named { id: id.clone(), inner: adapter }),
            None => adapter,
        })
    }
}

struct Named {
    id: String,
    inner: Box<dyn ModelAdapter>,
}

impl ModelAdapter for Named {
    fn model_id(&self) -> String {
        self.id.clone()
    }

    fn transcribe(&self, sample: &SampleInput) -> Result<String, AdapterError> {
        self.inner.transcribe(sample)
    }
}

pub struct EchoOracle;

impl ModelAdapter for EchoOracle {
    fn model_id(&self) -> String {
        "echo_oracle".into()
    }

    fn transcribe(&self, sample: &SampleInput) -> Result<String, AdapterError> {
        Ok(sample.ground_truth.to_string())
    }
}

/// Replacement letters: U+0621..U+063A and U+0641..U+064A.
pub fn noise_alphabet() -> Vec<char> {
    ('\u{0621}'..='\u{063A}').chain('\u{0641}'..='\u{064A}').collect()
}

/// Corrupts each character of the ground truth independently with
/// probability `p`, replacing it with a different letter from
/// [`noise_alphabet`].
///
/// The generator is ChaCha8 seeded with SHA-256(`"{seed}:{sample_id}"`),
/// so a sample's hypothesis does not depend on which other samples ran or
/// in what order. For every character one `f64` is drawn; when it is below
/// `p`, one index is drawn with `random_range(0..k)` where `k` is the
/// alphabet size minus one if the original is in the alphabet (its slot is
/// skipped) and the full size otherwise.
pub struct NoisyOracle {
    pub p: f64,
    pub seed: u64,
}

impl NoisyOracle {
    pub fn rng_for(seed: u64, sample_id: &str) -> ChaCha8Rng {
        let digest: [u8; 32] = Sha256::digest(format!("{seed}:{sample_id}").as_bytes()).into();
        ChaCha8Rng::from_seed(digest)
    }

    pub fn corrupt(&self, sample_id: &str, text: &str) -> String {
        let alphabet = noise_alphabet();
        let mut rng = Self::rng_for(self.seed, sample_id);
        text.chars()
            .map(|c| {
                if rng.random::<f64>() >= self.p {
                    return c;
                }
                match alphabet.iter().position(|&a| a == c) {
                    Some(own) => {
                        let i = rng.random_range(0..alphabet.len() - 1);
                        alphabet[if i >= own { i + 1 } else { i }]
                    }
                    None => alphabet[rng.random_range(0..alphabet.len())],
                }
            })
            .collect()
    }
}

impl ModelAdapter for NoisyOracle {
    fn model_id(&self) -> String {
        format!("noisy_oracle(p={},seed={})", self.p, self.seed)
    }

    fn transcribe(&self, sample: &SampleInput) -> Result<String, AdapterError> {
        Ok(self.corrupt(sample.sample_id, sample.ground_truth))
    }
}

/// Runs `argv... <image path>` and reads the transcription from stdout.
pub struct Subprocess {
    pub argv: Vec<String>,
    pub timeout: Duration,
}

fn drain(mut r: impl Read + Send + 'static) -> std::thread::JoinHandle<Vec<u8>> {
    std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = r.read_to_end(&mut buf);
        buf
    })
}

fn strip_final_newline(mut s: String) -> String {
    if s.ends_with('\n') {
        s.pop();
        if s.ends_with('\r') {
            s.pop();
        }
    }
    s
}

impl ModelAdapter for Subprocess {
    fn model_id(&self) -> String {
        let prog = Path::new(&self.argv[0]).file_name().and_then(|n| n.to_str()).unwrap_or(&self.argv[0]);
        format!("subprocess:{prog}")
    }

    fn transcribe(&self, sample: &SampleInput) -> Result<String, AdapterError> {
        let mut child = Command::new(&self.argv[0])
            .args(&self.argv[1..])
            .arg(sample.image_path)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied => {
                    AdapterError::Unavailable(format!("{}: {e}", self.argv[0]))
                }
                _ => AdapterError::Failed(format!("spawn {}: {e}", self.argv[0])),
            })?;
        let out = drain(child.stdout.take().expect("piped"));
        let err = drain(child.stderr.take().expect("piped"));
        let status = match child.wait_timeout(self.timeout).map_err(|e| AdapterError::Failed(e.to_string()))? {
            Some(s) => s,
            None => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(AdapterError::Timeout(self.timeout.as_millis() as u64));
            }
        };
        let stdout = out.join().unwrap_or_default();
        let stderr = err.join().unwrap_or_default();
        if !status.success() {
            let tail: String = String::from_utf8_lossy(&stderr).trim().chars().rev().take(300).collect::<Vec<_>>().into_iter().rev().collect();
            return Err(AdapterError::Failed(format!("exit {status}: {tail}")));
        }
        String::from_utf8(stdout)
            .map(strip_final_newline)
            .map_err(|_| AdapterError::Failed("stdout is not UTF-8".into()))
    }
}

/// `POST {image: base64, prompt?} -> {text}`.
pub struct HttpEndpoint {
    url: String,
    prompt: Option<String>,
    timeout: Duration,
    agent: ureq::Agent,
}

impl HttpEndpoint {
    pub fn new(url: String, prompt: Option<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
        Self { url, prompt, timeout, agent }
    }
}

#[derive(Deserialize)]
struct HttpReply {
    text: String,
}

impl ModelAdapter for HttpEndpoint {
    fn model_id(&self) -> String {
        format!("http:{}", self.url)
    }

    fn transcribe(&self, sample: &SampleInput) -> Result<String, AdapterError> {
        let bytes = std::fs::read(sample.image_path)
            .map_err(|e| AdapterError::Failed(format!("{}: {e}", sample.image_path.display())))?;
        let mut body = serde_json::json!({ "image": base64::engine::general_purpose::STANDARD.encode(bytes) });
        if let Some(p) = &self.prompt {
            body["prompt"] = p.clone().into();
        }
        let sent = self.agent.post(&self.url).config().timeout_global(Some(self.timeout)).build().send_json(&body);
        let mut resp = match sent {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => return Err(AdapterError::Timeout(self.timeout.as_millis() as u64)),
            Err(e @ (ureq::Error::ConnectionFailed | ureq::Error::HostNotFound)) => {
                return Err(AdapterError::Unavailable(format!("{}: {e}", self.url)))
            }
            Err(ureq::Error::Io(e)) if e.kind() == std::io::ErrorKind::ConnectionRefused => {
                return Err(AdapterError::Unavailable(format!("{}: {e}", self.url)))
            }
            Err(e) => return Err(AdapterError::Failed(e.to_string())),
        };
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| match e {
            ureq::Error::Timeout(_) => AdapterError::Timeout(self.timeout.as_millis() as u64),
            e => AdapterError::Failed(e.to_string()),
        })?;
        if !(200..300).contains(&status) {
            return Err(AdapterError::Failed(format!("HTTP {status}: {}", text.chars().take(200).collect::<String>())));
        }
        serde_json::from_str::<HttpReply>(&text)
            .map(|r| r.text)
            .map_err(|e| AdapterError::Failed(format!("bad response: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(AdapterSpec::parse("echo").unwrap(), AdapterSpec::echo());
        assert_eq!(AdapterSpec::parse("noisy:p=0.1,seed=42").unwrap(), AdapterSpec::noisy(0.1, 42));
        assert_eq!(
            AdapterSpec::parse("subprocess:python3 'my ocr.py' --fast").unwrap().command.unwrap(),
            ["python3", "my ocr.py", "--fast"]
        );
        assert_eq!(AdapterSpec::parse("http:http://h:1/ocr").unwrap().url.as_deref(), Some("http://h:1/ocr"));
        assert!(AdapterSpec::parse("noisy:seed=1").is_err());
        assert!(AdapterSpec::parse("gpt").is_err());
        assert!(AdapterSpec::parse("subprocess:").is_err());
    }

    #[test]
    fn toml_form_rejects_unknown_keys() {
        let s: AdapterSpec = toml::from_str("kind = \"noisy_oracle\"\np = 0.2\nseed = 3").unwrap();
        assert_eq!(s, AdapterSpec::noisy(0.2, 3));
        assert!(toml::from_str::<AdapterSpec>("kind = \"echo_oracle\"\nspeed = 3").is_err());
        assert!(!AdapterSpec::noisy(1.5, 0).validate().is_empty());
    }

    #[test]
    fn noise_edges() {
        let text = "سلام عليكم 123";
        assert_eq!(NoisyOracle { p: 0.0, seed: 1 }.corrupt("a", text), text);
        let all = NoisyOracle { p: 1.0, seed: 1 }.corrupt("a", text);
        assert_eq!(all.chars().count(), text.chars().count());
        assert!(all.chars().zip(text.chars()).all(|(x, y)| x != y));
        let n = NoisyOracle { p: 0.3, seed: 9 };
        assert_eq!(n.corrupt("a", text), n.corrupt("a", text));
        assert_ne!(n.corrupt("a", &text.repeat(5)), n.corrupt("b", &text.repeat(5)));
    }
}
