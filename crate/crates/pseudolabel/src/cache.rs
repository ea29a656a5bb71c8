//! Response cache: `cache_dir/{model_id}/{key}.json`, where the key is the
//! SHA-256 of image digest, prompt digest and model id.

use std::fs;
use std::path::{Path, PathBuf};

use darijakit_core::dataset::write_atomic;
use darijakit_core::digest::sha256_hex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub model_id: String,
    pub text: String,
    pub raw_response_digest: String,
}

pub fn cache_key(image_digest: &str, prompt: &str, model_id: &str) -> String {
    sha256_hex(format!("{image_digest}\n{}\n{model_id}", sha256_hex(prompt.as_bytes())).as_bytes())
}

/// Model ids may contain `/` or `:`; keep the directory name flat.
fn model_dir(model_id: &str) -> String {
    model_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn path(&self, model_id: &str, key: &str) -> PathBuf {
        self.root.join(model_dir(model_id)).join(format!("{key}.json"))
    }

    pub fn get(&self, model_id: &str, key: &str) -> Option<CacheEntry> {
        let raw = fs::read_to_string(self.path(model_id, key)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&raw).ok()?;
        (entry.key == key && entry.model_id == model_id).then_some(entry)
    }

    pub fn put(&self, entry: &CacheEntry) -> std::io::Result<()> {
        let path = self.path(&entry.model_id, &entry.key);
        fs::create_dir_all(path.parent().unwrap_or(Path::new(".")))?;
        let body = serde_json::to_vec_pretty(entry).expect("cache entry serializes");
        write_atomic(&path, &body).map_err(|e| std::io::Error::other(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_separate_every_input() {
        let k = cache_key("abc", "prompt", "m1");
        assert_eq!(k, cache_key("abc", "prompt", "m1"));
        assert_ne!(k, cache_key("abd", "prompt", "m1"));
        assert_ne!(k, cache_key("abc", "prompt!", "m1"));
        assert_ne!(k, cache_key("abc", "prompt", "m2"));
        assert_eq!(k.len(), 64);
    }

    #[test]
    fn round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let cache = Cache::new(tmp.path());
        let e = CacheEntry {
            key: cache_key("x", "p", "models/gemini:flash"),
            model_id: "models/gemini:flash".into(),
            text: "سلام".into(),
            raw_response_digest: "d".into(),
        };
        assert!(cache.get(&e.model_id, &e.key).is_none());
        cache.put(&e).unwrap();
        assert_eq!(cache.get(&e.model_id, &e.key), Some(e.clone()));
        assert!(cache.path(&e.model_id, &e.key).starts_with(tmp.path().join("models_gemini_flash")));
    }
}
