#![allow(dead_code)]

pub mod server;

use std::collections::HashMap;
use std::io::Cursor;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use darijakit_core::dataset::{Manifest, Provenance, SampleRecord};
use darijakit_core::digest::sha256_hex;
use darijakit_pseudolabel::clock::MockClock;
use darijakit_pseudolabel::provider::HttpRequest;
use darijakit_pseudolabel::transport::{HttpResponse, Transport};
use darijakit_pseudolabel::{LabelerConfig, Labeler, ProviderKind, Secret};

pub const KEY: &str = "sk-live-7f3a9c0e5b21d4";

pub fn png(seed: u8) -> Vec<u8> {
    let img = image::RgbImage::from_fn(12, 8, |x, y| image::Rgb([seed, x as u8 * 9, y as u8 * 17]));
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png).unwrap();
    out.into_inner()
}

/// `n` unlabeled images under `dir/images`, in memory as a manifest.
pub fn unlabeled_manifest(dir: &Path, n: u8) -> Manifest {
    std::fs::create_dir_all(dir.join("images")).unwrap();
    let records = (0..n)
        .map(|i| {
            let bytes = png(i);
            let path = dir.join("images").join(format!("page{i}.png"));
            std::fs::write(&path, &bytes).unwrap();
            SampleRecord {
                sample_id: format!("page{i}"),
                image_path: path,
                image_sha256: sha256_hex(&bytes),
                width: 12,
                height: 8,
                ground_truth: String::new(),
                line_boxes: vec![],
                word_boxes: vec![],
                provenance: Provenance::SocialMedia,
                render_meta: None,
            }
        })
        .collect();
    Manifest::new(dir, records)
}

type Script = dyn Fn(usize, &str) -> Result<HttpResponse, String> + Send + Sync;

/// Answers by image (base64 data) and per-image call number.
pub struct MockTransport {
    script: Box<Script>,
    calls: Mutex<HashMap<String, usize>>,
    total: AtomicUsize,
    pub seen: Mutex<Vec<HttpRequest>>,
}

impl MockTransport {
    pub fn new(script: impl Fn(usize, &str) -> Result<HttpResponse, String> + Send + Sync + 'static) -> Self {
        Self { script: Box::new(script), calls: Mutex::default(), total: AtomicUsize::new(0), seen: Mutex::default() }
    }

    pub fn total(&self) -> usize {
        self.total.load(Ordering::SeqCst)
    }
}

impl Transport for MockTransport {
    fn post_json(&self, req: &HttpRequest, _timeout: Duration) -> Result<HttpResponse, String> {
        self.total.fetch_add(1, Ordering::SeqCst);
        self.seen.lock().unwrap().push(req.clone());
        let data = req.body["image"]["data"].as_str().unwrap_or_default().to_string();
        let n = {
            let mut calls = self.calls.lock().unwrap();
            let c = calls.entry(data.clone()).or_insert(0);
            *c += 1;
            *c
        };
        (self.script)(n, &data)
    }
}

pub fn ok(text: &str) -> Result<HttpResponse, String> {
    Ok(HttpResponse { status: 200, body: serde_json::json!({ "text": text }).to_string() })
}

pub fn status(code: u16, body: &str) -> Result<HttpResponse, String> {
    Ok(HttpResponse { status: code, body: body.to_string() })
}

pub fn config(cache: &Path) -> LabelerConfig {
    LabelerConfig {
        provider: ProviderKind::Generic,
        endpoint: "http://mock/label".into(),
        model_id: "mock-vlm".into(),
        cache_dir: cache.to_path_buf(),
        concurrency: 3,
        ..Default::default()
    }
}

pub fn labeler(cfg: LabelerConfig, transport: Arc<MockTransport>) -> (Labeler, Arc<MockClock>) {
    let clock = Arc::new(MockClock::default());
    (Labeler::with_parts(cfg, Secret::new(KEY), transport, clock.clone()), clock)
}
