#[allow(dead_code)]
mod common;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use common::server::serve;
use common::{png, KEY};
use darijakit_pseudolabel::clock::MockClock;
use darijakit_pseudolabel::provider::HttpRequest;
use darijakit_pseudolabel::transport::{Transport, UreqTransport};
use darijakit_pseudolabel::{LabelError, Labeler, LabelerConfig, ProviderKind, Secret};

fn gemini(text: &str) -> String {
    serde_json::json!({ "candidates": [{ "content": { "parts": [{ "text": text }] } }] }).to_string()
}

fn inline(body: &serde_json::Value, field: &str) -> String {
    let parts = body.pointer("/contents/0/parts").and_then(|p| p.as_array()).cloned().unwrap_or_default();
    parts.iter().find_map(|p| p["inline_data"][field].as_str().map(String::from)).unwrap_or_default()
}

#[test]
fn gemini_round_trip_over_http() {
    let counts = Arc::new(Mutex::new(HashMap::<String, usize>::new()));
    let c = counts.clone();
    let server = serve(move |r| {
        let data = inline(&r.body, "data");
        let mut c = c.lock().unwrap();
        let n = c.entry(data).or_insert(0);
        *n += 1;
        if *n == 1 {
            (429, "{}".into())
        } else {
            (200, gemini("```\nمرحبا بيكم\n```"))
        }
    });
    let tmp = tempfile::tempdir().unwrap();
    let cfg = LabelerConfig {
        provider: ProviderKind::Gemini,
        endpoint: server.url.clone(),
        model_id: "gemini-test".into(),
        cache_dir: tmp.path().into(),
        ..Default::default()
    };
    let clock = Arc::new(MockClock::default());
    let lab = Labeler::with_parts(cfg, Secret::new(KEY), Arc::new(UreqTransport::default()), clock.clone());
    let l = lab.label_image("p", &png(3)).unwrap();
    assert_eq!(l.text, "مرحبا بيكم");
    assert_eq!(l.attempt_count, 2);
    assert_eq!(clock.sleeps(), vec![Duration::from_millis(500)]);

    let got = server.received.lock().unwrap().clone();
    assert_eq!(got.len(), 2);
    assert_eq!(got[0].path, "/v1beta/models/gemini-test:generateContent");
    assert!(got[0].headers.contains(&("x-goog-api-key".to_string(), KEY.to_string())));
    assert_eq!(inline(&got[0].body, "mime_type"), "image/png");
    assert!(!inline(&got[0].body, "data").is_empty());
}

#[test]
fn auth_status_maps_to_auth_error() {
    let server = serve(|_| (403, "{\"error\":\"forbidden\"}".into()));
    let tmp = tempfile::tempdir().unwrap();
    let cfg = LabelerConfig {
        provider: ProviderKind::Generic,
        endpoint: format!("{}/label", server.url),
        cache_dir: tmp.path().into(),
        ..Default::default()
    };
    let lab = Labeler::with_parts(cfg, Secret::new(KEY), Arc::new(UreqTransport::default()), Arc::new(MockClock::default()));
    assert_eq!(lab.label_image("p", &png(1)).unwrap_err(), LabelError::Auth { status: 403 });
    let got = server.received.lock().unwrap().clone();
    assert!(got[0].headers.contains(&("authorization".to_string(), format!("Bearer {KEY}"))));
}

#[test]
fn unreachable_host_is_a_transport_error() {
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let req = HttpRequest { url: format!("http://127.0.0.1:{port}/x"), headers: vec![], body: serde_json::json!({}) };
    assert!(UreqTransport::default().post_json(&req, Duration::from_secs(2)).is_err());
}
