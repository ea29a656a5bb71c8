use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Stdio};

use darijakit_core::dataset::{Manifest, Provenance, SampleRecord};
use darijakit_core::digest::sha256_hex;
use darijakit_review::{Action, Project};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::common::{bin, forge_config, ok, run, stdout_json};

/// Reference benchmark composition.
pub const BENCH_SAMPLES: usize = 251;
pub const BENCH_SCANNED: usize = 55;

const TOKEN: &str = "acceptance-token";

struct Server {
    child: Child,
    base: String,
    agent: ureq::Agent,
}

impl Server {
    fn start(project: &Path) -> Self {
        let mut child = bin()
            .args(["review", "serve", "--project", project.to_str().unwrap(), "--port", "0", "--token", TOKEN])
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
        let base = loop {
            let line = lines.next().expect("server printed its address").unwrap();
            if let Some(addr) = line.strip_prefix("listening on ") {
                break addr.to_string();
            }
        };
        // keep draining so the server never blocks on a full pipe
        std::thread::spawn(move || lines.for_each(drop));
        let agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
        Self { child, base, agent }
    }

    /// Status and body of one request.
    fn call(&self, method: &str, path: &str, body: Option<Value>) -> (u16, Value) {
        let url = format!("{}{path}", self.base);
        let auth = format!("Bearer {TOKEN}");
        let mut resp = match method {
            "GET" => self.agent.get(&url).header("Authorization", &auth).call(),
            _ => self.agent.post(&url).header("Authorization", &auth).send_json(body.unwrap_or(json!({}))),
        }
        .unwrap();
        let status = resp.status().as_u16();
        let body: Value = resp.body_mut().read_json().unwrap_or(Value::Null);
        (status, body)
    }

    fn kill(mut self) {
        self.child.kill().unwrap();
        self.child.wait().unwrap();
    }
}

fn strip_view(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("image_url");
    v
}

fn small_dataset(dir: &Path, count: usize) -> Manifest {
    let cfg = forge_config(dir, 5, 0.0, "");
    let data = dir.join("data");
    ok(run(&[
        "forge", "generate", "--config", cfg.to_str().unwrap(), "--out", data.to_str().unwrap(), "--count", &count.to_string(),
    ]));
    Manifest::load(&data).unwrap()
}

fn write_labels(path: &Path, m: &Manifest) {
    let body: String = m
        .records
        .iter()
        .map(|r| format!("{}\n", json!({ "sample_id": r.sample_id, "text": r.ground_truth })))
        .collect();
    std::fs::write(path, body).unwrap();
}

pub fn crash_safety(tmp: &Path) -> String {
    let dir = tmp.join("review");
    let m = small_dataset(&dir, 20);
    write_labels(&dir.join("labels.jsonl"), &m);
    let project = dir.join("project");
    ok(run(&[
        "review", "create",
        "--manifest", dir.join("data").to_str().unwrap(),
        "--labels", dir.join("labels.jsonl").to_str().unwrap(),
        "--project", project.to_str().unwrap(),
    ]));

    let tasks_json = |state: &darijakit_review::State| -> BTreeMap<String, Value> {
        state.tasks.iter().map(|t| (t.task_id.clone(), serde_json::to_value(t).unwrap())).collect()
    };
    let mut model = tasks_json(&Project::replay_log(&project).unwrap());
    assert_eq!(model.len(), 20);

    let reviewers = ["amal", "youssef"];
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let (mut acked, mut refused) = (0, 0);
    for op in 0..50 {
        let server = Server::start(&project);
        let reviewer = reviewers[rng.random_range(0..2)];
        let held: Vec<String> = model
            .iter()
            .filter(|(_, t)| t["status"] == "in_review" && t["reviewer"] == reviewer)
            .map(|(id, _)| id.clone())
            .collect();
        // a random task now and then, so refused operations are exercised too
        let target = if held.is_empty() || rng.random_bool(0.15) {
            model.keys().nth(rng.random_range(0..model.len())).unwrap().clone()
        } else {
            held[rng.random_range(0..held.len())].clone()
        };
        let (status, body) = match rng.random_range(0..10) {
            0..=3 => server.call("GET", &format!("/api/tasks/next?reviewer={reviewer}"), None),
            4..=5 => server.call("POST", &format!("/api/tasks/{target}/submit"), Some(json!({ "reviewer": reviewer, "action": "approve" }))),
            6 => server.call(
                "POST",
                &format!("/api/tasks/{target}/submit"),
                Some(json!({ "reviewer": reviewer, "action": "correct", "text": format!("تصحيح {op}") })),
            ),
            7 => server.call(
                "POST",
                &format!("/api/tasks/{target}/submit"),
                Some(json!({ "reviewer": reviewer, "action": "reject", "reason": "blurry" })),
            ),
            _ => server.call("POST", &format!("/api/tasks/{target}/release"), Some(json!({ "reviewer": reviewer }))),
        };
        server.kill();

        if status == 200 {
            let task = if body.get("task").is_some() { body["task"].clone() } else { body };
            if !task.is_null() {
                let task = strip_view(task);
                model.insert(task["task_id"].as_str().unwrap().to_string(), task);
            }
            acked += 1;
        } else {
            assert!((400..500).contains(&status), "op {op}: HTTP {status}: {body}");
            refused += 1;
        }

        let replayed = Project::replay_log(&project).unwrap();
        assert!(tasks_json(&replayed) == model, "op {op}: replayed state differs from acknowledged operations");
        let reopened = Project::open(&project).unwrap();
        assert!(tasks_json(&reopened.state()) == model, "op {op}: reopened project differs");
    }
    assert!(acked >= 25, "only {acked} operations succeeded");
    format!("50 operations ({acked} acknowledged, {refused} refused), killed after each; replay matched every time")
}

pub fn bench_export(tmp: &Path) -> String {
    let dir = tmp.join("export");
    let pool = small_dataset(&dir, 8);
    let mut records = Vec::new();
    for i in 0..BENCH_SAMPLES {
        let src: &SampleRecord = &pool.records[i % pool.records.len()];
        let rel = format!("images/bench_{i:04}.png");
        let dst = dir.join("bench").join(&rel);
        std::fs::create_dir_all(dst.parent().unwrap()).unwrap();
        let bytes = std::fs::read(&src.image_path).unwrap();
        std::fs::write(&dst, &bytes).unwrap();
        let mut r = src.clone();
        r.sample_id = format!("bench_{i:04}");
        r.image_path = dst;
        r.image_sha256 = sha256_hex(&bytes);
        r.provenance = if i < BENCH_SCANNED { Provenance::ScannedLiterature } else { Provenance::SocialMedia };
        r.render_meta = None;
        records.push(r);
    }
    let mut m = Manifest::new(dir.join("bench"), records);
    m.stored_stats = Some(m.stats());
    m.save(&dir.join("bench"), false).unwrap();
    write_labels(&dir.join("labels.jsonl"), &m);

    let project = dir.join("project");
    ok(run(&[
        "review", "create",
        "--manifest", dir.join("bench").to_str().unwrap(),
        "--labels", dir.join("labels.jsonl").to_str().unwrap(),
        "--project", project.to_str().unwrap(),
    ]));
    {
        let p = Project::open(&project).unwrap();
        while let Some(t) = p.claim_next("amal").unwrap() {
            p.submit(&t.task_id, Action::Approve, "amal").unwrap();
        }
        p.checkpoint().unwrap();
    }
    let out = dir.join("exported");
    let summary = stdout_json(&ok(run(&["review", "export", "--project", project.to_str().unwrap(), "--out", out.to_str().unwrap()])));
    assert_eq!(summary["samples"], BENCH_SAMPLES, "{summary}");
    assert_eq!(summary["provenance"]["scanned_literature"], BENCH_SCANNED, "{summary}");
    let exported = Manifest::load(&out).unwrap();
    assert_eq!(exported.len(), BENCH_SAMPLES);
    format!("exported {{samples: {}, scanned_literature: {}}}", summary["samples"], summary["provenance"]["scanned_literature"])
}
