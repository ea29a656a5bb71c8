#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../forge/tests/fixtures").join(name)
}

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_darijakit"));
    for var in ["DARIJAKIT_SEED", "DARIJAKIT_JOBS", "DARIJAKIT_LOG", "DARIJAKIT_REVIEW_TOKEN"] {
        c.env_remove(var);
    }
    c.env("DARIJAKIT_LOG", "warn");
    c
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

pub fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}\nstderr: {}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
    })
}

pub fn ok(o: Output) -> Output {
    assert_eq!(code(&o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    o
}

/// A run config with a `[forge]` section using the test fonts. `extra`
/// is appended verbatim.
pub fn forge_config(dir: &Path, seed: u64, rotation_p: f64, extra: &str) -> PathBuf {
    let body = format!(
        r#"seed = {seed}

[forge]
corpus_path = "{corpus}"
fonts = [{{ path = "{font}" }}]
backgrounds = [
  {{ kind = "solid", color = [245, 240, 230], jitter = 12 }},
  {{ kind = "solid", color = [250, 250, 250], weight = 0.5 }},
]

[forge.layout]
max_words = 4

[forge.distortions]
rotation = {{ p = {rotation_p}, range = [-4.0, 4.0] }}
gaussian_noise = {{ p = 0.3, range = [2.0, 8.0] }}
gaussian_blur = {{ p = 0.2, range = [0.3, 1.0] }}
brightness_contrast = {{ p = 0.2, brightness = [-20.0, 20.0], contrast = [0.85, 1.15] }}
jpeg_artifacts = {{ p = 0.2, range = [40.0, 90.0] }}
{extra}
"#,
        corpus = fixture("corpus.txt").display(),
        font = fixture("DejaVuSans.ttf").display(),
    );
    std::fs::create_dir_all(dir).unwrap();
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

/// Every file under `dir` with its bytes, sorted by relative path.
pub fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}
