use std::path::Path;

use darijakit_core::dataset::{AppliedDistortion, Manifest, Split};
use darijakit_forge::config::Ranged;
use darijakit_forge::{Forge, ForgeConfig};

use crate::common::{fixture, forge_config, ok, run, stdout_json, tree};
use crate::oracles::{count, simulate_noisy};

/// Reference split sizes.
pub const TRAIN: u64 = 26_162;
pub const VALIDATION: u64 = 3_930;

fn generate(cfg: &Path, out: &Path, count: usize, jobs: usize) {
    let (cfg, out) = (cfg.to_str().unwrap(), out.to_str().unwrap());
    ok(run(&["forge", "generate", "--config", cfg, "--out", out, "--count", &count.to_string(), "--jobs", &jobs.to_string()]));
}

pub fn forge_determinism(tmp: &Path) -> String {
    let cfg = forge_config(&tmp.join("det"), 4242, 0.5, "");
    let runs: Vec<_> = [("a", 1), ("b", 1), ("c", 8)]
        .into_iter()
        .map(|(name, jobs)| {
            let out = tmp.join("det").join(name);
            generate(&cfg, &out, 200, jobs);
            tree(&out)
        })
        .collect();
    let pngs = runs[0].iter().filter(|(p, _)| p.ends_with(".png")).count();
    assert_eq!(pngs, 200);
    assert!(runs[0] == runs[1], "two runs with the same seed differ");
    assert!(runs[0] == runs[2], "--jobs 8 differs from --jobs 1");
    format!("200 samples, {} files byte-identical across 2 runs and --jobs 8", runs[0].len())
}

pub fn forge_geometry() -> String {
    let mut cfg = ForgeConfig::new(fixture("corpus.txt"), vec![fixture("DejaVuSans.ttf")]);
    cfg.master_seed = 99;
    cfg.distortions.rotation = Ranged { p: 1.0, range: [-30.0, 30.0] };
    let forge = Forge::new(cfg).unwrap();
    let mut boxes = 0;
    let mut worst = 0.0f64;
    for i in 0..100 {
        let plan = forge.render_plan(i).unwrap();
        let sample = forge.generate_sample(i).unwrap();
        let [AppliedDistortion::Rotation { degrees }] = plan.distortions[..] else {
            panic!("sample {i}: expected exactly one rotation");
        };
        let (w, h) = (f64::from(plan.layout.width), f64::from(plan.layout.height));
        let t = degrees.to_radians();
        let nw = (w * t.cos().abs() + h * t.sin().abs() - 1e-6).ceil();
        let nh = (w * t.sin().abs() + h * t.cos().abs() - 1e-6).ceil();
        assert_eq!((sample.record.width, sample.record.height), (nw as u32, nh as u32), "sample {i} canvas");
        assert_eq!(plan.layout.lines.len(), sample.record.line_boxes.len());
        for (line, got) in plan.layout.lines.iter().zip(&sample.record.line_boxes) {
            let r = line.rect;
            let pts: Vec<(f64, f64)> = [(r.x0, r.y0), (r.x1, r.y0), (r.x1, r.y1), (r.x0, r.y1)]
                .into_iter()
                .map(|(x, y)| {
                    let (u, v) = (x - w / 2.0, h / 2.0 - y);
                    let (ru, rv) = (u * t.cos() - v * t.sin(), u * t.sin() + v * t.cos());
                    (nw / 2.0 + ru, nh / 2.0 - rv)
                })
                .collect();
            let min_x = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).max(0.0);
            let max_x = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).min(nw);
            let min_y = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).max(0.0);
            let max_y = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).min(nh);
            let err = [
                f64::from(got.x) - min_x,
                f64::from(got.right()) - max_x,
                f64::from(got.y) - min_y,
                f64::from(got.bottom()) - max_y,
            ]
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs()));
            assert!(err <= 1.0, "sample {i}: box {got:?} off by {err:.2} px");
            worst = worst.max(err);
            boxes += 1;
        }
    }
    format!("100 samples, {boxes} line boxes, max corner error {worst:.2} px")
}

pub fn split_structure(tmp: &Path) -> String {
    let dir = tmp.join("split");
    let cfg = forge_config(&dir, 7, 0.2, "");
    generate(&cfg, &dir.join("gen"), 300, 4);
    let out = dir.join("split");
    let ratios = format!("train={TRAIN},validation={VALIDATION}");
    ok(run(&[
        "dataset", "split", "--manifest", dir.join("gen").to_str().unwrap(), "--out", out.to_str().unwrap(), "--ratios", &ratios,
    ]));
    let m = Manifest::load(&out).unwrap();
    let n = |s| m.split_records(s).count();
    let (train, val, bench) = (n(Split::Train), n(Split::Validation), n(Split::Bench));
    assert_eq!((train, val, bench), (261, 39, 0));
    assert_eq!(m.stored_stats.as_ref(), Some(&m.stats()), "stored stats differ from recomputation");
    ok(run(&["dataset", "verify", "--manifest", out.to_str().unwrap()]));
    format!("ratio {TRAIN}:{VALIDATION} on 300 samples -> {train}/{val}; stats recomputation matches")
}

pub fn end_to_end(tmp: &Path) -> String {
    let dir = tmp.join("e2e");
    let cfg = forge_config(&dir, 31, 0.3, "");
    let data = dir.join("data");
    generate(&cfg, &data, 100, 4);
    let data_s = data.to_str().unwrap();

    let bench = |adapter: &str, name: &str| {
        let out = dir.join(name);
        let o = ok(run(&["bench", "run", "--manifest", data_s, "--adapter", adapter, "--out", out.to_str().unwrap()]));
        stdout_json(&o)["aggregate"].clone()
    };
    let echo = bench("echo", "echo.json");
    assert_eq!((echo["micro_cer"].as_f64(), echo["micro_wer"].as_f64()), (Some(0.0), Some(0.0)), "echo: {echo}");
    assert_eq!(echo["n_samples"], 100);

    let (p, seed) = (0.1, 20_240);
    let noisy = bench(&format!("noisy:p={p},seed={seed}"), "noisy.json");
    let m = Manifest::load(&data).unwrap();
    let (mut cd, mut cn, mut wd, mut wn) = (0, 0, 0, 0);
    for r in &m.records {
        let c = count(&r.ground_truth, &simulate_noisy(p, seed, &r.sample_id, &r.ground_truth));
        cd += c.char_distance;
        cn += c.char_reference;
        wd += c.word_distance;
        wn += c.word_reference;
    }
    let expected = cd as f64 / cn as f64;
    assert_eq!(noisy["char_distance"], cd);
    assert_eq!(noisy["char_reference_length"], cn);
    assert_eq!(noisy["word_distance"], wd);
    assert_eq!(noisy["word_reference_length"], wn);
    assert_eq!(noisy["micro_cer"].as_f64(), Some(expected), "noisy: {noisy}");
    format!("echo CER 0 WER 0; noisy(p={p}, seed={seed}) CER {expected:.6} equals simulation ({cd}/{cn})")
}
