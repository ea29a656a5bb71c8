#![allow(dead_code)]

use std::io::Cursor;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use darijakit_core::dataset::{Manifest, Provenance, SampleRecord};
use darijakit_core::digest::sha256_hex;
use darijakit_review::{LabelInput, ProjectOptions};

pub fn png(seed: u32) -> Vec<u8> {
    let img = image_bytes(seed);
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png).unwrap();
    out.into_inner()
}

fn image_bytes(seed: u32) -> image::RgbImage {
    image::RgbImage::from_fn(6, 4, |x, y| image::Rgb([(seed % 251) as u8, (seed / 251) as u8, (x * 40 + y) as u8]))
}

/// A saved manifest of `n` samples; the first `scanned` are tagged
/// scanned literature, the rest social media. Ground truth is empty.
pub fn manifest(dir: &Path, n: u32, scanned: u32) -> Manifest {
    let src = dir.join("src");
    std::fs::create_dir_all(src.join("images")).unwrap();
    let records = (0..n)
        .map(|i| {
            let bytes = png(i);
            let path = src.join("images").join(format!("s{i:03}.png"));
            std::fs::write(&path, &bytes).unwrap();
            SampleRecord {
                sample_id: format!("s{i:03}"),
                image_path: path,
                image_sha256: sha256_hex(&bytes),
                width: 6,
                height: 4,
                ground_truth: String::new(),
                line_boxes: vec![],
                word_boxes: vec![],
                provenance: if i < scanned { Provenance::ScannedLiterature } else { Provenance::SocialMedia },
                render_meta: None,
            }
        })
        .collect();
    Manifest::new(&src, records).save(&src, false).unwrap();
    Manifest::load(&src).unwrap()
}

pub fn labels(m: &Manifest) -> Vec<LabelInput> {
    m.records
        .iter()
        .enumerate()
        .map(|(i, r)| LabelInput { sample_id: r.sample_id.clone(), text: format!("سطر رقم {i}\nكَتَبَ") })
        .collect()
}

/// Ticks by one millisecond per call.
pub fn counting_opts(snapshot_every: usize) -> ProjectOptions {
    let t = Arc::new(AtomicU64::new(1_700_000_000_000));
    ProjectOptions { snapshot_every, clock: Arc::new(move || t.fetch_add(1, Ordering::SeqCst)) }
}
