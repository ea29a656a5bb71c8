#![allow(dead_code)]

use std::io::Cursor;
use std::path::Path;

use darijakit_core::dataset::{Manifest, Provenance, SampleRecord};
use darijakit_core::digest::sha256_hex;

pub const WORDS: &[&str] = &[
    "سلام", "عليكم", "كَتَبَ", "الدار", "مزيان", "بزاف", "واش", "غادي", "نمشي", "للسوق", "دابا", "شُكْرًا",
    "الخبز", "ديال", "الصباح", "كاين", "ماكاينش", "المغرب", "2024", "طنجة", "فاس", "الوقت",
];

pub fn png(seed: u32) -> Vec<u8> {
    let img = image::RgbImage::from_fn(5, 3, |x, y| image::Rgb([(seed % 251) as u8, (seed / 251) as u8, (x + y) as u8]));
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png).unwrap();
    out.into_inner()
}

pub fn line(i: usize, words: usize) -> String {
    (0..words).map(|k| WORDS[(i * 7 + k * 5 + k * k) % WORDS.len()]).collect::<Vec<_>>().join(" ")
}

/// Saved manifest of `n` samples whose images have a `<stem>.txt`
/// sidecar holding the ground truth.
pub fn manifest(dir: &Path, n: usize, words: usize) -> Manifest {
    std::fs::create_dir_all(dir.join("images")).unwrap();
    let records = (0..n)
        .map(|i| {
            let bytes = png(i as u32);
            let path = dir.join("images").join(format!("s{i:04}.png"));
            std::fs::write(&path, &bytes).unwrap();
            let gt = line(i, words);
            std::fs::write(path.with_extension("txt"), &gt).unwrap();
            SampleRecord {
                sample_id: format!("s{i:04}"),
                image_path: path,
                image_sha256: sha256_hex(&bytes),
                width: 5,
                height: 3,
                ground_truth: gt,
                line_boxes: vec![],
                word_boxes: vec![],
                provenance: Provenance::Synthetic,
                render_meta: None,
            }
        })
        .collect();
    Manifest::new(dir, records).save(dir, false).unwrap();
    Manifest::load(dir).unwrap()
}
