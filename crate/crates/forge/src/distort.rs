//! Distortion sampling and application, always in the order
//! warp, rotate, blur, noise, brightness/contrast, jpeg.

use std::io::Cursor;

use darijakit_core::dataset::AppliedDistortion;
use image::codecs::jpeg::JpegEncoder;
use image::{ImageFormat, RgbImage};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::DistortionConfig;
use crate::geometry::{mean_color, resample, PointMap};

pub(crate) fn uniform(rng: &mut impl Rng, r: [f64; 2]) -> f64 {
    if r[0] >= r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..=r[1])
    }
}

/// Draws the distortions for a `width x height` canvas. Parameters are
/// fixed here so the applied list can be recorded before any pixel work.
pub fn sample_distortions(
    cfg: &DistortionConfig,
    width: u32,
    height: u32,
    rng: &mut impl Rng,
) -> Vec<AppliedDistortion> {
    let mut out = Vec::new();
    if rng.random_bool(cfg.perspective_warp.p) {
        let ratio = uniform(rng, cfg.perspective_warp.range);
        let (w, h) = (f64::from(width), f64::from(height));
        // each corner moves inward by an independent share of the ratio
        let mut inward = || (rng.random::<f64>() * ratio * w, rng.random::<f64>() * ratio * h);
        let (a, b, c, d) = (inward(), inward(), inward(), inward());
        out.push(AppliedDistortion::PerspectiveWarp {
            corners: [[a.0, a.1], [w - b.0, b.1], [w - c.0, h - c.1], [d.0, h - d.1]],
        });
    }
    if rng.random_bool(cfg.rotation.p) {
        out.push(AppliedDistortion::Rotation {
            degrees: uniform(rng, cfg.rotation.range),
        });
    }
    if rng.random_bool(cfg.gaussian_blur.p) {
        out.push(AppliedDistortion::GaussianBlur {
            sigma: uniform(rng, cfg.gaussian_blur.range),
        });
    }
    if rng.random_bool(cfg.gaussian_noise.p) {
        out.push(AppliedDistortion::GaussianNoise {
            stddev: uniform(rng, cfg.gaussian_noise.range),
        });
    }
    let bc = &cfg.brightness_contrast;
    if rng.random_bool(bc.p) {
        out.push(AppliedDistortion::BrightnessContrast {
            brightness: uniform(rng, bc.brightness),
            contrast: uniform(rng, bc.contrast),
        });
    }
    if rng.random_bool(cfg.jpeg_artifacts.p) {
        let q = uniform(rng, cfg.jpeg_artifacts.range).round().clamp(1.0, 100.0);
        out.push(AppliedDistortion::JpegArtifacts { quality: q as u8 });
    }
    out
}

/// The point map of a geometric distortion on a `width x height` image and
/// the size of its output. Photometric distortions return `None`.
pub fn geometric_map(d: &AppliedDistortion, width: u32, height: u32) -> Option<(PointMap, (u32, u32))> {
    match d {
        AppliedDistortion::PerspectiveWarp { corners } => {
            PointMap::homography(width, height, *corners).map(|m| (m, (width, height)))
        }
        AppliedDistortion::Rotation { degrees } => Some(PointMap::rotation(width, height, *degrees)),
        _ => None,
    }
}

/// Sends points through every geometric distortion in the list.
pub fn transform_points(
    distortions: &[AppliedDistortion],
    mut width: u32,
    mut height: u32,
    points: &mut [(f64, f64)],
) -> (u32, u32) {
    for d in distortions {
        if let Some((map, size)) = geometric_map(d, width, height) {
            for p in points.iter_mut() {
                *p = map.forward(p.0, p.1);
            }
            (width, height) = size;
        }
    }
    (width, height)
}

pub fn apply_distortions(
    mut img: RgbImage,
    distortions: &[AppliedDistortion],
    noise_rng: &mut impl Rng,
) -> Result<RgbImage, image::ImageError> {
    for d in distortions {
        img = match d {
            AppliedDistortion::PerspectiveWarp { .. } | AppliedDistortion::Rotation { .. } => {
                match geometric_map(d, img.width(), img.height()) {
                    Some((map, (w, h))) => resample(&img, &map, w, h, mean_color(&img)),
                    None => img,
                }
            }
            AppliedDistortion::GaussianBlur { sigma } => image::imageops::blur(&img, *sigma as f32),
            AppliedDistortion::GaussianNoise { stddev } => add_noise(img, *stddev, noise_rng),
            AppliedDistortion::BrightnessContrast { brightness, contrast } => {
                adjust(img, *brightness, *contrast)
            }
            AppliedDistortion::JpegArtifacts { quality } => jpeg_round_trip(&img, *quality)?,
        };
    }
    Ok(img)
}

fn add_noise(mut img: RgbImage, stddev: f64, rng: &mut impl Rng) -> RgbImage {
    let Ok(normal) = Normal::new(0.0, stddev) else {
        return img;
    };
    for v in img.iter_mut() {
        *v = (f64::from(*v) + normal.sample(rng)).round().clamp(0.0, 255.0) as u8;
    }
    img
}

fn adjust(mut img: RgbImage, brightness: f64, contrast: f64) -> RgbImage {
    for v in img.iter_mut() {
        *v = ((f64::from(*v) - 128.0) * contrast + 128.0 + brightness).round().clamp(0.0, 255.0) as u8;
    }
    img
}

fn jpeg_round_trip(img: &RgbImage, quality: u8) -> Result<RgbImage, image::ImageError> {
    let mut buf = Vec::new();
    JpegEncoder::new_with_quality(&mut buf, quality).encode_image(img)?;
    Ok(image::load(Cursor::new(buf), ImageFormat::Jpeg)?.to_rgb8())
}
