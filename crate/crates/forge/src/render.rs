use ab_glyph::{point, Font, FontVec, PxScale};
use image::imageops::{self, FilterType};
use image::{Rgb, RgbImage};
use rand::Rng;

use crate::layout::{PlacedGlyph, TextLayout};

/// A background resolved for one sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Background {
    Solid(Rgb<u8>),
    /// Index into the loaded textures plus the crop origin (ignored when
    /// the texture is stretched).
    Texture { index: usize, x: u32, y: u32 },
}

pub fn hex_color(c: Rgb<u8>) -> String {
    format!("#{:02x}{:02x}{:02x}", c.0[0], c.0[1], c.0[2])
}

pub fn jitter(color: [u8; 3], amount: u8, rng: &mut impl Rng) -> Rgb<u8> {
    if amount == 0 {
        return Rgb(color);
    }
    let a = i16::from(amount);
    Rgb(color.map(|v| (i16::from(v) + rng.random_range(-a..=a)).clamp(0, 255) as u8))
}

/// Crop origin inside a `tw x th` texture for a `w x h` canvas, or `None`
/// when the texture must be stretched.
pub fn crop_origin(tw: u32, th: u32, w: u32, h: u32, rng: &mut impl Rng) -> Option<(u32, u32)> {
    (tw >= w && th >= h).then(|| (rng.random_range(0..=tw - w), rng.random_range(0..=th - h)))
}

/// Fills a `w x h` canvas; `texture` must be the image a `Texture`
/// background refers to.
pub fn paint_background(bg: &Background, texture: Option<&RgbImage>, w: u32, h: u32) -> RgbImage {
    match (bg, texture) {
        (Background::Texture { x, y, .. }, Some(tex)) => {
            if tex.width() >= w && tex.height() >= h {
                imageops::crop_imm(tex, *x, *y, w, h).to_image()
            } else {
                imageops::resize(tex, w, h, FilterType::Triangle)
            }
        }
        (Background::Solid(c), _) => RgbImage::from_pixel(w, h, *c),
        (Background::Texture { .. }, None) => RgbImage::from_pixel(w, h, Rgb([255, 255, 255])),
    }
}

pub fn luminance(c: Rgb<u8>) -> f64 {
    0.299 * f64::from(c.0[0]) + 0.587 * f64::from(c.0[1]) + 0.114 * f64::from(c.0[2])
}

/// Alpha-blends every glyph of `layout` onto `canvas`.
pub fn draw_text(canvas: &mut RgbImage, layout: &TextLayout, font: &FontVec, color: Rgb<u8>) {
    let scale = font
        .pt_to_px_scale(layout.font_size as f32)
        .unwrap_or(PxScale::from(layout.font_size as f32));
    for g in &layout.glyphs {
        draw_glyph(canvas, font, scale, g, color);
    }
}

fn draw_glyph(canvas: &mut RgbImage, font: &FontVec, scale: PxScale, g: &PlacedGlyph, color: Rgb<u8>) {
    let id = font.glyph_id(g.ch);
    let mut glyph = id.with_scale_and_position(scale, point(g.x, g.baseline));
    if let Some(center) = g.mark_center {
        // marks carry their own vertical offset; only centre them horizontally
        if let Some(outline) = font.outline_glyph(glyph.clone()) {
            let b = outline.px_bounds();
            glyph.position.x += center - (b.min.x + b.max.x) / 2.0;
        }
    }
    let Some(outline) = font.outline_glyph(glyph) else {
        return;
    };
    let bounds = outline.px_bounds();
    let (w, h) = (canvas.width() as i64, canvas.height() as i64);
    outline.draw(|x, y, coverage| {
        let px = bounds.min.x as i64 + i64::from(x);
        let py = bounds.min.y as i64 + i64::from(y);
        if px < 0 || py < 0 || px >= w || py >= h {
            return;
        }
        let a = f64::from(coverage.clamp(0.0, 1.0));
        let p = canvas.get_pixel_mut(px as u32, py as u32);
        for c in 0..3 {
            let blended = f64::from(p.0[c]) * (1.0 - a) + f64::from(color.0[c]) * a;
            p.0[c] = blended.round() as u8;
        }
    });
}
