//! Wrapping, size fitting and glyph placement. Everything here works in
//! unrotated canvas pixels; distortions happen later.

use ab_glyph::{Font, FontVec, PxScale, ScaleFont};
use darijakit_core::shaping::{shape_line, GlyphRole, ShapedLine};

use crate::config::{Alignment, LayoutConfig, LayoutMode};

/// Axis-aligned rectangle in continuous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    fn union(self, other: Rect) -> Rect {
        Rect {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        [(self.x0, self.y0), (self.x1, self.y0), (self.x1, self.y1), (self.x0, self.y1)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedGlyph {
    pub ch: char,
    /// Pen position on the baseline.
    pub x: f32,
    pub baseline: f32,
    /// For marks: horizontal centre of the glyph they sit on.
    pub mark_center: Option<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedWord {
    pub word: String,
    pub rect: Rect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedLine {
    pub text: String,
    pub rect: Rect,
    /// Logical reading order.
    pub words: Vec<PlacedWord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextLayout {
    pub width: u32,
    pub height: u32,
    pub font_size: f64,
    pub lines: Vec<PlacedLine>,
    pub glyphs: Vec<PlacedGlyph>,
}

impl TextLayout {
    pub fn ground_truth(&self) -> String {
        self.lines.iter().map(|l| l.text.as_str()).collect::<Vec<_>>().join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayoutError {
    /// Does not fit in `max_lines` at the smallest permitted size.
    TextTooLong,
    /// The font has no glyph for this character.
    MissingGlyph(char),
}

struct Metrics<'a> {
    font: &'a FontVec,
    scale: PxScale,
    ascent: f64,
    descent: f64,
}

impl<'a> Metrics<'a> {
    fn new(font: &'a FontVec, size: f64) -> Self {
        let scale = font.pt_to_px_scale(size as f32).unwrap_or(PxScale::from(size as f32));
        let scaled = font.as_scaled(scale);
        Self {
            font,
            scale,
            ascent: f64::from(scaled.ascent()),
            descent: f64::from(scaled.descent()),
        }
    }

    fn line_height(&self) -> f64 {
        self.ascent - self.descent
    }

    fn advance(&self, ch: char) -> f64 {
        f64::from(self.font.as_scaled(self.scale).h_advance(self.font.glyph_id(ch)))
    }

    fn line_width(&self, shaped: &ShapedLine) -> f64 {
        shaped
            .glyphs
            .iter()
            .filter(|g| matches!(g.role, GlyphRole::Base { .. }))
            .map(|g| self.advance(g.ch))
            .sum()
    }
}

fn check_glyphs(font: &FontVec, shaped: &ShapedLine) -> Result<(), LayoutError> {
    match shaped
        .glyphs
        .iter()
        .filter(|g| g.role != GlyphRole::Control)
        .find(|g| font.glyph_id(g.ch).0 == 0)
    {
        Some(g) => Err(LayoutError::MissingGlyph(g.ch)),
        None => Ok(()),
    }
}

/// Greedy wrap: each line takes words until the next one would overflow.
fn wrap(words: &[String], metrics: &Metrics, max_width: f64) -> Result<Option<Vec<String>>, LayoutError> {
    let mut lines: Vec<String> = Vec::new();
    let mut current = String::new();
    for word in words {
        let candidate = if current.is_empty() { word.clone() } else { format!("{current} {word}") };
        let shaped = shape_line(&candidate);
        check_glyphs(metrics.font, &shaped)?;
        if metrics.line_width(&shaped) <= max_width {
            current = candidate;
        } else if current.is_empty() {
            return Ok(None);
        } else {
            lines.push(std::mem::take(&mut current));
            let alone = shape_line(word);
            if metrics.line_width(&alone) > max_width {
                return Ok(None);
            }
            current = word.clone();
        }
    }
    if !current.is_empty() {
        lines.push(current);
    }
    Ok(Some(lines))
}

fn poster_height(width: u32) -> u32 {
    width * 3 / 4
}

/// Fits `words` starting at `size`, shrinking by 15% steps down to
/// `min_size`, and places every glyph.
pub fn layout_text(
    words: &[String],
    font: &FontVec,
    size: f64,
    min_size: f64,
    cfg: &LayoutConfig,
) -> Result<TextLayout, LayoutError> {
    let margin = f64::from(cfg.margin_px);
    let max_width = f64::from(cfg.width_px) - 2.0 * margin;
    let mut size = size;
    loop {
        let metrics = Metrics::new(font, size);
        if let Some(lines) = wrap(words, &metrics, max_width)? {
            let block = metrics.line_height() + (lines.len().saturating_sub(1)) as f64 * metrics.line_height() * cfg.line_spacing;
            let fits_vertically = match cfg.mode {
                LayoutMode::Poster => block <= f64::from(poster_height(cfg.width_px)) - 2.0 * margin,
                _ => true,
            };
            if lines.len() <= cfg.max_lines && fits_vertically {
                return Ok(place(&lines, &metrics, size, cfg));
            }
        }
        if size <= min_size {
            return Err(LayoutError::TextTooLong);
        }
        size = (size * 0.85).max(min_size);
    }
}

fn place(lines: &[String], metrics: &Metrics, size: f64, cfg: &LayoutConfig) -> TextLayout {
    let margin = f64::from(cfg.margin_px);
    let line_height = metrics.line_height();
    let advance = line_height * cfg.line_spacing;
    let shaped: Vec<ShapedLine> = lines.iter().map(|l| shape_line(l)).collect();
    let widths: Vec<f64> = shaped.iter().map(|s| metrics.line_width(s)).collect();
    let block = line_height + (lines.len() - 1) as f64 * advance;

    let (width, height, top) = match cfg.mode {
        LayoutMode::Line => {
            let w = widths.iter().copied().fold(0.0, f64::max);
            ((w + 2.0 * margin).ceil() as u32, (line_height + 2.0 * margin).ceil() as u32, margin)
        }
        LayoutMode::Page => {
            let h = line_height + (cfg.max_lines - 1) as f64 * advance + 2.0 * margin;
            (cfg.width_px, h.ceil() as u32, margin)
        }
        LayoutMode::Poster => {
            let h = poster_height(cfg.width_px);
            (cfg.width_px, h, (f64::from(h) - block) / 2.0)
        }
    };
    let inner = f64::from(width) - 2.0 * margin;

    let mut glyphs = Vec::new();
    let mut placed_lines = Vec::new();
    for (li, (text, line)) in lines.iter().zip(&shaped).enumerate() {
        let baseline = top + metrics.ascent + li as f64 * advance;
        let (y0, y1) = (baseline - metrics.ascent, baseline - metrics.descent);
        let slack = (inner - widths[li]).max(0.0);
        let spaces = line.glyphs.iter().filter(|g| g.ch == ' ').count();
        let last = li + 1 == lines.len();
        let (start, space_extra) = match cfg.alignment {
            Alignment::Justified if !last && spaces > 0 => (margin, slack / spaces as f64),
            // the last line of a justified block is set flush right
            Alignment::Right | Alignment::Justified => (margin + slack, 0.0),
            Alignment::Center => (margin + slack / 2.0, 0.0),
        };

        // word index of each logical char position; None for spaces
        let word_of: Vec<Option<usize>> = {
            let mut idx = 0;
            let mut in_word = false;
            text.chars()
                .map(|c| {
                    if c == ' ' {
                        if in_word {
                            idx += 1;
                        }
                        in_word = false;
                        None
                    } else {
                        in_word = true;
                        Some(idx)
                    }
                })
                .collect()
        };
        let words: Vec<&str> = text.split(' ').collect();
        let mut word_rects: Vec<Option<Rect>> = vec![None; words.len()];

        let mut pen = start;
        let mut base_span = (pen, pen);
        for g in &line.glyphs {
            match g.role {
                GlyphRole::Control => {}
                GlyphRole::Mark { .. } => glyphs.push(PlacedGlyph {
                    ch: g.ch,
                    x: base_span.0 as f32,
                    baseline: baseline as f32,
                    mark_center: Some(((base_span.0 + base_span.1) / 2.0) as f32),
                }),
                GlyphRole::Base { .. } => {
                    let mut adv = metrics.advance(g.ch);
                    if g.ch == ' ' {
                        adv += space_extra;
                    }
                    glyphs.push(PlacedGlyph {
                        ch: g.ch,
                        x: pen as f32,
                        baseline: baseline as f32,
                        mark_center: None,
                    });
                    base_span = (pen, pen + adv);
                    let rect = Rect { x0: pen, y0, x1: pen + adv, y1 };
                    for w in g.sources().filter_map(|s| word_of[s]) {
                        word_rects[w] = Some(word_rects[w].map_or(rect, |r| r.union(rect)));
                    }
                    pen += adv;
                }
            }
        }

        let words: Vec<PlacedWord> = words
            .iter()
            .zip(word_rects)
            .map(|(w, r)| PlacedWord {
                word: (*w).to_string(),
                rect: r.unwrap_or(Rect { x0: start, y0, x1: start, y1 }),
            })
            .collect();
        let rect = words.iter().map(|w| w.rect).reduce(Rect::union).unwrap_or(Rect { x0: start, y0, x1: start, y1 });
        placed_lines.push(PlacedLine { text: text.clone(), rect, words });
    }

    TextLayout {
        width,
        height,
        font_size: size,
        lines: placed_lines,
        glyphs,
    }
}
