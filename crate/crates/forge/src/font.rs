use std::fs;
use std::path::Path;

use ab_glyph::{Font, FontVec};

/// Lam-alef ligatures and the Forms-B letter range; a usable font covers
/// all of them.
pub const PROBE_RANGE: std::ops::RangeInclusive<u32> = 0xFE8D..=0xFEFC;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FontProbe {
    Ok,
    Unreadable(String),
    MissingPresentationForms(usize),
}

pub fn load_font(path: &Path) -> Result<FontVec, String> {
    let bytes = fs::read(path).map_err(|e| e.to_string())?;
    FontVec::try_from_vec(bytes).map_err(|e| e.to_string())
}

/// Number of codepoints in [`PROBE_RANGE`] without a glyph.
pub fn missing_presentation_forms(font: &impl Font) -> usize {
    PROBE_RANGE
        .filter_map(char::from_u32)
        .filter(|&c| font.glyph_id(c).0 == 0)
        .count()
}

pub fn probe_font(path: &Path) -> FontProbe {
    match load_font(path) {
        Err(e) => FontProbe::Unreadable(e),
        Ok(font) => match missing_presentation_forms(&font) {
            0 => FontProbe::Ok,
            n => FontProbe::MissingPresentationForms(n),
        },
    }
}

/// A loaded font plus the name recorded in sample metadata.
pub struct LoadedFont {
    pub name: String,
    pub font: FontVec,
}

impl LoadedFont {
    pub fn open(path: &Path) -> Result<Self, String> {
        let font = load_font(path)?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("font")
            .to_string();
        Ok(Self { name, font })
    }
}
