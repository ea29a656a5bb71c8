use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Where a sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Synthetic,
    ScannedLiterature,
    SocialMedia,
    Educational,
    Recipe,
    External,
}

impl Provenance {
    pub const ALL: [Provenance; 6] = [
        Self::Synthetic,
        Self::ScannedLiterature,
        Self::SocialMedia,
        Self::Educational,
        Self::Recipe,
        Self::External,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Synthetic => "synthetic",
            Self::ScannedLiterature => "scanned_literature",
            Self::SocialMedia => "social_media",
            Self::Educational => "educational",
            Self::Recipe => "recipe",
            Self::External => "external",
        }
    }

    pub fn is_synthetic(self) -> bool {
        self == Self::Synthetic
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown provenance {s:?}"))
    }
}

/// Axis-aligned pixel box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl BBox {
    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn within(&self, width: u32, height: u32) -> bool {
        self.right() <= width && self.bottom() <= height
    }

    /// Smallest integer box containing the real-valued extent
    /// `[x0, x1] x [y0, y1]`, clamped to `width x height`.
    pub fn enclosing(x0: f64, y0: f64, x1: f64, y1: f64, width: u32, height: u32) -> Self {
        let clamp = |v: f64, max: u32| v.clamp(0.0, max as f64);
        let left = clamp(x0.floor(), width) as u32;
        let top = clamp(y0.floor(), height) as u32;
        let right = clamp(x1.ceil(), width) as u32;
        let bottom = clamp(y1.ceil(), height) as u32;
        Self {
            x: left,
            y: top,
            w: right.saturating_sub(left),
            h: bottom.saturating_sub(top),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordBox {
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub word: String,
}

/// A distortion as actually applied to one sample, with its sampled
/// parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AppliedDistortion {
    /// Image corners moved to `corners` (top-left, top-right, bottom-right,
    /// bottom-left) on a canvas of unchanged size.
    PerspectiveWarp { corners: [[f64; 2]; 4] },
    /// Counter-clockwise rotation about the image centre; the canvas grows to
    /// hold the rotated image.
    Rotation { degrees: f64 },
    GaussianBlur { sigma: f64 },
    GaussianNoise { stddev: f64 },
    BrightnessContrast { brightness: f64, contrast: f64 },
    JpegArtifacts { quality: u8 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderMeta {
    pub font: String,
    pub font_size: f64,
    pub background: String,
    pub distortions: Vec<AppliedDistortion>,
    pub sample_seed: u64,
}

/// One image plus its transcription, geometry and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: String,
    /// Relative to the manifest directory on disk; resolved to a full path
    /// while the manifest is in memory.
    pub image_path: PathBuf,
    pub image_sha256: String,
    pub width: u32,
    pub height: u32,
    /// Logical-order text exactly as rendered or transcribed (never
    /// normalized).
    pub ground_truth: String,
    #[serde(default)]
    pub line_boxes: Vec<BBox>,
    #[serde(default)]
    pub word_boxes: Vec<WordBox>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub render_meta: Option<RenderMeta>,
}

impl SampleRecord {
    pub fn word_count(&self) -> usize {
        self.ground_truth.split_whitespace().count()
    }
}
