use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::font::{probe_font, FontProbe};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForgeConfig {
    #[serde(default)]
    pub master_seed: u64,
    /// One paragraph per line, UTF-8.
    pub corpus_path: PathBuf,
    pub fonts: Vec<FontSpec>,
    #[serde(default)]
    pub backgrounds: Vec<BackgroundSpec>,
    #[serde(default)]
    pub layout: LayoutConfig,
    /// Font size bounds in points; rendering uses 72 dpi, so 1 pt = 1 px.
    #[serde(default = "default_font_size_range")]
    pub font_size_range: [f64; 2],
    #[serde(default)]
    pub distortions: DistortionConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_font_size_range() -> [f64; 2] {
    [28.0, 40.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FontSpec {
    pub path: PathBuf,
    #[serde(default = "one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackgroundSpec {
    /// A flat colour, each channel jittered uniformly by up to `jitter`.
    Solid {
        color: [u8; 3],
        #[serde(default)]
        jitter: u8,
        #[serde(default = "one")]
        weight: f64,
    },
    /// A texture image, randomly cropped (or stretched when too small).
    Image {
        path: PathBuf,
        #[serde(default = "one")]
        weight: f64,
    },
}

impl BackgroundSpec {
    pub fn weight(&self) -> f64 {
        match self {
            Self::Solid { weight, .. } | Self::Image { weight, .. } => *weight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutMode {
    /// One line on a canvas cropped to the text width.
    Line,
    /// Fixed-width page, top-aligned, up to `max_lines` lines.
    Page,
    /// Fixed 4:3 canvas with the text block centred vertically.
    Poster,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    Right,
    Center,
    Justified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    pub mode: LayoutMode,
    /// Canvas width for page and poster; the maximum width in line mode.
    pub width_px: u32,
    pub margin_px: u32,
    /// Baseline advance as a multiple of the font's line height.
    pub line_spacing: f64,
    pub max_lines: usize,
    pub alignment: Alignment,
    /// Take a random window of at most this many words from the chosen
    /// paragraph. Unset means the whole paragraph.
    pub max_words: Option<usize>,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            mode: LayoutMode::Line,
            width_px: 1024,
            margin_px: 16,
            line_spacing: 1.3,
            max_lines: 1,
            alignment: Alignment::Right,
            max_words: Some(8),
        }
    }
}

/// Probability plus a closed parameter interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ranged {
    #[serde(default)]
    pub p: f64,
    pub range: [f64; 2],
}

impl Ranged {
    const fn off(lo: f64, hi: f64) -> Self {
        Self { p: 0.0, range: [lo, hi] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrightnessContrast {
    #[serde(default)]
    pub p: f64,
    /// Additive shift in 8-bit levels.
    pub brightness: [f64; 2],
    /// Multiplier around mid-grey.
    pub contrast: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistortionConfig {
    /// Maximum inward corner displacement as a fraction of width/height.
    pub perspective_warp: Ranged,
    /// Degrees, counter-clockwise positive.
    pub rotation: Ranged,
    pub gaussian_blur: Ranged,
    pub gaussian_noise: Ranged,
    pub brightness_contrast: BrightnessContrast,
    /// Encoder quality, 1..=100.
    pub jpeg_artifacts: Ranged,
}

impl Default for DistortionConfig {
    fn default() -> Self {
        Self {
            perspective_warp: Ranged::off(0.0, 0.05),
            rotation: Ranged::off(-3.0, 3.0),
            gaussian_blur: Ranged::off(0.3, 1.2),
            gaussian_noise: Ranged::off(2.0, 10.0),
            brightness_contrast: BrightnessContrast {
                p: 0.0,
                brightness: [-30.0, 30.0],
                contrast: [0.8, 1.2],
            },
            jpeg_artifacts: Ranged::off(30.0, 90.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: String,
    pub count: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            format: "png".into(),
            count: 100,
        }
    }
}

impl ForgeConfig {
    /// A config with defaults for everything except the inputs.
    pub fn new(corpus_path: impl Into<PathBuf>, fonts: Vec<PathBuf>) -> Self {
        Self {
            master_seed: 0,
            corpus_path: corpus_path.into(),
            fonts: fonts.into_iter().map(|path| FontSpec { path, weight: 1.0 }).collect(),
            backgrounds: Vec::new(),
            layout: LayoutConfig::default(),
            font_size_range: default_font_size_range(),
            distortions: DistortionConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml_str(raw: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(raw)
    }

    /// Parses a TOML file; relative paths inside it are resolved against
    /// the file's directory.
    pub fn from_toml_file(path: &Path) -> Result<Self, String> {
        let raw = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg = Self::from_toml_str(&raw).map_err(|e| format!("{}: {e}", path.display()))?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus_path);
        for f in &mut self.fonts {
            fix(&mut f.path);
        }
        for b in &mut self.backgrounds {
            if let BackgroundSpec::Image { path, .. } = b {
                fix(path);
            }
        }
    }
}

fn image_dimensions(path: &Path) -> Result<(u32, u32), String> {
    image::ImageReader::open(path)
        .and_then(|r| r.with_guessed_format())
        .map_err(|e| e.to_string())?
        .into_dimensions()
        .map_err(|e| e.to_string())
}

fn check_probability(out: &mut Vec<String>, name: &str, p: f64) {
    if !(0.0..=1.0).contains(&p) {
        out.push(format!("{name}.p out of [0,1]"));
    }
}

fn check_range(out: &mut Vec<String>, name: &str, r: [f64; 2], lo: f64, hi: f64) {
    if !(r[0].is_finite() && r[1].is_finite()) || r[0] > r[1] {
        out.push(format!("{name}: min {} > max {}", r[0], r[1]));
    } else if r[0] < lo || r[1] > hi {
        out.push(format!("{name}: [{}, {}] outside [{lo}, {hi}]", r[0], r[1]));
    }
}

/// Every problem with `cfg`, or an empty list. Reads the corpus, fonts and
/// background images to check they are usable.
pub fn validate_config(cfg: &ForgeConfig) -> Vec<String> {
    let mut out = Vec::new();

    match fs::read_to_string(&cfg.corpus_path) {
        Ok(raw) if raw.lines().all(|l| l.trim().is_empty()) => out.push("corpus: empty".to_string()),
        Ok(_) => {}
        Err(e) => out.push(format!("corpus: cannot read {}: {e}", cfg.corpus_path.display())),
    }

    if cfg.fonts.is_empty() {
        out.push("fonts: empty".to_string());
    }
    for (i, f) in cfg.fonts.iter().enumerate() {
        if !(f.weight.is_finite() && f.weight > 0.0) {
            out.push(format!("fonts[{i}].weight must be positive"));
        }
        match probe_font(&f.path) {
            FontProbe::Ok => {}
            FontProbe::Unreadable(e) => out.push(format!("fonts[{i}] {}: unreadable: {e}", f.path.display())),
            FontProbe::MissingPresentationForms(n) => out.push(format!(
                "fonts[{i}] {}: font lacks Arabic presentation forms ({n} of U+FE8D..U+FEFC missing)",
                f.path.display()
            )),
        }
    }

    for (i, b) in cfg.backgrounds.iter().enumerate() {
        if !(b.weight().is_finite() && b.weight() > 0.0) {
            out.push(format!("backgrounds[{i}].weight must be positive"));
        }
        if let BackgroundSpec::Image { path, .. } = b {
            if let Err(e) = image_dimensions(path) {
                out.push(format!("backgrounds[{i}] {}: {e}", path.display()));
            }
        }
    }

    let l = &cfg.layout;
    if l.max_lines == 0 {
        out.push("layout.max_lines must be at least 1".into());
    }
    if l.mode == LayoutMode::Line && l.max_lines > 1 {
        out.push("layout.max_lines must be 1 in line mode".into());
    }
    if !(l.line_spacing.is_finite() && l.line_spacing >= 1.0) {
        out.push("layout.line_spacing must be >= 1".into());
    }
    if l.width_px <= 2 * l.margin_px + 16 {
        out.push("layout.width_px leaves no room inside the margins".into());
    }
    if l.max_words == Some(0) {
        out.push("layout.max_words must be at least 1".into());
    }

    check_range(&mut out, "font_size_range", cfg.font_size_range, 4.0, 400.0);

    let d = &cfg.distortions;
    let ranged = [
        ("perspective_warp", d.perspective_warp, 0.0, 0.45),
        ("rotation", d.rotation, -180.0, 180.0),
        ("gaussian_blur", d.gaussian_blur, 0.0, 20.0),
        ("gaussian_noise", d.gaussian_noise, 0.0, 128.0),
        ("jpeg_artifacts", d.jpeg_artifacts, 1.0, 100.0),
    ];
    for (name, r, lo, hi) in ranged {
        let name = format!("distortions.{name}");
        check_probability(&mut out, &name, r.p);
        check_range(&mut out, &format!("{name}.range"), r.range, lo, hi);
    }
    check_probability(&mut out, "distortions.brightness_contrast", d.brightness_contrast.p);
    check_range(&mut out, "distortions.brightness_contrast.brightness", d.brightness_contrast.brightness, -255.0, 255.0);
    check_range(&mut out, "distortions.brightness_contrast.contrast", d.brightness_contrast.contrast, 0.0, 10.0);

    if cfg.output.format != "png" {
        out.push(format!("output.format {:?} unsupported (png only)", cfg.output.format));
    }
    out
}
