use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use darijakit_core::dataset::{
    AppliedDistortion, BBox, DatasetError, Manifest, Provenance, RenderMeta, SampleRecord, WordBox,
    IMAGES_DIR, MANIFEST_FILE,
};
use darijakit_core::digest::sha256_hex;
use darijakit_core::TOOL_VERSION;
use image::{ImageFormat, Rgb, RgbImage};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{validate_config, BackgroundSpec, ForgeConfig};
use crate::distort::{apply_distortions, sample_distortions, transform_points, uniform};
use crate::font::LoadedFont;
use crate::geometry::mean_color;
use crate::layout::{layout_text, LayoutError, Rect, TextLayout};
use crate::render::{crop_origin, draw_text, hex_color, jitter, luminance, paint_background, Background};
use crate::seed::{noise_rng, plan_rng, sample_id, sample_seed};

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error("invalid forge config:\n  {}", .0.join("\n  "))]
    InvalidConfig(Vec<String>),
    #[error("sample {index}: font {font} has no glyph for {ch:?} (U+{:04X})", *.ch as u32)]
    FontRender { index: u64, font: String, ch: char },
    #[error("skipped {skipped} samples (text too long) before reaching {count}; shorten layout.max_words or widen the layout")]
    TooManySkips { skipped: usize, count: usize },
    #[error("image encoding: {0}")]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("sample {index}: text does not fit at the minimum font size")]
    TextTooLong { index: u64 },
    #[error(transparent)]
    Fatal(#[from] ForgeError),
}

/// Everything decided for a sample before any pixels are drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderPlan {
    pub index: u64,
    pub sample_seed: u64,
    pub sample_id: String,
    pub font_index: usize,
    pub layout: TextLayout,
    pub background: Background,
    pub background_id: String,
    pub text_color: Rgb<u8>,
    pub distortions: Vec<AppliedDistortion>,
}

#[derive(Debug, Clone)]
pub struct GeneratedSample {
    pub record: SampleRecord,
    pub png: Vec<u8>,
}

struct Texture {
    name: String,
    image: RgbImage,
    mean: Rgb<u8>,
}

/// A validated configuration with fonts, textures and corpus loaded.
pub struct Forge {
    cfg: ForgeConfig,
    fonts: Vec<LoadedFont>,
    font_weights: WeightedIndex<f64>,
    textures: Vec<Texture>,
    /// Texture index for each `Image` background, by background position.
    texture_of: Vec<Option<usize>>,
    background_weights: Option<WeightedIndex<f64>>,
    corpus: Vec<Vec<String>>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ForgeError + '_ {
    move |source| ForgeError::Io { path: path.to_path_buf(), source }
}

impl Forge {
    pub fn new(cfg: ForgeConfig) -> Result<Self, ForgeError> {
        let diagnostics = validate_config(&cfg);
        if !diagnostics.is_empty() {
            return Err(ForgeError::InvalidConfig(diagnostics));
        }
        let fonts = cfg
            .fonts
            .iter()
            .map(|f| LoadedFont::open(&f.path))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ForgeError::InvalidConfig(vec![e]))?;
        let font_weights = WeightedIndex::new(cfg.fonts.iter().map(|f| f.weight))
            .map_err(|e| ForgeError::InvalidConfig(vec![format!("fonts: {e}")]))?;

        let mut textures = Vec::new();
        let mut texture_of = Vec::new();
        for b in &cfg.backgrounds {
            match b {
                BackgroundSpec::Solid { .. } => texture_of.push(None),
                BackgroundSpec::Image { path, .. } => {
                    let image = image::open(path)
                        .map_err(|e| ForgeError::InvalidConfig(vec![format!("{}: {e}", path.display())]))?
                        .to_rgb8();
                    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("texture").to_string();
                    texture_of.push(Some(textures.len()));
                    textures.push(Texture { name, mean: mean_color(&image), image });
                }
            }
        }
        let background_weights = if cfg.backgrounds.is_empty() {
            None
        } else {
            Some(
                WeightedIndex::new(cfg.backgrounds.iter().map(BackgroundSpec::weight))
                    .map_err(|e| ForgeError::InvalidConfig(vec![format!("backgrounds: {e}")]))?,
            )
        };

        let raw = fs::read_to_string(&cfg.corpus_path).map_err(io_err(&cfg.corpus_path))?;
        let corpus: Vec<Vec<String>> = raw
            .lines()
            .map(|l| l.split_whitespace().map(String::from).collect::<Vec<_>>())
            .filter(|w| !w.is_empty())
            .collect();

        Ok(Self {
            cfg,
            fonts,
            font_weights,
            textures,
            texture_of,
            background_weights,
            corpus,
        })
    }

    pub fn config(&self) -> &ForgeConfig {
        &self.cfg
    }

    fn pick_words(&self, rng: &mut impl Rng) -> Vec<String> {
        let para = &self.corpus[rng.random_range(0..self.corpus.len())];
        match self.cfg.layout.max_words {
            Some(k) => {
                let len = rng.random_range(1..=k.min(para.len()));
                let start = rng.random_range(0..=para.len() - len);
                para[start..start + len].to_vec()
            }
            None => para.clone(),
        }
    }

    /// Samples text, font, size, background, colour and distortions for
    /// `index` and lays the text out. Pure in `(config, index)`.
    pub fn render_plan(&self, index: u64) -> Result<RenderPlan, SampleError> {
        let seed = sample_seed(self.cfg.master_seed, index);
        let mut rng = plan_rng(seed);

        let words = self.pick_words(&mut rng);
        let font_index = self.font_weights.sample(&mut rng);
        let size = (uniform(&mut rng, self.cfg.font_size_range) * 4.0).round() / 4.0;
        let bg_choice = self.background_weights.as_ref().map(|w| w.sample(&mut rng));

        let font = &self.fonts[font_index];
        let min_size = self.cfg.font_size_range[0];
        let layout = match layout_text(&words, &font.font, size, min_size, &self.cfg.layout) {
            Ok(l) => l,
            Err(LayoutError::TextTooLong) => return Err(SampleError::TextTooLong { index }),
            Err(LayoutError::MissingGlyph(ch)) => {
                return Err(ForgeError::FontRender { index, font: font.name.clone(), ch }.into())
            }
        };
        let (w, h) = (layout.width, layout.height);

        let (background, background_id, bg_tone) = match bg_choice.map(|i| (&self.cfg.backgrounds[i], self.texture_of[i])) {
            None => (Background::Solid(Rgb([255, 255, 255])), "solid:#ffffff".to_string(), Rgb([255, 255, 255])),
            Some((BackgroundSpec::Solid { color, jitter: j, .. }, _)) => {
                let c = jitter(*color, *j, &mut rng);
                (Background::Solid(c), format!("solid:{}", hex_color(c)), c)
            }
            Some((BackgroundSpec::Image { .. }, Some(t))) => {
                let tex = &self.textures[t];
                let (x, y) = crop_origin(tex.image.width(), tex.image.height(), w, h, &mut rng).unwrap_or((0, 0));
                (Background::Texture { index: t, x, y }, format!("image:{}", tex.name), tex.mean)
            }
            Some((BackgroundSpec::Image { .. }, None)) => unreachable!("image backgrounds always load a texture"),
        };
        let ink = if luminance(bg_tone) > 128.0 {
            rng.random_range(0..=60u8)
        } else {
            rng.random_range(200..=255u8)
        };
        let distortions = sample_distortions(&self.cfg.distortions, w, h, &mut rng);

        Ok(RenderPlan {
            index,
            sample_seed: seed,
            sample_id: sample_id(seed),
            font_index,
            layout,
            background,
            background_id,
            text_color: Rgb([ink, ink, ink]),
            distortions,
        })
    }

    pub fn generate_sample(&self, index: u64) -> Result<GeneratedSample, SampleError> {
        let plan = self.render_plan(index)?;
        let font = &self.fonts[plan.font_index];
        let layout = &plan.layout;

        let texture = match plan.background {
            Background::Texture { index, .. } => Some(&self.textures[index].image),
            Background::Solid(_) => None,
        };
        let mut canvas = paint_background(&plan.background, texture, layout.width, layout.height);
        draw_text(&mut canvas, layout, &font.font, plan.text_color);
        let image = apply_distortions(canvas, &plan.distortions, &mut noise_rng(plan.sample_seed))
            .map_err(ForgeError::from)?;
        let (width, height) = image.dimensions();

        let to_box = |r: &Rect| {
            let mut pts = r.corners();
            transform_points(&plan.distortions, layout.width, layout.height, &mut pts);
            let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
            for (x, y) in pts {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
            BBox::enclosing(x0, y0, x1, y1, width, height)
        };

        let mut png = Vec::new();
        image.write_to(&mut Cursor::new(&mut png), ImageFormat::Png).map_err(ForgeError::from)?;

        let record = SampleRecord {
            sample_id: plan.sample_id.clone(),
            image_path: Path::new(IMAGES_DIR).join(format!("{}.png", plan.sample_id)),
            image_sha256: sha256_hex(&png),
            width,
            height,
            ground_truth: layout.ground_truth(),
            line_boxes: layout.lines.iter().map(|l| to_box(&l.rect)).collect(),
            word_boxes: layout
                .lines
                .iter()
                .flat_map(|l| &l.words)
                .map(|w| WordBox { bbox: to_box(&w.rect), word: w.word.clone() })
                .collect(),
            provenance: Provenance::Synthetic,
            render_meta: Some(RenderMeta {
                font: font.name.clone(),
                font_size: layout.font_size,
                background: plan.background_id.clone(),
                distortions: plan.distortions.clone(),
                sample_seed: plan.sample_seed,
            }),
        };
        Ok(GeneratedSample { record, png })
    }
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    /// Overrides `output.count`.
    pub count: Option<usize>,
    /// Worker threads; 0 picks one per core.
    pub jobs: usize,
    pub overwrite: bool,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self { count: None, jobs: 0, overwrite: false }
    }
}

/// Generates exactly `count` samples into `out`. Indices whose text does
/// not fit are skipped and the index advances, so the result is the same
/// for any number of workers.
pub fn generate_dataset(forge: &Forge, out: &Path, opts: &GenerateOptions) -> Result<Manifest, ForgeError> {
    let count = opts.count.unwrap_or(forge.cfg.output.count);
    if out.join(MANIFEST_FILE).exists() && !opts.overwrite {
        return Err(DatasetError::OutputExists(out.join(MANIFEST_FILE)).into());
    }
    let images = out.join(IMAGES_DIR);
    if opts.overwrite && images.exists() {
        fs::remove_dir_all(&images).map_err(io_err(&images))?;
    }
    fs::create_dir_all(&images).map_err(io_err(&images))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .expect("thread pool");
    let batch = pool.current_num_threads().max(1) as u64 * 8;
    let skip_budget = count * 10 + 100;

    let mut records = Vec::with_capacity(count);
    let mut skipped = 0usize;
    let mut next = 0u64;
    while records.len() < count {
        let results: Vec<Result<GeneratedSample, SampleError>> =
            pool.install(|| (next..next + batch).into_par_iter().map(|i| forge.generate_sample(i)).collect());
        next += batch;
        for result in results {
            if records.len() == count {
                break;
            }
            match result {
                Ok(sample) => {
                    let mut record = sample.record;
                    let path = out.join(&record.image_path);
                    fs::write(&path, &sample.png).map_err(io_err(&path))?;
                    record.image_path = path;
                    records.push(record);
                }
                Err(SampleError::TextTooLong { index }) => {
                    tracing::debug!(index, "skipped: text too long");
                    skipped += 1;
                    if skipped > skip_budget {
                        return Err(ForgeError::TooManySkips { skipped, count });
                    }
                }
                Err(SampleError::Fatal(e)) => return Err(e),
            }
        }
    }
    tracing::info!(samples = records.len(), skipped, "generated");

    let mut manifest = Manifest::new(out, records);
    manifest.generator = Some(serde_json::json!({
        "tool_version": TOOL_VERSION,
        "seed": forge.cfg.master_seed,
        "config": forge.cfg,
    }));
    Ok(manifest.save(out, true)?)
}
