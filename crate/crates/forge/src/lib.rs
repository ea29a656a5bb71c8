//! Synthetic OCR data for Arabic-script text.
//!
//! A [`Forge`] turns a [`ForgeConfig`] into samples: corpus text is shaped,
//! wrapped and drawn onto a background with a sampled font, then distorted.
//! Every decision for sample `i` comes from a seed derived from
//! `(master_seed, i)`, so any sample can be regenerated on its own and
//! parallel runs match sequential ones byte for byte.

pub mod config;
pub mod distort;
pub mod font;
pub mod generate;
pub mod geometry;
pub mod layout;
pub mod render;
pub mod seed;

pub use config::{validate_config, ForgeConfig};
pub use generate::{generate_dataset, Forge, ForgeError, GenerateOptions, GeneratedSample, RenderPlan, SampleError};
