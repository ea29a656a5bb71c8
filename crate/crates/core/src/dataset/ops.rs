use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::manifest::{Manifest, Split};
use super::record::Provenance;
use super::DatasetError;

const RATIO_TOLERANCE: f64 = 1e-9;

/// Per-split sample counts: `floor(fraction * n)` each, with the remainder
/// going to the split with the largest fraction (earliest split on ties).
pub fn split_counts(n: usize, ratios: &BTreeMap<Split, f64>) -> Result<BTreeMap<Split, usize>, DatasetError> {
    if ratios.is_empty() {
        return Err(DatasetError::InvalidRatios("no splits given".into()));
    }
    for (split, f) in ratios {
        if !(0.0..=1.0).contains(f) {
            return Err(DatasetError::InvalidRatios(format!(
                "{} fraction {f} outside [0, 1]",
                split.as_str()
            )));
        }
    }
    let total: f64 = ratios.values().sum();
    if (total - 1.0).abs() > RATIO_TOLERANCE {
        return Err(DatasetError::InvalidRatios(format!("fractions sum to {total}, expected 1")));
    }

    // the epsilon keeps e.g. 0.87 * 300 = 260.99999999999997 from flooring to 260
    let mut counts: BTreeMap<Split, usize> = ratios
        .iter()
        .map(|(s, f)| (*s, (f * n as f64 + RATIO_TOLERANCE).floor() as usize))
        .collect();
    let assigned: usize = counts.values().sum();
    let largest = ratios
        .iter()
        .fold(None::<(Split, f64)>, |best, (s, f)| match best {
            Some((_, bf)) if bf >= *f => best,
            _ => Some((*s, *f)),
        })
        .map(|(s, _)| s)
        .expect("ratios non-empty");
    *counts.get_mut(&largest).unwrap() += n.saturating_sub(assigned);
    Ok(counts)
}

/// Seeded shuffle followed by contiguous assignment in split order
/// (train, validation, bench).
pub fn split(manifest: &Manifest, ratios: &BTreeMap<Split, f64>, seed: u64) -> Result<Manifest, DatasetError> {
    let n = manifest.records.len();
    let counts = split_counts(n, ratios)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut splits = BTreeMap::new();
    let mut cursor = order.into_iter();
    for (split, count) in counts {
        for idx in cursor.by_ref().take(count) {
            splits.insert(manifest.records[idx].sample_id.clone(), split);
        }
    }
    let mut out = manifest.clone();
    out.splits = splits;
    out.stored_stats = None;
    Ok(out)
}

/// Coarse provenance class used for mix targeting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixClass {
    Synthetic,
    Real,
}

impl MixClass {
    pub fn of(p: Provenance) -> Self {
        if p.is_synthetic() {
            Self::Synthetic
        } else {
            Self::Real
        }
    }
}

impl std::str::FromStr for MixClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "synthetic" => Ok(Self::Synthetic),
            "real" => Ok(Self::Real),
            other => Err(format!("unknown mix class {other:?} (expected synthetic or real)")),
        }
    }
}

pub type TargetMix = BTreeMap<MixClass, f64>;

/// Union of two manifests with disjoint ids. With a target mix, the
/// over-represented class is downsampled (seeded, order preserving) to the
/// largest total the scarcer class can support.
pub fn merge(a: &Manifest, b: &Manifest, target_mix: Option<&TargetMix>, seed: u64) -> Result<Manifest, DatasetError> {
    let ids: HashSet<&str> = a.records.iter().map(|r| r.sample_id.as_str()).collect();
    if let Some(dup) = b.records.iter().find(|r| ids.contains(r.sample_id.as_str())) {
        return Err(DatasetError::DuplicateSampleId(dup.sample_id.clone()));
    }

    let mut merged = Manifest::new(a.root.clone(), a.records.iter().chain(&b.records).cloned().collect());
    merged.ensure_unique_ids()?;
    merged.splits = a.splits.iter().chain(&b.splits).map(|(k, v)| (k.clone(), *v)).collect();

    if let Some(mix) = target_mix {
        let keep = downsample_to_mix(&merged, mix, seed)?;
        let mut index = 0;
        merged.records.retain(|_| {
            let kept = keep[index];
            index += 1;
            kept
        });
        let remaining: HashSet<&str> = merged.records.iter().map(|r| r.sample_id.as_str()).collect();
        merged.splits.retain(|id, _| remaining.contains(id.as_str()));
    }
    Ok(merged)
}

fn downsample_to_mix(manifest: &Manifest, mix: &TargetMix, seed: u64) -> Result<Vec<bool>, DatasetError> {
    let total: f64 = mix.values().sum();
    if (total - 1.0).abs() > RATIO_TOLERANCE || mix.values().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(DatasetError::InvalidMix(format!("fractions must lie in [0, 1] and sum to 1, got {total}")));
    }
    let mut members: BTreeMap<MixClass, Vec<usize>> = BTreeMap::new();
    for (i, r) in manifest.records.iter().enumerate() {
        members.entry(MixClass::of(r.provenance)).or_default().push(i);
    }
    if let Some(missing) = members.keys().find(|c| !mix.contains_key(c)) {
        return Err(DatasetError::InvalidMix(format!("no fraction given for class {missing:?}")));
    }

    // largest total N with count_c >= fraction_c * N for every class
    let supportable = mix
        .iter()
        .filter(|(_, f)| **f > 0.0)
        .map(|(c, f)| members.get(c).map_or(0, Vec::len) as f64 / f)
        .fold(f64::INFINITY, f64::min);
    let supportable = if supportable.is_finite() { supportable } else { 0.0 };

    let mut keep = vec![true; manifest.records.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (class, indices) in &members {
        let target = ((mix[class] * supportable).round() as usize).min(indices.len());
        if target == indices.len() {
            continue;
        }
        let mut shuffled = indices.clone();
        shuffled.shuffle(&mut rng);
        for &dropped in &shuffled[target..] {
            keep[dropped] = false;
        }
    }
    Ok(keep)
}
