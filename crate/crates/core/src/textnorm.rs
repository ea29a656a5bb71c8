//! Scoring-time text normalization.
//!
//! Ground truth and model output go through the same [`normalize`] call with
//! the same [`NormalizationConfig`] before any edit distance is computed:
//!
//! 1. optional NFC composition (off by default),
//! 2. removal of every codepoint in the diacritic set (harakat),
//! 3. CR, CRLF and the Unicode line separators become LF,
//! 4. horizontal whitespace runs collapse to a single space,
//! 5. each line is trimmed and blank lines are dropped.
//!
//! The transform is idempotent and never reorders or rewrites the remaining
//! non-whitespace codepoints.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

pub const TATWEEL: char = '\u{0640}';

/// Arabic combining marks removed by default. Built from U+064B..U+065F,
/// U+0670, U+06D6..U+06ED and U+08D3..U+08FF with the six non-Mn codepoints
/// in those blocks (U+06DD, U+06DE, U+06E5, U+06E6, U+06E9, U+08E2) left out.
const DEFAULT_DIACRITIC_RANGES: &[(u32, u32)] = &[
    (0x064B, 0x065F),
    (0x0670, 0x0670),
    (0x06D6, 0x06DC),
    (0x06DF, 0x06E4),
    (0x06E7, 0x06E8),
    (0x06EA, 0x06ED),
    (0x08D3, 0x08E1),
    (0x08E3, 0x08FF),
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TextNormError {
    #[error("diacritic set entry U+{0:04X} is not a nonspacing mark (Mn)")]
    NotAMark(u32),
    #[error("invalid codepoint range {0:?}")]
    BadRange(String),
}

/// A set of codepoints kept as sorted, non-overlapping inclusive ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiacriticSet {
    ranges: Vec<RangeInclusive<u32>>,
}

impl DiacriticSet {
    pub fn from_ranges(ranges: impl IntoIterator<Item = RangeInclusive<u32>>) -> Self {
        let mut ranges: Vec<_> = ranges.into_iter().filter(|r| r.start() <= r.end()).collect();
        ranges.sort_by_key(|r| *r.start());
        let mut merged: Vec<RangeInclusive<u32>> = Vec::with_capacity(ranges.len());
        for r in ranges {
            match merged.last_mut() {
                Some(last) if *r.start() <= last.end().saturating_add(1) => {
                    let end = (*last.end()).max(*r.end());
                    *last = *last.start()..=end;
                }
                _ => merged.push(r),
            }
        }
        Self { ranges: merged }
    }

    pub fn arabic_default() -> Self {
        Self::from_ranges(DEFAULT_DIACRITIC_RANGES.iter().map(|&(a, b)| a..=b))
    }

    pub fn contains(&self, cp: char) -> bool {
        let cp = cp as u32;
        self.ranges
            .binary_search_by(|r| {
                if *r.end() < cp {
                    std::cmp::Ordering::Less
                } else if *r.start() > cp {
                    std::cmp::Ordering::Greater
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }

    pub fn ranges(&self) -> &[RangeInclusive<u32>] {
        &self.ranges
    }

    pub fn iter(&self) -> impl Iterator<Item = char> + '_ {
        self.ranges.iter().flat_map(|r| r.clone().filter_map(char::from_u32))
    }

    /// Every member must be a nonspacing mark.
    pub fn validate(&self) -> Result<(), TextNormError> {
        for r in &self.ranges {
            for cp in r.clone() {
                let is_mn = char::from_u32(cp)
                    .map(|c| get_general_category(c) == GeneralCategory::NonspacingMark)
                    .unwrap_or(false);
                if !is_mn {
                    return Err(TextNormError::NotAMark(cp));
                }
            }
        }
        Ok(())
    }
}

impl Default for DiacriticSet {
    fn default() -> Self {
        Self::arabic_default()
    }
}

fn format_range(r: &RangeInclusive<u32>) -> String {
    if r.start() == r.end() {
        format!("U+{:04X}", r.start())
    } else {
        format!("U+{:04X}..U+{:04X}", r.start(), r.end())
    }
}

fn parse_cp(s: &str) -> Option<u32> {
    let s = s.trim();
    let hex = s.strip_prefix("U+").or_else(|| s.strip_prefix("u+")).unwrap_or(s);
    u32::from_str_radix(hex, 16).ok()
}

impl FromStr for DiacriticSet {
    type Err = TextNormError;

    /// Comma-separated `U+XXXX` or `U+XXXX..U+YYYY` items.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut ranges = Vec::new();
        for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            ranges.push(parse_range(item)?);
        }
        Ok(Self::from_ranges(ranges))
    }
}

fn parse_range(item: &str) -> Result<RangeInclusive<u32>, TextNormError> {
    let bad = || TextNormError::BadRange(item.to_string());
    match item.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (parse_cp(a).ok_or_else(bad)?, parse_cp(b).ok_or_else(bad)?);
            if a > b {
                return Err(bad());
            }
            Ok(a..=b)
        }
        None => {
            let a = parse_cp(item).ok_or_else(bad)?;
            Ok(a..=a)
        }
    }
}

impl fmt::Display for DiacriticSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.ranges.iter().map(format_range).collect();
        f.write_str(&parts.join(","))
    }
}

impl Serialize for DiacriticSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.ranges.iter().map(format_range))
    }
}

impl<'de> Deserialize<'de> for DiacriticSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(deserializer)?;
        let ranges = items
            .iter()
            .map(|i| parse_range(i.trim()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        Ok(Self::from_ranges(ranges))
    }
}

/// Normalization settings shared by every sample of a scoring run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizationConfig {
    pub strip_diacritics: bool,
    pub diacritic_set: DiacriticSet,
    pub collapse_whitespace: bool,
    pub preserve_line_breaks: bool,
    /// Also drop U+0640 ARABIC TATWEEL (a base character, kept by default).
    pub strip_tatweel: bool,
    /// Apply NFC before mark removal.
    pub nfc: bool,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self {
            strip_diacritics: true,
            diacritic_set: DiacriticSet::arabic_default(),
            collapse_whitespace: true,
            preserve_line_breaks: true,
            strip_tatweel: false,
            nfc: false,
        }
    }
}

impl NormalizationConfig {
    pub fn validate(&self) -> Result<(), TextNormError> {
        self.diacritic_set.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedText {
    pub text: String,
    pub source_length_chars: usize,
    pub removed_marks: usize,
}

pub fn is_diacritic(cp: char, cfg: &NormalizationConfig) -> bool {
    cfg.diacritic_set.contains(cp)
}

fn is_line_break(c: char) -> bool {
    matches!(c, '\n' | '\r' | '\u{0B}' | '\u{0C}' | '\u{85}' | '\u{2028}' | '\u{2029}')
}

fn is_horizontal_space(c: char) -> bool {
    c.is_whitespace() && !is_line_break(c)
}

pub fn normalize(raw: &str, cfg: &NormalizationConfig) -> NormalizedText {
    let source_length_chars = raw.chars().count();

    let composed: String;
    let input = if cfg.nfc {
        composed = raw.nfc().collect();
        composed.as_str()
    } else {
        raw
    };

    let mut removed_marks = 0;
    let mut kept = String::with_capacity(input.len());
    for c in input.chars() {
        let drop = (cfg.strip_diacritics && is_diacritic(c, cfg))
            || (cfg.strip_tatweel && c == TATWEEL);
        if drop {
            removed_marks += 1;
        } else {
            kept.push(c);
        }
    }
    if cfg.nfc {
        // removing marks can leave composable neighbours behind
        kept = kept.nfc().collect();
    }

    let text = if cfg.collapse_whitespace {
        collapse(&kept, cfg.preserve_line_breaks)
    } else {
        standardize_breaks(&kept, cfg.preserve_line_breaks)
    };

    NormalizedText {
        text,
        source_length_chars,
        removed_marks,
    }
}

/// Splits on any line break, treating CRLF as one break.
fn lines(text: &str) -> impl Iterator<Item = &str> {
    text.split("\r\n").flat_map(|chunk| chunk.split(is_line_break))
}

fn collapse(text: &str, preserve_line_breaks: bool) -> String {
    let separator = if preserve_line_breaks { "\n" } else { " " };
    let mut out = String::with_capacity(text.len());
    for line in lines(text) {
        let mut words = line.split(is_horizontal_space).filter(|w| !w.is_empty()).peekable();
        if words.peek().is_none() {
            continue;
        }
        if !out.is_empty() {
            out.push_str(separator);
        }
        let mut first = true;
        for w in words {
            if !first {
                out.push(' ');
            }
            out.push_str(w);
            first = false;
        }
    }
    out
}

fn standardize_breaks(text: &str, preserve_line_breaks: bool) -> String {
    let separator = if preserve_line_breaks { "\n" } else { " " };
    lines(text).collect::<Vec<_>>().join(separator)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(s: &str) -> String {
        normalize(s, &NormalizationConfig::default()).text
    }

    #[test]
    fn strips_harakat() {
        let out = normalize("كَتَبَ", &NormalizationConfig::default());
        assert_eq!(out.text, "كتب");
        assert_eq!(out.removed_marks, 3);
        assert_eq!(out.source_length_chars, 6);
    }

    #[test]
    fn whitespace_and_crlf() {
        assert_eq!(norm("a  b\r\nc"), "a b\nc");
        assert_eq!(norm(""), "");
        assert_eq!(norm("  \t \n\r\n "), "");
        assert_eq!(norm(" x \n\n\n y\r z "), "x\ny\nz");
        assert_eq!(norm("a\u{00A0}\u{2003}b"), "a b");
    }

    #[test]
    fn line_breaks_can_be_flattened() {
        let cfg = NormalizationConfig {
            preserve_line_breaks: false,
            ..Default::default()
        };
        assert_eq!(normalize("a\nb\r\n\nc", &cfg).text, "a b c");
    }

    #[test]
    fn no_collapse_still_standardizes_breaks() {
        let cfg = NormalizationConfig {
            collapse_whitespace: false,
            ..Default::default()
        };
        assert_eq!(normalize("a  b\r\nc\rd", &cfg).text, "a  b\nc\nd");
    }

    #[test]
    fn diacritic_membership() {
        let cfg = NormalizationConfig::default();
        assert!(is_diacritic('\u{064B}', &cfg));
        assert!(is_diacritic('\u{0651}', &cfg), "shadda is in range");
        assert!(is_diacritic('\u{0670}', &cfg));
        assert!(!is_diacritic('\u{0628}', &cfg));
        assert!(!is_diacritic('A', &cfg));
        assert!(!is_diacritic(TATWEEL, &cfg));
        assert!(!is_diacritic('\u{06DD}', &cfg), "end of ayah is Cf");
        assert!(!is_diacritic('\u{200D}', &cfg));
    }

    #[test]
    fn default_set_is_all_nonspacing_marks() {
        DiacriticSet::arabic_default().validate().unwrap();
        let bad: DiacriticSet = "U+064B..U+065F,U+0628".parse().unwrap();
        assert_eq!(bad.validate(), Err(TextNormError::NotAMark(0x0628)));
    }

    #[test]
    fn tatweel_flag_and_zero_width_joiners() {
        assert_eq!(norm("كـتب"), "كـتب");
        let cfg = NormalizationConfig {
            strip_tatweel: true,
            ..Default::default()
        };
        assert_eq!(normalize("كـتب", &cfg).text, "كتب");
        assert_eq!(norm("a\u{200C}b\u{200D}c"), "a\u{200C}b\u{200D}c");
    }

    #[test]
    fn nfc_keeps_composed_hamza() {
        // alef + combining hamza above composes to U+0623 under NFC
        let decomposed = "\u{0627}\u{0654}";
        assert_eq!(norm(decomposed), "\u{0627}");
        let cfg = NormalizationConfig {
            nfc: true,
            ..Default::default()
        };
        assert_eq!(normalize(decomposed, &cfg).text, "\u{0623}");
    }

    #[test]
    fn set_parsing_and_display() {
        let set: DiacriticSet = "U+0650..U+0652, U+064B,U+064C".parse().unwrap();
        assert_eq!(set.to_string(), "U+064B..U+064C,U+0650..U+0652");
        assert!("U+0652..U+0650".parse::<DiacriticSet>().is_err());
        let json = serde_json::to_string(&set).unwrap();
        assert_eq!(json, r#"["U+064B..U+064C","U+0650..U+0652"]"#);
        let back: DiacriticSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let err = serde_json::from_str::<NormalizationConfig>(r#"{"strip_diacritic": true}"#);
        assert!(err.is_err());
        let ok: NormalizationConfig = serde_json::from_str(r#"{"nfc": true}"#).unwrap();
        assert!(ok.nfc && ok.strip_diacritics);
    }
}
