//! Table-driven Arabic shaping.
//!
//! Logical text is turned into presentation-form codepoints in visual order:
//!
//! 1. every letter gets a joining class from the vendored joining table;
//!    transparent marks are skipped when looking for neighbours,
//! 2. lam followed by one of the four alef variants becomes a single
//!    lam-alef ligature (isolated or final),
//! 3. each remaining letter is mapped to its isolated, initial, medial or
//!    final presentation form,
//! 4. lines containing Arabic letters are laid out right to left; runs of
//!    Latin letters and digits (with the neutrals between them) keep their
//!    internal left-to-right order.
//!
//! The data files live in `data/` next to this crate and are documented in
//! `data/README.md`. Full UAX #9 and OpenType shaping are out of scope.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const JOINING_DATA: &str = include_str!("../data/ArabicShaping.txt");
const FORMS_DATA: &str = include_str!("../data/ArabicPresentationForms.txt");

pub const LAM: char = '\u{0644}';
/// Alef variants that form a mandatory ligature with a preceding lam:
/// madda above, hamza above, hamza below, plain alef.
pub const LAM_ALEF_PARTNERS: [char; 4] = ['\u{0622}', '\u{0623}', '\u{0625}', '\u{0627}'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JoiningClass {
    Dual,
    Right,
    Left,
    NonJoining,
    Transparent,
    JoinCausing,
}

impl JoiningClass {
    fn from_code(code: &str) -> Option<Self> {
        Some(match code {
            "D" => Self::Dual,
            "R" => Self::Right,
            "L" => Self::Left,
            "U" => Self::NonJoining,
            "T" => Self::Transparent,
            "C" => Self::JoinCausing,
            _ => return None,
        })
    }

    /// Connects to the following letter (the one to its left on screen).
    pub fn joins_forward(self) -> bool {
        matches!(self, Self::Dual | Self::Left | Self::JoinCausing)
    }

    /// Connects to the preceding letter.
    pub fn joins_backward(self) -> bool {
        matches!(self, Self::Dual | Self::Right | Self::JoinCausing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Form {
    Isolated,
    Initial,
    Medial,
    Final,
}

impl Form {
    fn index(self) -> usize {
        self as usize
    }

    fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "<isolated>" => Self::Isolated,
            "<initial>" => Self::Initial,
            "<medial>" => Self::Medial,
            "<final>" => Self::Final,
            _ => return None,
        })
    }

    fn from_joins(joins_prev: bool, joins_next: bool) -> Self {
        match (joins_prev, joins_next) {
            (false, false) => Self::Isolated,
            (false, true) => Self::Initial,
            (true, false) => Self::Final,
            (true, true) => Self::Medial,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShapingError {
    #[error("U+{:04X} has no presentation form", *.0 as u32)]
    NoPresentationForm(char),
}

struct Tables {
    joining: HashMap<char, JoiningClass>,
    forms: HashMap<char, [Option<char>; 4]>,
    /// alef variant -> (isolated, final) lam-alef ligature
    lam_alef: HashMap<char, [Option<char>; 2]>,
}

fn parse_hex(field: &str) -> Option<char> {
    u32::from_str_radix(field.trim(), 16).ok().and_then(char::from_u32)
}

fn data_lines(data: &str) -> impl Iterator<Item = &str> {
    data.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
}

fn build_tables() -> Tables {
    let mut joining = HashMap::new();
    for line in data_lines(JOINING_DATA) {
        let fields: Vec<&str> = line.split(';').map(str::trim).collect();
        let (Some(cp), Some(class)) = (
            fields.first().and_then(|f| parse_hex(f)),
            fields.get(2).and_then(|f| JoiningClass::from_code(f)),
        ) else {
            continue;
        };
        joining.insert(cp, class);
    }

    let mut forms: HashMap<char, [Option<char>; 4]> = HashMap::new();
    let mut lam_alef: HashMap<char, [Option<char>; 2]> = HashMap::new();
    // Presentation Forms-B (U+FE70..) is listed last and wins over duplicate
    // mappings from Forms-A.
    for line in data_lines(FORMS_DATA) {
        let fields: Vec<&str> = line.split(';').collect();
        let (Some(presentation), Some(decomposition)) =
            (fields.first().and_then(|f| parse_hex(f)), fields.get(5))
        else {
            continue;
        };
        let mut parts = decomposition.split_whitespace();
        let Some(form) = parts.next().and_then(Form::from_tag) else {
            continue;
        };
        let bases: Vec<char> = parts.filter_map(parse_hex).collect();
        match bases.as_slice() {
            [base] => {
                forms.entry(*base).or_default()[form.index()] = Some(presentation);
            }
            [LAM, alef] if LAM_ALEF_PARTNERS.contains(alef) => {
                let slot = match form {
                    Form::Isolated => 0,
                    Form::Final => 1,
                    _ => continue,
                };
                lam_alef.entry(*alef).or_default()[slot] = Some(presentation);
            }
            _ => {}
        }
    }

    Tables {
        joining,
        forms,
        lam_alef,
    }
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(build_tables)
}

/// Joining class of `cp`; anything outside the table is non-joining.
pub fn joining_class(cp: char) -> JoiningClass {
    tables()
        .joining
        .get(&cp)
        .copied()
        .unwrap_or(JoiningClass::NonJoining)
}

pub fn has_presentation_forms(cp: char) -> bool {
    tables().forms.contains_key(&cp)
}

/// Presentation form of `cp` given whether it connects to its logical
/// neighbours.
///
/// The requested shape is first restricted by the joining class (right-joining
/// letters ignore `joins_next`, non-joining letters are always isolated).
/// Missing forms fall back medial → final → isolated and initial → isolated.
pub fn contextual_form(cp: char, joins_prev: bool, joins_next: bool) -> Result<char, ShapingError> {
    let slots = tables()
        .forms
        .get(&cp)
        .ok_or(ShapingError::NoPresentationForm(cp))?;
    let class = joining_class(cp);
    let (prev, next) = match class {
        JoiningClass::Dual | JoiningClass::JoinCausing => (joins_prev, joins_next),
        JoiningClass::Right => (joins_prev, false),
        JoiningClass::Left => (false, joins_next),
        JoiningClass::NonJoining | JoiningClass::Transparent => (false, false),
    };
    let wanted = Form::from_joins(prev, next);
    let fallbacks: &[Form] = match wanted {
        Form::Isolated => &[Form::Isolated],
        Form::Initial => &[Form::Initial, Form::Isolated],
        Form::Medial => &[Form::Medial, Form::Final, Form::Isolated],
        Form::Final => &[Form::Final, Form::Isolated],
    };
    fallbacks
        .iter()
        .find_map(|f| slots[f.index()])
        .ok_or(ShapingError::NoPresentationForm(cp))
}

fn lam_alef_ligature(alef: char, lam_joins_prev: bool) -> Option<char> {
    let pair = tables().lam_alef.get(&alef)?;
    if lam_joins_prev {
        pair[1].or(pair[0])
    } else {
        pair[0]
    }
}

fn in_arabic_blocks(c: char) -> bool {
    matches!(c as u32,
        0x0600..=0x06FF | 0x0750..=0x077F | 0x08A0..=0x08FF | 0xFB50..=0xFDFF | 0xFE70..=0xFEFF)
}

/// Arabic-script letter (strong right-to-left for layout purposes).
pub fn is_arabic_letter(c: char) -> bool {
    if (0xFB50..=0xFDFF).contains(&(c as u32)) || (0xFE70..=0xFEFC).contains(&(c as u32)) {
        return c.is_alphabetic();
    }
    match tables().joining.get(&c) {
        Some(JoiningClass::Dual | JoiningClass::Right | JoiningClass::Left) => true,
        Some(JoiningClass::NonJoining) => in_arabic_blocks(c),
        _ => false,
    }
}

fn is_control(c: char) -> bool {
    matches!(c, '\u{200B}'..='\u{200F}' | '\u{202A}'..='\u{202E}' | '\u{2060}'..='\u{2069}' | '\u{061C}' | '\u{FEFF}')
}

fn mirror(c: char) -> char {
    match c {
        '(' => ')',
        ')' => '(',
        '[' => ']',
        ']' => '[',
        '{' => '}',
        '}' => '{',
        '<' => '>',
        '>' => '<',
        '«' => '»',
        '»' => '«',
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Rtl,
    Ltr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum GlyphRole {
    /// A spacing glyph. `ligature` holds the second logical index when two
    /// letters were merged (lam-alef).
    Base { ligature: Option<usize> },
    /// A combining mark drawn over `base` (its logical index), if any.
    Mark { base: Option<usize> },
    /// Zero-width format character (ZWJ, ZWNJ, direction marks).
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapedGlyph {
    pub ch: char,
    /// Logical (char) index of the codepoint this glyph was produced from.
    pub source: usize,
    pub role: GlyphRole,
}

impl ShapedGlyph {
    pub fn is_mark(&self) -> bool {
        matches!(self.role, GlyphRole::Mark { .. })
    }

    /// Logical indices covered by this glyph.
    pub fn sources(&self) -> impl Iterator<Item = usize> {
        let extra = match self.role {
            GlyphRole::Base { ligature } => ligature,
            _ => None,
        };
        std::iter::once(self.source).chain(extra)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapedLine {
    /// Glyphs in visual (left-to-right on screen) order. Marks directly
    /// follow the glyph they sit on.
    pub glyphs: Vec<ShapedGlyph>,
    pub direction: Direction,
    pub ligatures_applied: usize,
}

impl ShapedLine {
    pub fn text(&self) -> String {
        self.glyphs.iter().map(|g| g.ch).collect()
    }
}

/// A base glyph plus the marks attached to it, in logical order.
struct Cluster {
    glyphs: Vec<ShapedGlyph>,
    base_char: Option<char>,
}

/// Shaped clusters in logical order plus the number of ligatures formed.
fn shape_clusters(chars: &[char]) -> (Vec<Cluster>, usize) {
    let classes: Vec<JoiningClass> = chars.iter().map(|&c| joining_class(c)).collect();
    let prev_solid = |i: usize| (0..i).rev().find(|&k| classes[k] != JoiningClass::Transparent);
    let next_solid =
        |i: usize| (i + 1..chars.len()).find(|&k| classes[k] != JoiningClass::Transparent);

    let joins_prev = |i: usize| {
        classes[i].joins_backward()
            && prev_solid(i).is_some_and(|p| classes[p].joins_forward())
    };
    let joins_next = |i: usize| {
        classes[i].joins_forward() && next_solid(i).is_some_and(|n| classes[n].joins_backward())
    };

    let mut clusters: Vec<Cluster> = Vec::new();
    let mut ligatures = 0;
    let mut consumed_alef: Option<usize> = None;
    let mut last_base: Option<usize> = None;

    for (i, &c) in chars.iter().enumerate() {
        if classes[i] == JoiningClass::Transparent && !is_control(c) {
            let glyph = ShapedGlyph {
                ch: c,
                source: i,
                role: GlyphRole::Mark { base: last_base },
            };
            match clusters.last_mut() {
                Some(cluster) if last_base.is_some() => cluster.glyphs.push(glyph),
                _ => clusters.push(Cluster {
                    glyphs: vec![glyph],
                    base_char: None,
                }),
            }
            continue;
        }
        if consumed_alef == Some(i) {
            // second half of a lam-alef ligature; marks after it stay with the ligature
            last_base = Some(i);
            continue;
        }
        if is_control(c) {
            clusters.push(Cluster {
                glyphs: vec![ShapedGlyph {
                    ch: c,
                    source: i,
                    role: GlyphRole::Control,
                }],
                base_char: Some(c),
            });
            continue;
        }

        last_base = Some(i);
        let mut role = GlyphRole::Base { ligature: None };
        let mut ch = c;
        let partner = (c == LAM)
            .then(|| next_solid(i))
            .flatten()
            .filter(|&n| LAM_ALEF_PARTNERS.contains(&chars[n]));
        if let Some(alef_index) = partner.and_then(|n| {
            lam_alef_ligature(chars[n], joins_prev(i)).map(|lig| (n, lig))
        }) {
            let (n, lig) = alef_index;
            ch = lig;
            role = GlyphRole::Base { ligature: Some(n) };
            consumed_alef = Some(n);
            ligatures += 1;
        } else if has_presentation_forms(c) {
            ch = contextual_form(c, joins_prev(i), joins_next(i)).unwrap_or(c);
        }
        clusters.push(Cluster {
            glyphs: vec![ShapedGlyph { ch, source: i, role }],
            base_char: Some(c),
        });
    }
    (clusters, ligatures)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Strength {
    Rtl,
    Ltr,
    Neutral,
}

fn strength(c: Option<char>) -> Strength {
    match c {
        Some(c) if is_arabic_letter(c) => Strength::Rtl,
        Some(c) if c.is_alphanumeric() => Strength::Ltr,
        _ => Strength::Neutral,
    }
}

/// Shapes one line of logical text.
///
/// `logical` must not contain line breaks; callers split paragraphs first.
pub fn shape_line(logical: &str) -> ShapedLine {
    let chars: Vec<char> = logical.chars().collect();
    debug_assert!(!chars.contains(&'\n'), "shape_line expects a single line");
    let (clusters, ligatures_applied) = shape_clusters(&chars);

    let direction = if chars.iter().any(|&c| is_arabic_letter(c)) {
        Direction::Rtl
    } else {
        Direction::Ltr
    };

    let glyphs = match direction {
        Direction::Ltr => clusters.into_iter().flat_map(|c| c.glyphs).collect(),
        Direction::Rtl => reorder_rtl(clusters),
    };

    ShapedLine {
        glyphs,
        direction,
        ligatures_applied,
    }
}

/// Reverses the cluster sequence while keeping left-to-right runs intact.
/// A run starts and ends with a Latin letter or digit and may contain
/// neutrals, but no Arabic letters.
fn reorder_rtl(clusters: Vec<Cluster>) -> Vec<ShapedGlyph> {
    let strengths: Vec<Strength> = clusters.iter().map(|c| strength(c.base_char)).collect();
    let mut units: Vec<Vec<Cluster>> = Vec::new();
    let mut iter = clusters.into_iter().enumerate().peekable();
    while let Some((i, cluster)) = iter.next() {
        if strengths[i] != Strength::Ltr {
            units.push(vec![cluster]);
            continue;
        }
        // extend the run up to the last LTR cluster reachable without an RTL one
        let mut end = i;
        for (k, s) in strengths.iter().enumerate().skip(i + 1) {
            match s {
                Strength::Rtl => break,
                Strength::Ltr => end = k,
                Strength::Neutral => {}
            }
        }
        let mut run = vec![cluster];
        while iter.peek().is_some_and(|(k, _)| *k <= end) {
            run.push(iter.next().unwrap().1);
        }
        units.push(run);
    }

    units
        .into_iter()
        .rev()
        .flat_map(|unit| {
            let ltr = unit.len() > 1 || unit.first().is_some_and(|c| strength(c.base_char) == Strength::Ltr);
            unit.into_iter().flat_map(move |cluster| {
                cluster.glyphs.into_iter().map(move |mut g| {
                    if !ltr {
                        g.ch = mirror(g.ch);
                    }
                    g
                })
            })
        })
        .collect()
}
