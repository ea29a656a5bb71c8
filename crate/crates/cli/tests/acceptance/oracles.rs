//! Reference implementations written independently of the library.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Full-matrix Wagner-Fischer distance.
pub fn dp_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// The documented default diacritic set.
pub const DIACRITICS: [(u32, u32); 8] = [
    (0x064B, 0x065F),
    (0x0670, 0x0670),
    (0x06D6, 0x06DC),
    (0x06DF, 0x06E4),
    (0x06E7, 0x06E8),
    (0x06EA, 0x06ED),
    (0x08D3, 0x08E1),
    (0x08E3, 0x08FF),
];

pub fn is_diacritic(c: char) -> bool {
    DIACRITICS.iter().any(|&(a, b)| (a..=b).contains(&(c as u32)))
}

/// Character and word edit counts under the default normalization.
pub struct Counts {
    pub char_distance: usize,
    pub char_reference: usize,
    pub word_distance: usize,
    pub word_reference: usize,
}

pub fn count(reference: &str, hypothesis: &str) -> Counts {
    let clean = |s: &str| -> String { s.chars().filter(|c| !is_diacritic(*c)).collect() };
    let (r, h) = (clean(reference), clean(hypothesis));
    let letters = |s: &str| -> Vec<char> { s.chars().filter(|c| !c.is_whitespace()).collect() };
    let (rc, hc) = (letters(&r), letters(&h));
    let (rw, hw): (Vec<&str>, Vec<&str>) = (r.split_whitespace().collect(), h.split_whitespace().collect());
    Counts {
        char_distance: dp_distance(&rc, &hc),
        char_reference: rc.len(),
        word_distance: dp_distance(&rw, &hw),
        word_reference: rw.len(),
    }
}

/// The noisy oracle's corruption: per character, one uniform draw; below
/// `p` the character becomes a different letter of U+0621..063A,
/// U+0641..064A. ChaCha8 seeded with SHA-256 of `"{seed}:{sample_id}"`.
pub fn simulate_noisy(p: f64, seed: u64, sample_id: &str, text: &str) -> String {
    let letters: Vec<char> = (0x0621u32..=0x063A).chain(0x0641..=0x064A).filter_map(char::from_u32).collect();
    let mut rng = ChaCha8Rng::from_seed(Sha256::digest(format!("{seed}:{sample_id}")).into());
    text.chars()
        .map(|c| {
            if rng.random::<f64>() >= p {
                return c;
            }
            let others: Vec<char> = letters.iter().copied().filter(|&l| l != c).collect();
            others[rng.random_range(0..others.len())]
        })
        .collect()
}

const SHAPING: &str = include_str!("../../../core/data/ArabicShaping.txt");
const FORMS: &str = include_str!("../../../core/data/ArabicPresentationForms.txt");

/// Contextual shaping straight from the Unicode joining types and
/// presentation-form decompositions.
#[derive(Default)]
pub struct ShapingReference {
    joining: HashMap<char, char>,
    forms: HashMap<char, HashMap<String, char>>,
    pub ligatures: HashMap<(char, char), HashMap<String, char>>,
}

fn hex(s: &str) -> char {
    char::from_u32(u32::from_str_radix(s.trim(), 16).unwrap()).unwrap()
}

impl ShapingReference {
    pub fn load() -> Self {
        let mut r = Self::default();
        for line in SHAPING.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split(';').collect();
            r.joining.insert(hex(cols[0]), cols[2].trim().chars().next().unwrap());
        }
        for line in FORMS.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split(';').collect();
            let Some(rest) = cols[5].trim().strip_prefix('<') else { continue };
            let (tag, letters) = rest.split_once('>').unwrap();
            let letters: Vec<char> = letters.split_whitespace().map(hex).collect();
            let cp = hex(cols[0]);
            match letters.as_slice() {
                [one] => {
                    let entry = r.forms.entry(*one).or_default();
                    if cp >= '\u{FE70}' || !entry.contains_key(tag) {
                        entry.insert(tag.to_string(), cp);
                    }
                }
                ['\u{0644}', alef @ ('\u{0622}' | '\u{0623}' | '\u{0625}' | '\u{0627}')] => {
                    r.ligatures.entry(('\u{0644}', *alef)).or_default().insert(tag.to_string(), cp);
                }
                _ => {}
            }
        }
        r
    }

    fn jt(&self, c: char) -> char {
        *self.joining.get(&c).unwrap_or(&'U')
    }

    /// Arabic-block letters with every contextual form they need.
    pub fn alphabet(&self) -> Vec<char> {
        let mut out: Vec<char> = self
            .forms
            .iter()
            .filter(|(c, f)| {
                let need: &[&str] = match self.jt(**c) {
                    'D' => &["isolated", "initial", "medial", "final"],
                    'R' => &["isolated", "final"],
                    'U' => &["isolated"],
                    _ => return false,
                };
                need.iter().all(|t| f.contains_key(*t))
            })
            .map(|(c, _)| *c)
            .filter(|c| ('\u{0621}'..='\u{06FF}').contains(c))
            .collect();
        out.sort();
        out
    }

    /// Presentation glyphs in logical order, and the ligature count.
    pub fn shape(&self, letters: &[char]) -> (Vec<char>, usize) {
        let left = |c: char| matches!(self.jt(c), 'D' | 'L' | 'C');
        let right = |c: char| matches!(self.jt(c), 'D' | 'R' | 'C');
        let mut out = Vec::new();
        let mut ligatures = 0;
        let mut i = 0;
        while i < letters.len() {
            let c = letters[i];
            let before = i > 0 && left(letters[i - 1]) && right(c);
            if c == '\u{0644}' && i + 1 < letters.len() {
                if let Some(lig) = self.ligatures.get(&(c, letters[i + 1])) {
                    out.push(lig[if before { "final" } else { "isolated" }]);
                    ligatures += 1;
                    i += 2;
                    continue;
                }
            }
            let after = i + 1 < letters.len() && left(c) && right(letters[i + 1]);
            let tag = match (before, after) {
                (false, false) => "isolated",
                (false, true) => "initial",
                (true, true) => "medial",
                (true, false) => "final",
            };
            out.push(self.forms[&c][tag]);
            i += 1;
        }
        (out, ligatures)
    }
}
