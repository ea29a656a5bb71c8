use std::time::{Duration, Instant};

use darijakit_core::metrics::{cer, levenshtein, wer};
use darijakit_core::shaping::shape_line;
use darijakit_core::textnorm::{normalize, NormalizationConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracles::{dp_distance, is_diacritic, ShapingReference, DIACRITICS};

pub fn metric_oracle() -> String {
    let alphabet: Vec<char> = "ابتثجحخدذرسشصضطظعغفقكلمنهوي abcxyzABC0123456789٠١٢".chars().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pairs: Vec<(Vec<char>, Vec<char>)> = (0..10_000)
        .map(|_| {
            let mut s = || -> Vec<char> {
                let n = rng.random_range(0..=40);
                (0..n).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
            };
            (s(), s())
        })
        .collect();

    let started = Instant::now();
    let fast: Vec<_> = pairs.iter().map(|(a, b)| levenshtein(a, b)).collect();
    let elapsed = started.elapsed();

    let mut mismatches = 0;
    for ((a, b), r) in pairs.iter().zip(&fast) {
        let ops_agree = r.substitutions + r.insertions + r.deletions == r.distance
            && r.reference_length + r.insertions == r.hypothesis_length + r.deletions
            && (r.reference_length, r.hypothesis_length) == (a.len(), b.len());
        if r.distance != dp_distance(a, b) || !ops_agree {
            mismatches += 1;
        }
    }
    assert_eq!(mismatches, 0, "{mismatches} of 10000 pairs disagree with the DP oracle");
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    format!("10000 pairs, 0 mismatches, {:.2} s", elapsed.as_secs_f64())
}

pub fn protocol() -> String {
    let cfg = NormalizationConfig::default();
    let a = cer("اب ج", "ابج", &cfg).unwrap().rate;
    let b = wer("سلام عليكم", "سلام عليك", &cfg).unwrap().rate;
    let c = cer("كَتَبَ الوَلَدُ الدَّرْسَ", "كتب الولد الدرس", &cfg).unwrap().rate;
    assert_eq!((a, b, c), (0.0, 0.5, 0.0));
    format!("cer(space)={a} wer={b} cer(harakat)={c}")
}

pub fn normalization() -> String {
    let cfg = NormalizationConfig::default();
    let marks: Vec<char> = DIACRITICS.iter().flat_map(|&(a, b)| (a..=b).filter_map(char::from_u32)).collect();
    let base: Vec<char> = "ابتسلمنويـةءآأإ abcé0١".chars().collect();
    let spaces = [" ", "  ", "\t", "\n", "\r\n", "\u{00A0}", "\u{2009}", "\n\n"];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures = Vec::new();
    for _ in 0..10_000 {
        let mut s = String::new();
        for _ in 0..rng.random_range(0..30) {
            match rng.random_range(0..10) {
                0..=3 => s.push(marks[rng.random_range(0..marks.len())]),
                4..=5 => s.push_str(spaces[rng.random_range(0..spaces.len())]),
                6 => s.push(char::from_u32(rng.random_range(0x20..0x3000)).filter(|c| !c.is_control()).unwrap_or('x')),
                _ => s.push(base[rng.random_range(0..base.len())]),
            }
        }
        let once = normalize(&s, &cfg).text;
        let twice = normalize(&once, &cfg).text;
        if once != twice || once.chars().any(is_diacritic) {
            failures.push(s);
        }
    }
    assert!(failures.is_empty(), "{} failures, first {:?}", failures.len(), failures[0]);
    "10000 strings, 0 failures".into()
}

const HARAKAT: [char; 5] = ['\u{064E}', '\u{064F}', '\u{0650}', '\u{0651}', '\u{0652}'];
const ALEFS: [char; 4] = ['\u{0622}', '\u{0623}', '\u{0625}', '\u{0627}'];

pub fn shaping() -> String {
    let r = ShapingReference::load();
    assert_eq!(r.ligatures.len(), 4);
    let alphabet = r.alphabet();
    let mut rng = ChaCha8Rng::seed_from_u64(2025);
    let mut mismatches = Vec::new();
    for case in 0..500 {
        let len = rng.random_range(2..=6);
        let mut letters: Vec<char> = (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect();
        if case % 5 == 0 {
            let at = rng.random_range(0..len - 1);
            letters[at] = '\u{0644}';
            letters[at + 1] = ALEFS[rng.random_range(0..4)];
        }
        let mut text = String::new();
        for &c in &letters {
            text.push(c);
            if rng.random_bool(0.3) {
                text.push(HARAKAT[rng.random_range(0..HARAKAT.len())]);
            }
        }
        let (mut expected, ligatures) = r.shape(&letters);
        expected.reverse();
        let line = shape_line(&text);
        let bases: Vec<char> = line.glyphs.iter().filter(|g| !g.is_mark()).map(|g| g.ch).collect();
        if bases != expected || line.ligatures_applied != ligatures {
            mismatches.push(text);
        }
    }

    let mut produced = 0;
    for alef in ALEFS {
        for prefix in ["", "\u{0628}"] {
            let text = format!("{prefix}\u{0644}{alef}");
            let letters: Vec<char> = text.chars().collect();
            let (mut expected, n) = r.shape(&letters);
            expected.reverse();
            let line = shape_line(&text);
            if n == 1 && line.ligatures_applied == 1 && line.text() == expected.iter().collect::<String>() {
                produced += 1;
            } else {
                mismatches.push(text);
            }
        }
    }
    assert!(mismatches.is_empty(), "{} mismatches, first {:?}", mismatches.len(), mismatches[0]);
    format!("500 strings, 0 mismatches; lam-alef ligatures {produced}/8 (isolated and final)")
}
