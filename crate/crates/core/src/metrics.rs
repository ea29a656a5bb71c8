//! Character and word error rates.
//!
//! CER compares normalized texts with all whitespace removed, codepoint by
//! codepoint. WER compares the whitespace-delimited token sequences. Both
//! divide the unit-cost Levenshtein distance by the reference length and are
//! never clamped, so a long hallucinated hypothesis can score above 1.0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textnorm::{normalize, NormalizationConfig};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("reference has no scorable content after normalization")]
    EmptyReference,
    #[error("no scorable samples to aggregate")]
    EmptyRun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EditDistanceResult {
    pub distance: usize,
    pub reference_length: usize,
    pub hypothesis_length: usize,
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
}

impl EditDistanceResult {
    /// `distance / reference_length`, or `None` for an empty reference.
    pub fn rate(&self) -> Option<f64> {
        (self.reference_length > 0).then(|| self.distance as f64 / self.reference_length as f64)
    }
}

const DIAG: u8 = 0;
const DEL: u8 = 1;
const INS: u8 = 2;

/// Unit-cost Levenshtein alignment.
///
/// Operation counts come from a single canonical optimal alignment: walking
/// back from the end, a diagonal step (match or substitution) is preferred,
/// then a deletion, then an insertion.
pub fn levenshtein<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> EditDistanceResult {
    // A shared suffix is always consumed by diagonal matches under the
    // preference order above, so dropping it leaves the alignment unchanged.
    let common_suffix = reference
        .iter()
        .rev()
        .zip(hypothesis.iter().rev())
        .take_while(|(a, b)| a == b)
        .count();
    let r = &reference[..reference.len() - common_suffix];
    let h = &hypothesis[..hypothesis.len() - common_suffix];
    let (n, m) = (r.len(), h.len());
    let width = m + 1;

    let mut prev: Vec<usize> = (0..=m).collect();
    let mut cur = vec![0usize; width];
    let mut dirs = vec![INS; (n + 1) * width];
    for i in 1..=n {
        dirs[i * width] = DEL;
    }

    for i in 1..=n {
        cur[0] = i;
        for j in 1..=m {
            let diag = prev[j - 1] + usize::from(r[i - 1] != h[j - 1]);
            let del = prev[j] + 1;
            let ins = cur[j - 1] + 1;
            let (best, dir) = if diag <= del && diag <= ins {
                (diag, DIAG)
            } else if del <= ins {
                (del, DEL)
            } else {
                (ins, INS)
            };
            cur[j] = best;
            dirs[i * width + j] = dir;
        }
        std::mem::swap(&mut prev, &mut cur);
    }

    let (mut i, mut j) = (n, m);
    let (mut subs, mut ins, mut dels) = (0, 0, 0);
    while i > 0 || j > 0 {
        match dirs[i * width + j] {
            DIAG => {
                if r[i - 1] != h[j - 1] {
                    subs += 1;
                }
                i -= 1;
                j -= 1;
            }
            DEL => {
                dels += 1;
                i -= 1;
            }
            _ => {
                ins += 1;
                j -= 1;
            }
        }
    }

    EditDistanceResult {
        distance: prev[m],
        reference_length: reference.len(),
        hypothesis_length: hypothesis.len(),
        substitutions: subs,
        insertions: ins,
        deletions: dels,
    }
}

/// Distance only, in O(min(n, m)) memory.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let (a, b) = (&a[prefix..], &b[prefix..]);
    let suffix = a.iter().rev().zip(b.iter().rev()).take_while(|(x, y)| x == y).count();
    let (a, b) = (&a[..a.len() - suffix], &b[..b.len() - suffix]);
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }

    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (i, x) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in short.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = (diag + usize::from(x != y)).min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[short.len()]
}

/// One error-rate component (character or word level) of a score card.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateScore {
    pub rate: f64,
    pub edit: EditDistanceResult,
}

fn rate_score(edit: EditDistanceResult) -> Result<RateScore, MetricsError> {
    let rate = edit.rate().ok_or(MetricsError::EmptyReference)?;
    Ok(RateScore { rate, edit })
}

pub fn cer(
    ground_truth: &str,
    hypothesis: &str,
    cfg: &NormalizationConfig,
) -> Result<RateScore, MetricsError> {
    let chars = |s: &str| -> Vec<char> {
        normalize(s, cfg).text.chars().filter(|c| !c.is_whitespace()).collect()
    };
    let (reference, hyp) = (chars(ground_truth), chars(hypothesis));
    if reference.is_empty() {
        return Err(MetricsError::EmptyReference);
    }
    rate_score(levenshtein(&reference, &hyp))
}

pub fn wer(
    ground_truth: &str,
    hypothesis: &str,
    cfg: &NormalizationConfig,
) -> Result<RateScore, MetricsError> {
    let (gt, hyp) = (normalize(ground_truth, cfg).text, normalize(hypothesis, cfg).text);
    let reference: Vec<&str> = gt.split_whitespace().collect();
    let hyp: Vec<&str> = hyp.split_whitespace().collect();
    if reference.is_empty() {
        return Err(MetricsError::EmptyReference);
    }
    rate_score(levenshtein(&reference, &hyp))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCard {
    pub sample_id: String,
    pub cer: f64,
    pub wer: f64,
    pub char_edit: EditDistanceResult,
    pub word_edit: EditDistanceResult,
}

pub fn score(
    sample_id: impl Into<String>,
    ground_truth: &str,
    hypothesis: &str,
    cfg: &NormalizationConfig,
) -> Result<ScoreCard, MetricsError> {
    let c = cer(ground_truth, hypothesis, cfg)?;
    let w = wer(ground_truth, hypothesis, cfg)?;
    Ok(ScoreCard {
        sample_id: sample_id.into(),
        cer: c.rate,
        wer: w.rate,
        char_edit: c.edit,
        word_edit: w.edit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateScore {
    /// Total character distance over total reference characters.
    pub micro_cer: f64,
    pub micro_wer: f64,
    /// Arithmetic mean of per-sample rates.
    pub macro_cer: f64,
    pub macro_wer: f64,
    pub n_samples: usize,
    pub char_distance: usize,
    pub char_reference_length: usize,
    pub word_distance: usize,
    pub word_reference_length: usize,
}

/// Order-independent mean: summing sorted values makes the float result
/// independent of the order cards arrive in.
fn stable_mean(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    values.into_iter().sum::<f64>() / n
}

pub fn aggregate(cards: &[ScoreCard]) -> Result<AggregateScore, MetricsError> {
    if cards.is_empty() {
        return Err(MetricsError::EmptyRun);
    }
    let char_distance: usize = cards.iter().map(|c| c.char_edit.distance).sum();
    let char_reference_length: usize = cards.iter().map(|c| c.char_edit.reference_length).sum();
    let word_distance: usize = cards.iter().map(|c| c.word_edit.distance).sum();
    let word_reference_length: usize = cards.iter().map(|c| c.word_edit.reference_length).sum();
    if char_reference_length == 0 || word_reference_length == 0 {
        return Err(MetricsError::EmptyRun);
    }
    Ok(AggregateScore {
        micro_cer: char_distance as f64 / char_reference_length as f64,
        micro_wer: word_distance as f64 / word_reference_length as f64,
        macro_cer: stable_mean(cards.iter().map(|c| c.cer).collect()),
        macro_wer: stable_mean(cards.iter().map(|c| c.wer).collect()),
        n_samples: cards.len(),
        char_distance,
        char_reference_length,
        word_distance,
        word_reference_length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn identical_and_insertion() {
        let r = levenshtein(&chars("كتب"), &chars("كتب"));
        assert_eq!(r.distance, 0);
        let r = levenshtein(&chars("كتب"), &chars("كتبت"));
        assert_eq!((r.distance, r.insertions, r.substitutions, r.deletions), (1, 1, 0, 0));
        let r = levenshtein(&chars(""), &chars("ab"));
        assert_eq!((r.distance, r.insertions), (2, 2));
        let r = levenshtein(&chars("ab"), &chars(""));
        assert_eq!((r.distance, r.deletions), (2, 2));
    }

    #[test]
    fn tie_break_prefers_substitution() {
        // "ab" -> "ba": two substitutions or one deletion + one insertion
        let r = levenshtein(&chars("ab"), &chars("ba"));
        assert_eq!((r.distance, r.substitutions, r.insertions, r.deletions), (2, 2, 0, 0));
    }

    #[test]
    fn distance_only_agrees() {
        for (a, b) in [("kitten", "sitting"), ("", "abc"), ("flaw", "lawn"), ("abc", "abc")] {
            assert_eq!(edit_distance(&chars(a), &chars(b)), levenshtein(&chars(a), &chars(b)).distance);
        }
    }

    #[test]
    fn cer_examples() {
        let cfg = NormalizationConfig::default();
        assert_eq!(cer("كتب", "كتب", &cfg).unwrap().rate, 0.0);
        assert_eq!(cer("اب ج", "ابج", &cfg).unwrap().rate, 0.0);
        let r = cer("كتب", "كتبت", &cfg).unwrap();
        assert_eq!(r.rate, 1.0 / 3.0);
        assert_eq!(cer("  \n", "x", &cfg), Err(MetricsError::EmptyReference));
        assert_eq!(cer("َ", "x", &cfg), Err(MetricsError::EmptyReference));
    }

    #[test]
    fn wer_examples() {
        let cfg = NormalizationConfig::default();
        assert_eq!(wer("سلام عليكم", "سلام عليكم", &cfg).unwrap().rate, 0.0);
        assert_eq!(wer("سلام عليكم", "سلام عليك", &cfg).unwrap().rate, 0.5);
        assert_eq!(wer("كَتَبَ الولد", "كتب الولد", &cfg).unwrap().rate, 0.0);
        assert_eq!(wer("", "x", &cfg), Err(MetricsError::EmptyReference));
    }

    #[test]
    fn rates_are_not_clamped() {
        let cfg = NormalizationConfig::default();
        assert_eq!(cer("ab", "cdefgh", &cfg).unwrap().rate, 3.0);
    }

    fn card(id: &str, dist: usize, len: usize) -> ScoreCard {
        let edit = EditDistanceResult {
            distance: dist,
            reference_length: len,
            hypothesis_length: len,
            substitutions: dist,
            ..Default::default()
        };
        ScoreCard {
            sample_id: id.into(),
            cer: dist as f64 / len as f64,
            wer: dist as f64 / len as f64,
            char_edit: edit,
            word_edit: edit,
        }
    }

    #[test]
    fn aggregate_examples() {
        let agg = aggregate(&[card("a", 0, 10), card("b", 5, 10)]).unwrap();
        assert_eq!((agg.macro_cer, agg.micro_cer), (0.25, 0.25));

        let agg = aggregate(&[card("a", 0, 30), card("b", 5, 10)]).unwrap();
        assert_eq!((agg.macro_cer, agg.micro_cer), (0.25, 0.125));

        let agg = aggregate(&[card("a", 1, 5)]).unwrap();
        assert_eq!(agg.macro_cer, agg.micro_cer);
        assert_eq!(agg.micro_cer, 0.2);

        assert_eq!(aggregate(&[]), Err(MetricsError::EmptyRun));
    }

    #[test]
    fn aggregate_ignores_order() {
        let mut cards: Vec<ScoreCard> = (1..40).map(|i| card(&i.to_string(), i % 7, 3 + i % 11)).collect();
        let a = aggregate(&cards).unwrap();
        cards.reverse();
        cards.swap(3, 17);
        assert_eq!(a, aggregate(&cards).unwrap());
    }
}
