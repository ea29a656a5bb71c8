use darijakit_core::textnorm::{is_diacritic, normalize, NormalizationConfig};
use proptest::prelude::*;

/// Mixed strings weighted toward Arabic letters, harakat and awkward
/// whitespace.
fn messy_text() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        6 => proptest::char::range('\u{0621}', '\u{064A}'),
        4 => proptest::char::range('\u{064B}', '\u{065F}'),
        1 => proptest::sample::select(vec!['\u{0670}', '\u{06D6}', '\u{06E1}', '\u{08F0}', '\u{0640}', '\u{200C}', '\u{200D}']),
        3 => proptest::sample::select(vec![' ', ' ', '\t', '\n', '\r', '\u{00A0}', '\u{2028}', '\u{3000}']),
        2 => proptest::char::range('a', 'z'),
        1 => proptest::char::any(),
    ];
    proptest::collection::vec(piece, 0..60).prop_map(|v| v.into_iter().collect())
}

fn non_ws_non_mark(s: &str, cfg: &NormalizationConfig) -> String {
    s.chars().filter(|c| !c.is_whitespace() && !is_diacritic(*c, cfg)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn idempotent_and_mark_free(s in messy_text()) {
        let cfg = NormalizationConfig::default();
        let once = normalize(&s, &cfg);
        let twice = normalize(&once.text, &cfg);
        prop_assert_eq!(&twice.text, &once.text);
        prop_assert!(once.text.chars().all(|c| !is_diacritic(c, &cfg)));
        prop_assert!(!once.text.contains('\r'));
        prop_assert!(!once.text.contains("  "));
        for line in once.text.split('\n').filter(|_| !once.text.is_empty()) {
            prop_assert_eq!(line.trim(), line);
            prop_assert!(!line.is_empty());
        }
        prop_assert_eq!(non_ws_non_mark(&once.text, &cfg), non_ws_non_mark(&s, &cfg));
    }
}

proptest! {
    #[test]
    fn harakat_only_differences_vanish(
        base in proptest::collection::vec(proptest::char::range('\u{0621}', '\u{064A}'), 1..20),
        marks in proptest::collection::vec((0usize..20, proptest::char::range('\u{064B}', '\u{0652}')), 1..10),
    ) {
        let cfg = NormalizationConfig::default();
        let plain: String = base.iter().collect();
        let mut decorated = base.clone();
        for (pos, mark) in marks {
            decorated.insert(pos.min(decorated.len()), mark);
        }
        let decorated: String = decorated.into_iter().collect();
        prop_assert_eq!(normalize(&plain, &cfg).text, normalize(&decorated, &cfg).text);
    }

    #[test]
    fn idempotent_with_nfc_and_flat_lines(s in messy_text()) {
        let cfg = NormalizationConfig { nfc: true, preserve_line_breaks: false, strip_tatweel: true, ..Default::default() };
        let once = normalize(&s, &cfg).text;
        prop_assert_eq!(normalize(&once, &cfg).text, once.clone());
        prop_assert!(!once.contains('\n'));
    }
}
