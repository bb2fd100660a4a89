mod common;

use proptest::prelude::*;
use so6_core::store::{format_matrix, format_word, parse_matrix, parse_word};
use so6_core::word::{evaluate_factors, invert_factors, normalize, Factor};
use so6_core::perm::SIGNED_PERM_COUNT;
use so6_core::{evaluate_word, GenIndex, SignedPerm, So6Matrix, Word};

fn factor() -> impl Strategy<Value = Factor> {
    prop_oneof![
        (0..SIGNED_PERM_COUNT).prop_map(|i| Factor::Perm(SignedPerm::from_index(i))),
        (0u8..6, 0u8..6).prop_filter_map("distinct", |(f, t)| (f != t).then_some(Factor::Rot { from: f, to: t })),
        (0usize..6, 0usize..6, any::<bool>())
            .prop_filter_map("distinct", |(i, j, inv)| (i < j).then(|| Factor::Gen(GenIndex::new(i, j, inv)))),
    ]
}

fn word() -> impl Strategy<Value = Word> {
    (prop::collection::vec((0usize..6, 0usize..6), 0..12), 0..SIGNED_PERM_COUNT).prop_map(|(pairs, p)| {
        let steps = pairs.into_iter().filter(|(i, j)| i < j).map(|(i, j)| GenIndex::plain(i, j)).collect();
        Word::new(steps, SignedPerm::from_index(p))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn normalize_preserves_the_product(fs in prop::collection::vec(factor(), 0..10)) {
        let w = normalize(&fs);
        prop_assert_eq!(w.tcount(), fs.iter().map(|f| f.tcount()).sum::<usize>());
        prop_assert_eq!(evaluate_word(&w).unwrap(), evaluate_factors(&fs).unwrap());
    }

    #[test]
    fn inverse_factors_cancel(fs in prop::collection::vec(factor(), 0..10)) {
        let m = evaluate_factors(&fs).unwrap();
        let inv = evaluate_factors(&invert_factors(&fs)).unwrap();
        prop_assert_eq!(m.mul(&inv).unwrap(), So6Matrix::identity());
    }

    #[test]
    fn word_text_round_trip(w in word()) {
        let text = format_word(&w);
        prop_assert_eq!(parse_word(&text).unwrap(), w);
    }

    #[test]
    fn matrix_text_round_trip(w in word()) {
        let m = evaluate_word(&w).unwrap();
        prop_assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
    }
}

#[test]
fn malformed_words_are_rejected() {
    for bad in ["G(1,1)", "G(0,2)", "G(1,7)", "X(2,", "P[1 2 3; + + +]", "Q(1,2)"] {
        assert!(parse_word(bad).is_err(), "{bad}");
    }
}
