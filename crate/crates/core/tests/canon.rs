mod common;

use proptest::prelude::*;
use so6_core::oracle::{naive_canon, naive_equivalent, Variant};
use so6_core::perm::SIGNED_PERM_COUNT;
use so6_core::{canonicalize, equivalent, signature, SignedPerm, So6Matrix};

fn word_matrix() -> impl Strategy<Value = So6Matrix> {
    (any::<u64>(), 0usize..10).prop_map(|(seed, len)| common::random_word_matrix(&mut common::rng(seed), len))
}

fn perm() -> impl Strategy<Value = SignedPerm> {
    (0..SIGNED_PERM_COUNT).prop_map(SignedPerm::from_index)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_is_an_orbit_invariant(u in word_matrix(), p in perm(), q in perm()) {
        let v = u.act_left(p).act_right(q);
        prop_assert_eq!(canonicalize(&v).matrix, canonicalize(&u).matrix);
        prop_assert_eq!(signature(&v), signature(&u));
    }

    #[test]
    fn witnesses_reproduce_the_form(u in word_matrix()) {
        let cf = canonicalize(&u);
        prop_assert_eq!(u.act_left(cf.left).act_right(cf.right), cf.matrix.clone());
        let again = canonicalize(&cf.matrix);
        prop_assert_eq!(again.left, SignedPerm::IDENTITY);
        prop_assert_eq!(again.right, SignedPerm::IDENTITY);
    }

    #[test]
    fn twisted_matrices_stay_orthogonal(u in word_matrix()) {
        prop_assert!(u.twist().is_orthogonal());
        prop_assert_eq!(u.twist().twist(), u);
    }

    #[test]
    fn transpose_is_the_inverse(u in word_matrix()) {
        prop_assert_eq!(u.mul(&u.transpose()).unwrap(), So6Matrix::identity());
    }
}

#[test]
fn agrees_with_exhaustive_canon() {
    let mut rng = common::rng(11);
    for len in 0..8 {
        for _ in 0..3 {
            let u = common::random_word_matrix(&mut rng, len);
            assert_eq!(canonicalize(&u).matrix, naive_canon(&u, Variant::SignedPerms), "length {len}");
        }
    }
}

#[test]
fn equivalence_matches_oracle_on_pairs() {
    let mut rng = common::rng(12);
    for _ in 0..20 {
        let u = common::random_word_matrix(&mut rng, 3);
        let v = common::random_word_matrix(&mut rng, 3);
        assert_eq!(equivalent(&u, &v), naive_equivalent(&u, &v, Variant::SignedPerms));
        let w = v.act_left(common::random_perm(&mut rng)).act_right(common::random_perm(&mut rng));
        assert!(equivalent(&v, &w));
    }
}
