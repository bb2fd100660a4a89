#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use so6_core::perm::SIGNED_PERM_COUNT;
use so6_core::{apply_gen, Dyadic, GenIndex, SignedPerm, So6Matrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_perm(rng: &mut impl Rng) -> SignedPerm {
    SignedPerm::from_index(rng.gen_range(0..SIGNED_PERM_COUNT))
}

pub fn random_gen(rng: &mut impl Rng) -> GenIndex {
    let all: Vec<GenIndex> = GenIndex::all_involutive().collect();
    all[rng.gen_range(0..all.len())]
}

/// Product of `len` random involutive generators applied to the identity.
pub fn random_word_matrix(rng: &mut impl Rng, len: usize) -> So6Matrix {
    let mut m = So6Matrix::identity();
    for _ in 0..len {
        m = apply_gen(random_gen(rng), &m).unwrap();
    }
    m
}

/// A reduced dyadic whose coefficients stay well inside the packed range
/// under one multiplication.
pub fn random_dyadic(rng: &mut impl Rng) -> Dyadic {
    loop {
        let c = rng.gen_range(0..24i64);
        let lim = 1i64 << rng.gen_range(0..12);
        let a = rng.gen_range(-lim..=lim);
        let b = rng.gen_range(-lim..=lim);
        if let Ok(x) = Dyadic::new(a, b, c) {
            return x;
        }
    }
}
