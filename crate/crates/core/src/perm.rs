//! Signed permutations of six coordinates: the image of the two-qubit
//! Clifford group, extended to both determinants.
//!
//! A [`SignedPerm`] sends `e_i` to `sign_i · e_{perm(i)}`. The permutation
//! part is stored as its Lehmer rank in `0..720` and the signs as a 6-bit
//! mask (bit `i` set means `sign_i = -1`), so equality and hashing are a
//! 16-bit comparison.

use std::fmt;
use std::sync::OnceLock;

pub const DIM: usize = 6;
/// `6!`
pub const PERM_COUNT: usize = 720;
/// `6! · 2^6`
pub const SIGNED_PERM_COUNT: usize = PERM_COUNT << DIM;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SignedPerm {
    rank: u16,
    signs: u8,
}

/// Lehmer rank of a permutation of `0..6` given as images.
pub fn lehmer_rank(p: &[u8; DIM]) -> u16 {
    let mut rank = 0u16;
    for i in 0..DIM {
        let smaller = p[i + 1..].iter().filter(|&&x| x < p[i]).count() as u16;
        rank = rank * (DIM - i) as u16 + smaller;
    }
    rank
}

/// Inverse of [`lehmer_rank`].
pub fn lehmer_unrank(mut rank: u16) -> [u8; DIM] {
    let mut digits = [0u8; DIM];
    for i in (0..DIM).rev() {
        let base = (DIM - i) as u16;
        digits[i] = (rank % base) as u8;
        rank /= base;
    }
    let mut pool: Vec<u8> = (0..DIM as u8).collect();
    let mut out = [0u8; DIM];
    for i in 0..DIM {
        out[i] = pool.remove(digits[i] as usize);
    }
    out
}

fn unrank_table() -> &'static [[u8; DIM]; PERM_COUNT] {
    static TABLE: OnceLock<Box<[[u8; DIM]; PERM_COUNT]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Box::new([[0u8; DIM]; PERM_COUNT]);
        for (r, slot) in t.iter_mut().enumerate() {
            *slot = lehmer_unrank(r as u16);
        }
        t
    })
}

impl SignedPerm {
    pub const IDENTITY: SignedPerm = SignedPerm { rank: 0, signs: 0 };

    /// `perm[i]` is the image of coordinate `i`; `signs[i]` is `±1`.
    ///
    /// Panics if `perm` is not a bijection or a sign is not `±1`.
    pub fn new(perm: [u8; DIM], signs: [i8; DIM]) -> SignedPerm {
        Self::try_new(perm, signs).expect("invalid signed permutation")
    }

    pub fn try_new(perm: [u8; DIM], signs: [i8; DIM]) -> Option<SignedPerm> {
        let mut seen = 0u8;
        for &p in &perm {
            if p as usize >= DIM || seen & (1 << p) != 0 {
                return None;
            }
            seen |= 1 << p;
        }
        let mut mask = 0u8;
        for (i, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => mask |= 1 << i,
                _ => return None,
            }
        }
        Some(SignedPerm { rank: lehmer_rank(&perm), signs: mask })
    }

    /// Decodes the compact `(rank, sign mask)` pair.
    pub fn from_parts(rank: u16, sign_mask: u8) -> Option<SignedPerm> {
        (rank < PERM_COUNT as u16 && sign_mask < 64).then_some(SignedPerm { rank, signs: sign_mask })
    }

    /// Dense index in `0..46080`.
    #[inline]
    pub fn index(self) -> usize {
        ((self.rank as usize) << DIM) | self.signs as usize
    }

    pub fn from_index(index: usize) -> SignedPerm {
        assert!(index < SIGNED_PERM_COUNT);
        SignedPerm { rank: (index >> DIM) as u16, signs: (index & 63) as u8 }
    }

    /// Every signed permutation, in index order.
    pub fn all() -> impl Iterator<Item = SignedPerm> {
        (0..SIGNED_PERM_COUNT).map(SignedPerm::from_index)
    }

    #[inline]
    pub fn rank(self) -> u16 {
        self.rank
    }

    #[inline]
    pub fn sign_mask(self) -> u8 {
        self.signs
    }

    #[inline]
    pub fn perm(self) -> [u8; DIM] {
        unrank_table()[self.rank as usize]
    }

    #[inline]
    pub fn image(self, i: usize) -> usize {
        unrank_table()[self.rank as usize][i] as usize
    }

    #[inline]
    pub fn sign(self, i: usize) -> i8 {
        if self.signs & (1 << i) != 0 {
            -1
        } else {
            1
        }
    }

    pub fn signs(self) -> [i8; DIM] {
        std::array::from_fn(|i| self.sign(i))
    }

    /// Matrix product `self · other`.
    pub fn compose(self, other: SignedPerm) -> SignedPerm {
        let p = self.perm();
        let q = other.perm();
        let mut perm = [0u8; DIM];
        let mut signs = [1i8; DIM];
        for i in 0..DIM {
            let j = q[i] as usize;
            perm[i] = p[j];
            signs[i] = other.sign(i) * self.sign(j);
        }
        SignedPerm::new(perm, signs)
    }

    pub fn inverse(self) -> SignedPerm {
        let p = self.perm();
        let mut perm = [0u8; DIM];
        let mut signs = [1i8; DIM];
        for i in 0..DIM {
            let j = p[i] as usize;
            perm[j] = i as u8;
            signs[j] = self.sign(i);
        }
        SignedPerm::new(perm, signs)
    }

    /// Sign of the permutation times the product of the signs.
    pub fn det(self) -> i8 {
        let p = self.perm();
        let mut inversions = 0;
        for i in 0..DIM {
            for j in i + 1..DIM {
                if p[i] > p[j] {
                    inversions += 1;
                }
            }
        }
        let parity = if inversions % 2 == 0 { 1 } else { -1 };
        parity * if self.signs.count_ones().is_multiple_of(2) { 1 } else { -1 }
    }

    /// Entry `(row, col)` of the matrix as `-1`, `0` or `1`.
    pub fn entry(self, row: usize, col: usize) -> i8 {
        if self.image(col) == row {
            self.sign(col)
        } else {
            0
        }
    }

    /// Swap of coordinates `i` and `j`, no signs.
    pub fn transposition(i: usize, j: usize) -> SignedPerm {
        let mut perm: [u8; DIM] = std::array::from_fn(|k| k as u8);
        perm.swap(i, j);
        SignedPerm::new(perm, [1; DIM])
    }
}

impl fmt::Debug for SignedPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignedPerm{:?}{:?}", self.perm(), self.signs())
    }
}
