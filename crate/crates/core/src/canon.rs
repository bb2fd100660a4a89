//! Class signatures and exact canonical forms under `U ↦ P₁ U P₂`, where
//! `P₁` and `P₂` range over all signed permutations (both determinants).
//!
//! The canonical form is the lexicographic minimum of the orbit, comparing
//! entries by [`Dyadic::order_key`] in column-major order. For a fixed row
//! action the best right action is "sign-normalize each column, then sort
//! the columns", so only the row side needs searching. [`canonicalize`]
//! does that search column by column: after the first `k` output columns
//! are fixed, rows that agree on all of them form a cell whose internal
//! order is still free, and rows that were zero so far still have a free
//! sign. Each step keeps every partial row action that reaches the
//! smallest next column.

use crate::dyadic::Dyadic;
use crate::matrix::{idx, So6Matrix, LEN};
use crate::perm::{SignedPerm, DIM};

/// Packed word of an entry with its sign normalized away, so that `x` and
/// `-x` have the same key.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EntryKey(pub u64);

impl EntryKey {
    #[inline]
    pub fn of(x: Dyadic) -> EntryKey {
        let (a, b) = (x.a(), x.b());
        let y = if a < 0 || (a == 0 && b < 0) { -x } else { x };
        EntryKey(y.to_bits())
    }
}

/// Orbit invariant: a 64-bit hash of the row and column key multisets plus
/// two cheap exact counts.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Signature {
    pub hash: u64,
    pub max_exp: u16,
    pub zeros: u8,
}

/// Fixed hash constants. Changing any of them changes every signature, so
/// stored tables carry [`fingerprint`] in their header.
pub const HASH_CONSTANTS: [u64; 4] = [
    0x9E37_79B9_7F4A_7C15,
    0xBF58_476D_1CE4_E5B9,
    0x94D0_49BB_1331_11EB,
    0xD6E8_FEB8_6659_FD93,
];

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(HASH_CONSTANTS[1]);
    z = (z ^ (z >> 27)).wrapping_mul(HASH_CONSTANTS[2]);
    z ^ (z >> 31)
}

#[inline]
fn fold(words: &[u64; DIM], seed: u64) -> u64 {
    let mut h = seed;
    for &w in words {
        h = mix(h.wrapping_add(w).wrapping_add(HASH_CONSTANTS[0]));
    }
    h
}

/// Hash of a sorted multiset of six keys per line, combined symmetrically
/// over the six lines.
fn lines_hash(keys: &[[u64; DIM]; DIM], seed: u64) -> u64 {
    let mut hs = [0u64; DIM];
    for (h, line) in hs.iter_mut().zip(keys) {
        let mut s = *line;
        s.sort_unstable();
        *h = fold(&s, seed);
    }
    hs.sort_unstable();
    fold(&hs, seed ^ HASH_CONSTANTS[3])
}

pub fn signature(u: &So6Matrix) -> Signature {
    let e = u.entries();
    let mut cols = [[0u64; DIM]; DIM];
    let mut rows = [[0u64; DIM]; DIM];
    let mut zeros = 0u8;
    let mut max_exp = 0u32;
    for c in 0..DIM {
        for r in 0..DIM {
            let x = e[idx(r, c)];
            let k = EntryKey::of(x).0;
            cols[c][r] = k;
            rows[r][c] = k;
            zeros += x.is_zero() as u8;
            max_exp = max_exp.max(x.exp());
        }
    }
    let hash = lines_hash(&cols, HASH_CONSTANTS[0]) ^ lines_hash(&rows, HASH_CONSTANTS[2]).rotate_left(17);
    Signature { hash: mix(hash), max_exp: max_exp as u16, zeros }
}

/// Hash of the signature constants, stored in file headers.
pub fn fingerprint() -> u64 {
    let mut h = 0x534F_364C_5554_3031; // "SO6LUT01"
    for &k in &HASH_CONSTANTS {
        h = mix(h ^ k);
    }
    // pin the behaviour, not just the constants
    let probe = crate::matrix::gate_image(crate::matrix::Gate::T0);
    mix(h ^ signature(&probe).hash)
}

/// Orbit minimum with witnesses: `matrix = left · U · right`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub matrix: So6Matrix,
    pub left: SignedPerm,
    pub right: SignedPerm,
}

/// A partial row action after some output columns are fixed.
#[derive(Clone, Copy)]
struct State {
    /// Source row at each output position.
    order: [u8; DIM],
    /// Bit `p` set: a cell starts at position `p`.
    starts: u8,
    /// Per source row: `±1`, or 0 while the row is still free.
    sign: [i8; DIM],
    used: u8,
    /// Per output column: source column and its sign.
    cols: [(u8, i8); DIM],
}

impl State {
    fn key(&self) -> u64 {
        let mut k = self.used as u64 | (self.starts as u64) << 6;
        for p in 0..DIM {
            k |= (self.order[p] as u64) << (12 + 3 * p);
        }
        for r in 0..DIM {
            let s = match self.sign[r] {
                0 => 0u64,
                1 => 1,
                _ => 2,
            };
            k |= s << (30 + 2 * r);
        }
        k
    }

    /// Cell ranges `[lo, hi)` in position order.
    fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let mut lo = 0;
        std::iter::from_fn(move || {
            if lo >= DIM {
                return None;
            }
            let mut hi = lo + 1;
            while hi < DIM && self.starts & (1 << hi) == 0 {
                hi += 1;
            }
            let out = (lo, hi);
            lo = hi;
            Some(out)
        })
    }
}

struct Slot {
    key: u64,
    val: Dyadic,
    row: u8,
    sign: i8,
}

/// Column `j` with sign `s` under partial action `st`: each cell sorted
/// ascending, free rows taking whichever sign is smaller.
fn column_under(u: &[Dyadic; LEN], st: &State, j: usize, s: i8, out: &mut [Slot; DIM]) {
    for p in 0..DIM {
        let r = st.order[p] as usize;
        let x = u[idx(r, j)];
        let (val, sign) = match st.sign[r] {
            0 if x.is_zero() => (x, 0),
            0 => {
                let nx = -x;
                if nx.sort_key() < x.sort_key() {
                    (nx, -s)
                } else {
                    (x, s)
                }
            }
            sr => (if sr * s > 0 { x } else { -x }, sr),
        };
        out[p] = Slot { key: val.sort_key(), val, row: r as u8, sign };
    }
    for (lo, hi) in st.cells() {
        if hi - lo > 1 {
            out[lo..hi].sort_unstable_by_key(|sl| (sl.key, sl.row));
        }
    }
}

pub fn canonicalize(u: &So6Matrix) -> CanonicalForm {
    let e = u.entries();
    let mut states = vec![State {
        order: [0, 1, 2, 3, 4, 5],
        starts: 1,
        sign: [0; DIM],
        used: 0,
        cols: [(0, 1); DIM],
    }];
    let mut next: Vec<State> = Vec::new();
    let mut out = [Dyadic::ZERO; LEN];
    let mut slots: [Slot; DIM] = std::array::from_fn(|_| Slot { key: 0, val: Dyadic::ZERO, row: 0, sign: 0 });
    for k in 0..DIM {
        let mut best: Option<[u64; DIM]> = None;
        next.clear();
        for st in &states {
            let has_fixed = st.sign.iter().any(|&s| s != 0);
            for j in 0..DIM {
                if st.used & (1 << j) != 0 {
                    continue;
                }
                for s in [1i8, -1] {
                    if s < 0 && !has_fixed {
                        continue;
                    }
                    column_under(e, st, j, s, &mut slots);
                    let keys: [u64; DIM] = std::array::from_fn(|p| slots[p].key);
                    match best.map(|b| keys.cmp(&b)) {
                        Some(std::cmp::Ordering::Greater) => continue,
                        Some(std::cmp::Ordering::Equal) => {}
                        _ => {
                            best = Some(keys);
                            next.clear();
                            for p in 0..DIM {
                                out[idx(p, k)] = slots[p].val;
                            }
                        }
                    }
                    let mut ns = *st;
                    ns.used |= 1 << j;
                    ns.cols[k] = (j as u8, s);
                    for p in 0..DIM {
                        ns.order[p] = slots[p].row;
                        ns.sign[slots[p].row as usize] = slots[p].sign;
                        if p > 0 && slots[p].key != slots[p - 1].key {
                            ns.starts |= 1 << p;
                        }
                    }
                    next.push(ns);
                }
            }
        }
        // normalize: rows within a cell are interchangeable, and a global
        // sign flip of rows and columns changes nothing
        for ns in next.iter_mut() {
            let cells: Vec<(usize, usize)> = ns.cells().collect();
            for (lo, hi) in cells {
                ns.order[lo..hi].sort_unstable();
            }
            if let Some(r) = (0..DIM).find(|&r| ns.sign[r] != 0) {
                if ns.sign[r] < 0 {
                    for s in ns.sign.iter_mut() {
                        *s = -*s;
                    }
                    for c in ns.cols.iter_mut().take(k + 1) {
                        c.1 = -c.1;
                    }
                }
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(next.len());
        next.retain(|ns| seen.insert(ns.key()));
        std::mem::swap(&mut states, &mut next);
    }

    let matrix = So6Matrix::from_entries(out);
    if matrix == *u {
        return CanonicalForm { matrix, left: SignedPerm::IDENTITY, right: SignedPerm::IDENTITY };
    }
    let st = &states[0];
    let mut lperm = [0u8; DIM];
    let mut lsign = [1i8; DIM];
    for p in 0..DIM {
        let r = st.order[p] as usize;
        lperm[r] = p as u8;
        lsign[r] = st.sign[r];
    }
    let left = SignedPerm::new(lperm, lsign);
    let right = SignedPerm::new(st.cols.map(|c| c.0), st.cols.map(|c| c.1));
    CanonicalForm { matrix, left, right }
}

/// `true` iff `U` and `V` lie in the same orbit.
pub fn equivalent(u: &So6Matrix, v: &So6Matrix) -> bool {
    u.signature() == v.signature() && canonicalize(u).matrix == canonicalize(v).matrix
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gens::{apply_gen, GenIndex};
    use crate::matrix::{gate_image, Gate};

    fn sample(seed: u64, depth: usize) -> So6Matrix {
        let mut x = seed;
        let mut m = So6Matrix::identity();
        for _ in 0..depth {
            x = mix(x.wrapping_add(1));
            m = apply_gen(GenIndex::from_id((x % 15) as u8, true).unwrap(), &m).unwrap();
        }
        m.act_left(SignedPerm::from_index((x % 46080) as usize))
    }

    #[test]
    fn entry_key_ignores_sign() {
        for m in [sample(1, 5), sample(2, 7)] {
            for &x in m.entries() {
                assert_eq!(EntryKey::of(x), EntryKey::of(-x));
            }
        }
    }

    #[test]
    fn single_t_images_are_equivalent() {
        let t0 = gate_image(Gate::T0);
        let t1 = gate_image(Gate::T1);
        assert_eq!(signature(&t0), signature(&t1));
        assert_eq!(canonicalize(&t0).matrix, canonicalize(&t1).matrix);
        assert_ne!(signature(&So6Matrix::identity()), signature(&t0));
        assert!(!equivalent(&t0, &So6Matrix::identity()));
        assert!(equivalent(&gate_image(Gate::CZ), &So6Matrix::identity()));
    }

    #[test]
    fn witnesses_and_fixed_points() {
        for seed in 0..40 {
            let u = sample(seed, (seed % 9) as usize);
            let cf = canonicalize(&u);
            assert_eq!(u.act_left(cf.left).act_right(cf.right), cf.matrix);
            let again = canonicalize(&cf.matrix);
            assert_eq!(again.matrix, cf.matrix);
            assert_eq!(again.left, SignedPerm::IDENTITY);
            assert_eq!(again.right, SignedPerm::IDENTITY);
        }
    }

    #[test]
    fn identity_canonical_form_is_a_signed_perm() {
        let cf = canonicalize(&So6Matrix::identity());
        assert!(cf.matrix.to_signed_perm().is_some());
        assert_eq!(cf.matrix.get(0, 0), Dyadic::MINUS_ONE);
    }
}
