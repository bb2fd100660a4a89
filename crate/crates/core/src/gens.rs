//! The T-step generators and their row-operation kernels.
//!
//! `G(i,j)` is the T-gate image conjugated onto coordinates `(i, j)`: it
//! rotates `e_i` by 45° towards `e_j`. The involutive variant
//! `X(i,j) = C_ij · G(i,j)` additionally swaps rows `i` and `j`, which gives
//! the Hadamard-like block `[[1, 1], [1, -1]] / √2`. Left multiplication by
//! either one only touches rows `i` and `j`, so it is applied as a pair of
//! row sums and differences instead of a matrix product.

use std::fmt;

use crate::dyadic::{Dyadic, DyadicError};
use crate::matrix::{idx, So6Matrix};
use crate::perm::{SignedPerm, DIM};

/// Number of unordered coordinate pairs.
pub const PAIR_COUNT: usize = 15;

/// Unordered pairs `(i, j)`, `i < j`, zero-based, in dense-id order.
pub const PAIRS: [(u8, u8); PAIR_COUNT] = [
    (0, 1),
    (0, 2),
    (0, 3),
    (0, 4),
    (0, 5),
    (1, 2),
    (1, 3),
    (1, 4),
    (1, 5),
    (2, 3),
    (2, 4),
    (2, 5),
    (3, 4),
    (3, 5),
    (4, 5),
];

/// Dense id of the unordered pair `{i, j}` (zero-based, `i != j`).
pub fn pair_id(i: usize, j: usize) -> u8 {
    debug_assert!(i != j && i < DIM && j < DIM);
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    // rows before i contribute (5 + 4 + ...) pairs
    let before: usize = (0..i).map(|k| DIM - 1 - k).sum();
    (before + (j - i - 1)) as u8
}

/// A generator: a coordinate pair plus the plain/involutive flag.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenIndex {
    id: u8,
    involutive: bool,
}

impl GenIndex {
    /// Zero-based coordinates, `i < j`.
    pub fn new(i: usize, j: usize, involutive: bool) -> GenIndex {
        assert!(i < j && j < DIM, "generator pair must satisfy i < j < 6");
        GenIndex { id: pair_id(i, j), involutive }
    }

    pub fn plain(i: usize, j: usize) -> GenIndex {
        GenIndex::new(i, j, false)
    }

    pub fn involutive(i: usize, j: usize) -> GenIndex {
        GenIndex::new(i, j, true)
    }

    pub fn from_id(id: u8, involutive: bool) -> Option<GenIndex> {
        ((id as usize) < PAIR_COUNT).then_some(GenIndex { id, involutive })
    }

    /// All 15 involutive generators in id order.
    pub fn all_involutive() -> impl Iterator<Item = GenIndex> {
        (0..PAIR_COUNT as u8).map(|id| GenIndex { id, involutive: true })
    }

    pub fn all_plain() -> impl Iterator<Item = GenIndex> {
        (0..PAIR_COUNT as u8).map(|id| GenIndex { id, involutive: false })
    }

    #[inline]
    pub fn id(self) -> u8 {
        self.id
    }

    #[inline]
    pub fn is_involutive(self) -> bool {
        self.involutive
    }

    /// Zero-based `(i, j)` with `i < j`.
    #[inline]
    pub fn pair(self) -> (usize, usize) {
        let (i, j) = PAIRS[self.id as usize];
        (i as usize, j as usize)
    }
}

impl fmt::Display for GenIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, j) = self.pair();
        let tag = if self.involutive { 'X' } else { 'G' };
        write!(f, "{tag}({},{})", i + 1, j + 1)
    }
}

impl fmt::Debug for GenIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Permutation matrix `Q` with `Q e_0 = e_i` and `Q e_1 = e_j`, so that
/// `Q · T0 · Qᵀ = G(i,j)`. Any completion of the remaining coordinates works.
pub fn conjugator(i: usize, j: usize) -> SignedPerm {
    // Move coordinate 0 to i and coordinate 1 to j, everything else fills in.
    let mut perm = [u8::MAX; DIM];
    perm[0] = i as u8;
    perm[1] = j as u8;
    let mut rest = (0..DIM as u8).filter(|&k| k as usize != i && k as usize != j);
    for slot in perm.iter_mut().skip(2) {
        *slot = rest.next().unwrap();
    }
    SignedPerm::new(perm, [1; DIM])
}

/// The explicit matrix of a generator.
pub fn generator(g: GenIndex) -> So6Matrix {
    let (i, j) = g.pair();
    let h = Dyadic::INV_SQRT2;
    let mut m = So6Matrix::identity();
    let e = m.entries_mut();
    if g.involutive {
        e[idx(i, i)] = h;
        e[idx(i, j)] = h;
        e[idx(j, i)] = h;
        e[idx(j, j)] = -h;
    } else {
        e[idx(i, i)] = h;
        e[idx(i, j)] = -h;
        e[idx(j, i)] = h;
        e[idx(j, j)] = h;
    }
    m
}

/// Moves a signed permutation across an involutive generator:
/// `L · X(i,j) · L⁻¹ = D · X(u)` with `u = {L(i), L(j)}` and `D` a signed
/// permutation supported on the two coordinates of `u`. Returns `(D, X(u))`.
pub fn conjugate_involutive(l: SignedPerm, g: GenIndex) -> (SignedPerm, GenIndex) {
    let (i, j) = g.pair();
    let (p, q) = (l.image(i), l.image(j));
    let u = GenIndex::involutive(p.min(q), p.max(q));
    let m = generator(g).act_left(l).act_right(l.inverse());
    // X(u) is its own inverse
    let d = apply_gen(u, &m.transpose()).expect("2x2 block products stay in range").transpose();
    let d = d.to_signed_perm().expect("conjugated generator differs from X(u) by a signed permutation");
    (d, u)
}

type Kernel = fn(&mut [Dyadic; 36]) -> Result<(), DyadicError>;

/// Rows `(I, J)` ← `((r_I + r_J)/√2, (r_I - r_J)/√2)`.
fn kernel_involutive<const I: usize, const J: usize>(e: &mut [Dyadic; 36]) -> Result<(), DyadicError> {
    for c in 0..DIM {
        let x = e[c * DIM + I];
        let y = e[c * DIM + J];
        e[c * DIM + I] = x.sum_div_sqrt2(y)?;
        e[c * DIM + J] = x.diff_div_sqrt2(y)?;
    }
    Ok(())
}

/// Rows `(I, J)` ← `((r_I - r_J)/√2, (r_I + r_J)/√2)`.
fn kernel_plain<const I: usize, const J: usize>(e: &mut [Dyadic; 36]) -> Result<(), DyadicError> {
    for c in 0..DIM {
        let x = e[c * DIM + I];
        let y = e[c * DIM + J];
        e[c * DIM + I] = x.diff_div_sqrt2(y)?;
        e[c * DIM + J] = x.sum_div_sqrt2(y)?;
    }
    Ok(())
}

macro_rules! kernel_table {
    ($k:ident) => {
        [
            $k::<0, 1>,
            $k::<0, 2>,
            $k::<0, 3>,
            $k::<0, 4>,
            $k::<0, 5>,
            $k::<1, 2>,
            $k::<1, 3>,
            $k::<1, 4>,
            $k::<1, 5>,
            $k::<2, 3>,
            $k::<2, 4>,
            $k::<2, 5>,
            $k::<3, 4>,
            $k::<3, 5>,
            $k::<4, 5>,
        ]
    };
}

static INVOLUTIVE_KERNELS: [Kernel; PAIR_COUNT] = kernel_table!(kernel_involutive);
static PLAIN_KERNELS: [Kernel; PAIR_COUNT] = kernel_table!(kernel_plain);

/// `generator(g) · u`, computed on two rows only.
#[inline]
pub fn apply_gen(g: GenIndex, u: &So6Matrix) -> Result<So6Matrix, DyadicError> {
    let mut out = u.clone();
    apply_gen_in_place(g, &mut out)?;
    Ok(out)
}

#[inline]
pub fn apply_gen_in_place(g: GenIndex, u: &mut So6Matrix) -> Result<(), DyadicError> {
    let table = if g.involutive { &INVOLUTIVE_KERNELS } else { &PLAIN_KERNELS };
    table[g.id as usize](u.entries_mut())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{gate_image, Gate};

    #[test]
    fn pair_ids_are_dense_and_ordered() {
        for (id, &(i, j)) in PAIRS.iter().enumerate() {
            assert_eq!(pair_id(i as usize, j as usize), id as u8);
            assert_eq!(pair_id(j as usize, i as usize), id as u8);
            let g = GenIndex::from_id(id as u8, true).unwrap();
            assert_eq!(g.pair(), (i as usize, j as usize));
        }
        assert!(GenIndex::from_id(15, false).is_none());
    }

    #[test]
    fn conjugated_t_gives_the_printed_g24() {
        // g[2,4] = P(2,4)ᵀ T0 P(2,4) with one-based (2,4)
        let p = So6Matrix::from_perm(conjugator(1, 3));
        let g = p.mul(&gate_image(Gate::T0)).unwrap().mul(&p.transpose()).unwrap();
        assert_eq!(g, generator(GenIndex::plain(1, 3)));
        let h = Dyadic::INV_SQRT2;
        let mut want = So6Matrix::identity();
        let e = want.entries_mut();
        e[idx(1, 1)] = h;
        e[idx(1, 3)] = -h;
        e[idx(3, 1)] = h;
        e[idx(3, 3)] = h;
        assert_eq!(generator(GenIndex::plain(1, 3)), want);
    }

    #[test]
    fn involutive_generators_square_to_identity() {
        for g in GenIndex::all_involutive() {
            let m = generator(g);
            assert_eq!(m.mul(&m).unwrap(), So6Matrix::identity(), "{g}");
            assert_eq!(m.det().unwrap(), -1);
            assert_eq!(generator(GenIndex::from_id(g.id(), false).unwrap()).det().unwrap(), 1);
        }
    }

    #[test]
    fn involutive_is_row_swap_of_plain() {
        for g in GenIndex::all_plain() {
            let (i, j) = g.pair();
            let swapped = generator(g).act_left(SignedPerm::transposition(i, j));
            assert_eq!(swapped, generator(GenIndex::involutive(i, j)));
        }
    }

    #[test]
    fn conjugation_relabels_the_pair() {
        for idx in (0..crate::perm::SIGNED_PERM_COUNT).step_by(331) {
            let l = SignedPerm::from_index(idx);
            for g in GenIndex::all_involutive() {
                let (d, u) = conjugate_involutive(l, g);
                let lhs = generator(g).act_left(l).act_right(l.inverse());
                assert_eq!(lhs, generator(u).act_left(d));
            }
        }
    }

    #[test]
    fn kernels_agree_with_products() {
        let u = gate_image(Gate::T1)
            .mul(&gate_image(Gate::H0))
            .unwrap()
            .mul(&generator(GenIndex::plain(2, 5)))
            .unwrap();
        for g in GenIndex::all_involutive().chain(GenIndex::all_plain()) {
            assert_eq!(apply_gen(g, &u).unwrap(), generator(g).mul(&u).unwrap(), "{g}");
        }
        let x = GenIndex::involutive(0, 1);
        assert_eq!(apply_gen(x, &So6Matrix::identity()).unwrap(), generator(x));
        assert_eq!(apply_gen(x, &apply_gen(x, &u).unwrap()).unwrap(), u);
    }
}
