//! Synthesis output: a product of generators followed by a Clifford
//! correction, `U = g_1 · g_2 ⋯ g_k · P`.

use crate::dyadic::DyadicError;
use crate::gens::{apply_gen_in_place, GenIndex};
use crate::matrix::So6Matrix;
use crate::perm::{SignedPerm, DIM};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    /// Leftmost generator is applied last.
    pub steps: Vec<GenIndex>,
    pub correction: SignedPerm,
}

impl Word {
    pub fn new(steps: Vec<GenIndex>, correction: SignedPerm) -> Word {
        Word { steps, correction }
    }

    pub fn tcount(&self) -> usize {
        self.steps.len()
    }

    pub fn evaluate(&self) -> Result<So6Matrix, DyadicError> {
        evaluate_word(self)
    }
}

/// `g_1 ⋯ g_k · P`: starts from `P` and applies generators right to left.
pub fn evaluate_word(w: &Word) -> Result<So6Matrix, DyadicError> {
    let mut m = So6Matrix::from_perm(w.correction);
    for &g in w.steps.iter().rev() {
        apply_gen_in_place(g, &mut m)?;
    }
    Ok(m)
}

/// One factor of a product being rewritten into [`Word`] form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Perm(SignedPerm),
    /// 45° rotation taking `e_from` towards `e_to` (zero-based, any order).
    /// `Rot { from: i, to: j }` with `i < j` is `G(i,j)`.
    Rot { from: u8, to: u8 },
    Gen(GenIndex),
}

impl Factor {
    /// Factor of the inverse product, to be used in reversed order.
    pub fn inverse(self) -> Factor {
        match self {
            Factor::Perm(p) => Factor::Perm(p.inverse()),
            Factor::Rot { from, to } => Factor::Rot { from: to, to: from },
            Factor::Gen(g) if g.is_involutive() => Factor::Gen(g),
            Factor::Gen(g) => {
                let (i, j) = g.pair();
                Factor::Rot { from: j as u8, to: i as u8 }
            }
        }
    }

    /// T-cost of the factor: 1 for any rotation or generator.
    pub fn tcount(self) -> usize {
        match self {
            Factor::Perm(_) => 0,
            _ => 1,
        }
    }
}

/// Inverse of a factor product, as a factor product.
pub fn invert_factors(fs: &[Factor]) -> Vec<Factor> {
    fs.iter().rev().map(|f| f.inverse()).collect()
}

/// `G(i,j)^2` as a signed permutation: `e_i → e_j`, `e_j → -e_i`.
fn quarter_turn(i: usize, j: usize) -> SignedPerm {
    let mut perm: [u8; DIM] = std::array::from_fn(|k| k as u8);
    let mut signs = [1i8; DIM];
    perm[i] = j as u8;
    perm[j] = i as u8;
    signs[j] = -1;
    SignedPerm::new(perm, signs)
}

/// Rewrites a product of factors exactly as plain generators `G(i,j)`,
/// `i < j`, followed by one signed permutation.
///
/// Signed permutations commute past rotations by relabelling the rotation
/// plane: `Q · G(p,q) = G(σp, σq) · Q` when the two signs agree and
/// `G(σq, σp) · Q` otherwise. A rotation with `from > to` is
/// `G(to, from) · G(to, from)^{-2}`, and the quarter turn is a signed
/// permutation that joins the pending correction. An involutive generator is
/// `X(i,j) = C_ij · G(i,j)`.
pub fn normalize(factors: &[Factor]) -> Word {
    let mut steps = Vec::with_capacity(factors.len());
    let mut pending = SignedPerm::IDENTITY;
    for &f in factors {
        match f {
            Factor::Perm(p) => pending = pending.compose(p),
            Factor::Gen(g) if g.is_involutive() => {
                let (i, j) = g.pair();
                pending = pending.compose(SignedPerm::transposition(i, j));
                push_rotation(&mut steps, &mut pending, i, j);
            }
            Factor::Gen(g) => {
                let (i, j) = g.pair();
                push_rotation(&mut steps, &mut pending, i, j);
            }
            Factor::Rot { from, to } => push_rotation(&mut steps, &mut pending, from as usize, to as usize),
        }
    }
    Word { steps, correction: pending }
}

fn push_rotation(steps: &mut Vec<GenIndex>, pending: &mut SignedPerm, from: usize, to: usize) {
    let (p, q) = (pending.image(from), pending.image(to));
    let (a, b) = if pending.sign(from) == pending.sign(to) { (p, q) } else { (q, p) };
    if a < b {
        steps.push(GenIndex::plain(a, b));
    } else {
        // G(a,b) = G(b,a) · G(b,a)^{-2} for a > b
        steps.push(GenIndex::plain(b, a));
        *pending = quarter_turn(b, a).inverse().compose(*pending);
    }
}

/// Evaluates a factor product directly with matrix arithmetic. Slow; used
/// to check [`normalize`] and reconstruction.
pub fn evaluate_factors(factors: &[Factor]) -> Result<So6Matrix, DyadicError> {
    let mut m = So6Matrix::identity();
    for &f in factors.iter().rev() {
        m = match f {
            Factor::Perm(p) => m.act_left(p),
            Factor::Gen(g) => {
                apply_gen_in_place(g, &mut m)?;
                m
            }
            Factor::Rot { from, to } => {
                let (from, to) = (from as usize, to as usize);
                if from < to {
                    apply_gen_in_place(GenIndex::plain(from, to), &mut m)?;
                } else {
                    // G(from,to) with from > to is the inverse rotation
                    apply_gen_in_place(GenIndex::plain(to, from), &mut m)?;
                    m = m.act_left(quarter_turn(to, from).inverse());
                }
                m
            }
        };
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gens::generator;
    use crate::matrix::{gate_image, Gate};

    fn g(i: usize, j: usize) -> GenIndex {
        GenIndex::plain(i - 1, j - 1)
    }

    fn word(steps: &[GenIndex]) -> So6Matrix {
        evaluate_word(&Word::new(steps.to_vec(), SignedPerm::IDENTITY)).unwrap()
    }

    #[test]
    fn lemma_identities() {
        assert_eq!(word(&[g(1, 2)]), gate_image(Gate::T0));
        assert_eq!(word(&[g(4, 5)]), gate_image(Gate::T1));
        assert_eq!(word(&[g(1, 2), g(1, 2)]), gate_image(Gate::S0));
        assert_eq!(word(&[g(4, 5), g(4, 5)]), gate_image(Gate::S1));
        let h0 = [g(1, 3), g(1, 3), g(2, 3), g(2, 3), g(2, 3), g(2, 3)];
        assert_eq!(word(&h0), gate_image(Gate::H0));
        let h1 = [g(4, 6), g(4, 6), g(5, 6), g(5, 6), g(5, 6), g(5, 6)];
        assert_eq!(word(&h1), gate_image(Gate::H1));
        // the three factors are quarter turns; without the squares the
        // product is not even a signed permutation
        let cz = [g(1, 2), g(1, 2), g(3, 6), g(3, 6), g(4, 5), g(4, 5)];
        assert_eq!(word(&cz), gate_image(Gate::CZ));
        assert!(word(&[g(1, 2), g(3, 6), g(4, 5)]).to_signed_perm().is_none());
    }

    #[test]
    fn empty_word_is_its_correction() {
        let p = SignedPerm::from_index(31337);
        assert_eq!(evaluate_word(&Word::new(vec![], p)).unwrap(), So6Matrix::from_perm(p));
    }

    #[test]
    fn quarter_turn_is_g_squared() {
        for gi in GenIndex::all_plain() {
            let (i, j) = gi.pair();
            let m = generator(gi);
            assert_eq!(So6Matrix::from_perm(quarter_turn(i, j)), m.mul(&m).unwrap());
        }
    }

    #[test]
    fn normalize_is_exact() {
        let fs = [
            Factor::Perm(SignedPerm::from_index(1234)),
            Factor::Gen(GenIndex::involutive(0, 3)),
            Factor::Rot { from: 5, to: 2 },
            Factor::Perm(SignedPerm::from_index(40000)),
            Factor::Gen(GenIndex::plain(1, 4)),
            Factor::Gen(GenIndex::involutive(2, 4)),
            Factor::Perm(SignedPerm::from_index(777)),
        ];
        let w = normalize(&fs);
        assert_eq!(w.tcount(), 4);
        assert!(w.steps.iter().all(|s| !s.is_involutive()));
        assert_eq!(evaluate_word(&w).unwrap(), evaluate_factors(&fs).unwrap());
        let inv = invert_factors(&fs);
        let prod = evaluate_factors(&fs).unwrap().mul(&evaluate_factors(&inv).unwrap()).unwrap();
        assert_eq!(prod, So6Matrix::identity());
    }
}
