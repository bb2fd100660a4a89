//! Bidirectional search between two roots.
//!
//! Both sides are [`Lut`]s. Each round extends the side with the smaller
//! frontier; every class newly inserted on that side is probed against the
//! other side's full index, and the first hit stops the round. Since no
//! class is ever shared by the stored parts of the two sides before a hit,
//! the first hit has minimal total depth.
//!
//! An optional probe walks one step past the side about to be extended
//! without storing anything and checks the other side's index. It runs
//! under a wall-clock budget, by default the duration of the previous
//! extension.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::canon::canonicalize;
use crate::error::{Error, Result};
use crate::gens::{apply_gen, GenIndex};
use crate::lut::{Lut, LutOptions, MeetHook};
use crate::matrix::So6Matrix;
use crate::perm::{SignedPerm, DIM, SIGNED_PERM_COUNT};
use crate::word::{evaluate_factors, invert_factors, normalize, Factor, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ProbeBudget {
    #[default]
    Off,
    /// The wall time of the previous extension.
    Auto,
    Fixed(Duration),
}

#[derive(Clone, Copy, Debug)]
pub struct MitmOptions {
    /// Give up once the two sides together reach this depth.
    pub max_depth: usize,
    pub probe: ProbeBudget,
    pub lut: LutOptions,
}

impl Default for MitmOptions {
    fn default() -> Self {
        MitmOptions { max_depth: 24, probe: ProbeBudget::Off, lut: LutOptions::default() }
    }
}

/// `r_R = evaluate(word) · r_L · right`, with `word` of minimal T-count.
#[derive(Clone, Debug)]
pub struct MitmResult {
    pub word: Word,
    pub right: SignedPerm,
    pub tcount: usize,
    pub meet_class: So6Matrix,
    pub left_depth: usize,
    pub right_depth: usize,
    /// The meet came from the storage-free probe.
    pub probed: bool,
    pub elapsed: Duration,
}

impl MitmResult {
    /// For a signed-permutation left root, the single word with
    /// `evaluate_word == r_R`.
    pub fn word_for_perm_root(&self, r_l: SignedPerm) -> Word {
        Word::new(self.word.steps.clone(), self.word.correction.compose(r_l).compose(self.right))
    }
}

/// A class found one step beyond a side's deepest layer.
#[derive(Clone, Debug)]
pub struct ProbeHit {
    /// Position of the parent in the probed side's deepest layer.
    pub idx: usize,
    pub gen: GenIndex,
    /// Depth and position of the class on the other side.
    pub other: (usize, usize),
}

/// Searches one step past `other`'s deepest layer for a class stored in
/// `lut_side`, storing nothing. Gives up when `budget` runs out.
pub fn brute_probe(lut_side: &Lut, other: &Lut, budget: Duration) -> Result<Option<ProbeHit>> {
    if budget.is_zero() {
        return Ok(None);
    }
    let deadline = Instant::now() + budget;
    let expired = AtomicBool::new(false);
    let depth = other.depth();
    other
        .layer(depth)
        .par_iter()
        .enumerate()
        .map(|(idx, node)| {
            if expired.load(Ordering::Relaxed) || Instant::now() >= deadline {
                expired.store(true, Ordering::Relaxed);
                return Ok(None);
            }
            for gen in GenIndex::all_involutive() {
                if node.gen == gen.id() {
                    continue;
                }
                let w = apply_gen(gen, &node.canon).map_err(|e| Error::Overflow { depth: depth + 1, source: e })?;
                let cf = canonicalize(&w);
                if let Some(hit) = lut_side.find(&cf.matrix, cf.matrix.signature()) {
                    return Ok(Some(ProbeHit { idx, gen, other: hit }));
                }
            }
            Ok(None)
        })
        .find_map_any(|r: Result<Option<ProbeHit>>| match r {
            Ok(None) => None,
            other => Some(other),
        })
        .unwrap_or(Ok(None))
}

/// One bidirectional round: extends `to_extend` by a layer, probing each
/// new class against `to_check`. Returns the meeting class on a hit.
pub fn extend_one_step_mitm(to_extend: &mut Lut, to_check: &Lut, opts: &LutOptions) -> Result<Option<So6Matrix>> {
    let hook = MeetHook::new(to_check);
    to_extend.extend_inner(opts, Some(&hook))?;
    let winner = hook.winner.into_inner().unwrap_or_else(|e| e.into_inner());
    Ok(winner)
}

/// Signed permutations with `c1 · a · c0 = b`, read off the canonical-form
/// witnesses of both sides.
pub fn clifford_fixup(a: &So6Matrix, b: &So6Matrix) -> Result<(SignedPerm, SignedPerm)> {
    let fa = canonicalize(a);
    let fb = canonicalize(b);
    if fa.matrix != fb.matrix {
        return Err(Error::Integrity("clifford fixup on inequivalent matrices".into()));
    }
    let c1 = fb.left.inverse().compose(fa.left);
    let c0 = fa.right.compose(fb.right.inverse());
    debug_assert_eq!(a.act_left(c1).act_right(c0), *b);
    Ok((c0, c1))
}

/// Exhaustive version of [`clifford_fixup`]: tries every `c0` and matches
/// rows of `a · c0` against rows of `b` up to sign.
pub fn clifford_fixup_brute(a: &So6Matrix, b: &So6Matrix) -> Result<(SignedPerm, SignedPerm)> {
    let brows: [[u64; DIM]; DIM] = std::array::from_fn(|r| b.row(r).map(|x| x.to_bits()));
    let bneg: [[u64; DIM]; DIM] = std::array::from_fn(|r| b.row(r).map(|x| (-x).to_bits()));
    'outer: for k in 0..SIGNED_PERM_COUNT {
        let c0 = SignedPerm::from_index(k);
        let ac = a.act_right(c0);
        let mut perm = [0u8; DIM];
        let mut signs = [1i8; DIM];
        let mut taken = 0u8;
        for r in 0..DIM {
            let row = ac.row(r).map(|x| x.to_bits());
            let hit = (0..DIM).find_map(|t| {
                if taken & (1 << t) != 0 {
                    None
                } else if row == brows[t] {
                    Some((t, 1))
                } else if row == bneg[t] {
                    Some((t, -1))
                } else {
                    None
                }
            });
            match hit {
                Some((t, s)) => {
                    taken |= 1 << t;
                    perm[r] = t as u8;
                    signs[r] = s;
                }
                None => continue 'outer,
            }
        }
        return Ok((c0, SignedPerm::new(perm, signs)));
    }
    Err(Error::Integrity("no signed permutations relate the two matrices".into()))
}

/// Minimal-T-count word with `r_R = evaluate(word) · r_L · right`.
pub fn mitm(r_l: &So6Matrix, r_r: &So6Matrix, opts: &MitmOptions) -> Result<MitmResult> {
    let mut left = Lut::init(r_l)?;
    let mut right = Lut::init(r_r)?;
    mitm_sides(&mut left, &mut right, opts)
}

/// Bidirectional search from prepared sides, for example a stored table on
/// the left and a fresh single-root side on the right. Sides may be left
/// with a partial last layer.
pub fn mitm_sides(left: &mut Lut, right: &mut Lut, opts: &MitmOptions) -> Result<MitmResult> {
    let start = Instant::now();
    let finish = |mut r: MitmResult| {
        r.elapsed = start.elapsed();
        r
    };
    let rroot = right.layer(0)[0].canon.clone();
    if let Some((a, i)) = left.find(&rroot, rroot.signature()) {
        return assemble(left, right, Side::Stored(a, i), Side::Stored(0, 0), false).map(finish);
    }
    let mut last = Duration::ZERO;
    loop {
        if left.depth() + right.depth() >= opts.max_depth {
            return Err(Error::NotFoundWithinBudget { depth: opts.max_depth });
        }
        let extend_left = left.frontier_len() < right.frontier_len();
        let (ext, chk) = if extend_left { (&mut *left, &*right) } else { (&mut *right, &*left) };
        assert!(ext.frontier_len() <= chk.frontier_len(), "frontier policy violated");

        let budget = match opts.probe {
            ProbeBudget::Off => Duration::ZERO,
            ProbeBudget::Auto => last,
            ProbeBudget::Fixed(d) => d,
        };
        if let Some(hit) = brute_probe(chk, ext, budget)? {
            let probe = Side::Probe(ext.depth(), hit.idx, hit.gen);
            let other = Side::Stored(hit.other.0, hit.other.1);
            let (l, r) = if extend_left { (probe, other) } else { (other, probe) };
            return assemble(left, right, l, r, true).map(finish);
        }

        let t = Instant::now();
        let meet = extend_one_step_mitm(ext, chk, &opts.lut)?;
        last = t.elapsed();
        if let Some(m) = meet {
            let sig = m.signature();
            let at = |lut: &Lut| {
                lut.find(&m, sig).ok_or_else(|| Error::Integrity("meeting class missing from a side".into()))
            };
            let (a, i) = at(left)?;
            let (b, j) = at(right)?;
            return assemble(left, right, Side::Stored(a, i), Side::Stored(b, j), false).map(finish);
        }
    }
}

#[derive(Clone, Copy)]
enum Side {
    Stored(usize, usize),
    /// One generator past a node of the deepest layer.
    Probe(usize, usize, GenIndex),
}

/// Factors `F` and depth with `evaluate(F) · root ~ meet`.
fn side_path(lut: &Lut, side: Side) -> Result<(Vec<Factor>, usize)> {
    match side {
        Side::Stored(d, i) => Ok((lut.reconstruct(d, i)?.factors, d)),
        Side::Probe(d, i, g) => {
            let mut f = vec![Factor::Gen(g)];
            f.extend(lut.reconstruct(d, i)?.factors);
            Ok((f, d + 1))
        }
    }
}

fn assemble(left: &Lut, right: &Lut, ls: Side, rs: Side, probed: bool) -> Result<MitmResult> {
    let (fl, a) = side_path(left, ls)?;
    let (fr, b) = side_path(right, rs)?;
    let ml = evaluate_factors(&fl)?.mul(left.root())?;
    let mr = evaluate_factors(&fr)?.mul(right.root())?;
    let (c0, c1) = clifford_fixup(&ml, &mr)?;
    // r_R = evaluate(F_R)⁻¹ · c1 · evaluate(F_L) · r_L · c0
    let mut factors = invert_factors(&fr);
    factors.push(Factor::Perm(c1));
    factors.extend(fl);
    let word = normalize(&factors);
    let got = word.evaluate()?.mul(left.root())?.act_right(c0);
    if got != *right.root() {
        return Err(Error::Integrity("assembled word does not reach the target".into()));
    }
    Ok(MitmResult {
        tcount: word.tcount(),
        word,
        right: c0,
        meet_class: canonicalize(&ml).matrix,
        left_depth: a,
        right_depth: b,
        probed,
        elapsed: Duration::ZERO,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{gate_image, Gate};
    use crate::word::evaluate_word;

    #[test]
    fn equal_roots_give_the_empty_word() {
        let u = gate_image(Gate::T0).mul(&gate_image(Gate::H1)).unwrap();
        let r = mitm(&u, &u, &MitmOptions::default()).unwrap();
        assert_eq!(r.tcount, 0);
        let cz = mitm(&So6Matrix::identity(), &gate_image(Gate::CZ), &MitmOptions::default()).unwrap();
        assert_eq!(cz.tcount, 0);
        let w = cz.word_for_perm_root(SignedPerm::IDENTITY);
        assert_eq!(evaluate_word(&w).unwrap(), gate_image(Gate::CZ));
    }

    #[test]
    fn single_t_meets_at_depth_one() {
        let id = So6Matrix::identity();
        let t0 = gate_image(Gate::T0);
        let r = mitm(&id, &t0, &MitmOptions::default()).unwrap();
        assert_eq!((r.tcount, r.left_depth + r.right_depth), (1, 1));
        assert_eq!(evaluate_word(&r.word_for_perm_root(SignedPerm::IDENTITY)).unwrap(), t0);
    }

    #[test]
    fn fixups_agree() {
        let u = gate_image(Gate::T0).mul(&gate_image(Gate::H0)).unwrap().mul(&gate_image(Gate::T1)).unwrap();
        let p1 = SignedPerm::from_index(9876);
        let p2 = SignedPerm::from_index(43210);
        let v = u.act_left(p1).act_right(p2);
        for (c0, c1) in [clifford_fixup(&u, &v).unwrap(), clifford_fixup_brute(&u, &v).unwrap()] {
            assert_eq!(u.act_left(c1).act_right(c0), v);
        }
        assert!(clifford_fixup(&u, &So6Matrix::identity()).is_err());
    }

    #[test]
    fn depth_cap_is_reported() {
        let t = gate_image(Gate::T0).mul(&gate_image(Gate::H0)).unwrap().mul(&gate_image(Gate::T0)).unwrap();
        let opts = MitmOptions { max_depth: 1, ..Default::default() };
        assert!(matches!(mitm(&So6Matrix::identity(), &t, &opts), Err(Error::NotFoundWithinBudget { .. })));
    }
}
