//! Canonical forms and class counts by exhaustion.

use std::collections::HashMap;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::gens::{generator, GenIndex};
use crate::matrix::So6Matrix;
use crate::perm::{SignedPerm, DIM};

/// Which signed permutations act on each side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// All 46080 signed permutations.
    SignedPerms,
    /// Only those of determinant `+1`.
    DetOne,
}

type Key = (u32, i64, i64);
type Line = [Key; DIM];

fn key(x: Dyadic) -> Key {
    x.order_key()
}

/// The line or its negation, whichever is smaller entrywise by key.
/// Returns the normalized keys and `-1` if the line was negated.
fn normalize_line(line: [Dyadic; DIM]) -> (Line, i8) {
    let pos = line.map(key);
    let neg = line.map(|x| key(-x));
    if neg < pos {
        (neg, -1)
    } else {
        (pos, 1)
    }
}

/// Sign of the permutation that sorts `lines`, times the product of the
/// normalization signs: the determinant of the applied signed permutation.
fn sort_lines(lines: &mut [(Line, i8); DIM]) -> i8 {
    let mut order: [usize; DIM] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| lines[i].0.cmp(&lines[j].0));
    let mut inversions = 0;
    for i in 0..DIM {
        for j in i + 1..DIM {
            if order[i] > order[j] {
                inversions += 1;
            }
        }
    }
    let mut det: i8 = if inversions % 2 == 0 { 1 } else { -1 };
    let sorted: [(Line, i8); DIM] = std::array::from_fn(|p| lines[order[p]]);
    for l in &sorted {
        det *= l.1;
    }
    *lines = sorted;
    det
}

/// Minimum over right actions of `v`, as sorted column keys.
fn right_min(v: &So6Matrix, variant: Variant) -> [Line; DIM] {
    let mut cols: [(Line, i8); DIM] = std::array::from_fn(|c| normalize_line(v.col(c)));
    let det = sort_lines(&mut cols);
    if variant == Variant::DetOne && det < 0 {
        // flip the last column: every other fix changes an earlier column
        let last = &mut cols[DIM - 1].0;
        for k in last.iter_mut() {
            *k = (k.0, -k.1, -k.2);
        }
    }
    cols.map(|c| c.0)
}

fn from_keys(cols: &[Line; DIM]) -> So6Matrix {
    let mut rows = [[Dyadic::ZERO; DIM]; DIM];
    for (c, col) in cols.iter().enumerate() {
        for (r, &(e, a, b)) in col.iter().enumerate() {
            rows[r][c] = Dyadic::from_reduced_parts(a, b, e as i64).expect("keys come from valid entries");
        }
    }
    So6Matrix::from_rows(rows)
}

/// Applies `L` to the rows of `u` with plain index arithmetic.
fn permute_rows(u: &So6Matrix, l: SignedPerm) -> So6Matrix {
    let mut rows = [[Dyadic::ZERO; DIM]; DIM];
    for r in 0..DIM {
        let row = u.row(r);
        rows[l.image(r)] = if l.sign(r) < 0 { row.map(|x| -x) } else { row };
    }
    So6Matrix::from_rows(rows)
}

/// Right-action minimum of a row-permuted matrix, on packed keys. `pos` and
/// `neg` hold the keys of each entry and of its negation, row-major.
fn right_min_packed(pos: &[[u64; DIM]; DIM], neg: &[[u64; DIM]; DIM], l: SignedPerm, variant: Variant) -> [[u64; DIM]; DIM] {
    let mut cols = [[0u64; DIM]; DIM];
    let mut ncols = [[0u64; DIM]; DIM];
    for r in 0..DIM {
        let (t, flip) = (l.image(r), l.sign(r) < 0);
        let (p, n) = if flip { (&neg[r], &pos[r]) } else { (&pos[r], &neg[r]) };
        for c in 0..DIM {
            cols[c][t] = p[c];
            ncols[c][t] = n[c];
        }
    }
    let mut det = 1i8;
    for c in 0..DIM {
        if ncols[c] < cols[c] {
            std::mem::swap(&mut cols[c], &mut ncols[c]);
            det = -det;
        }
    }
    if variant == Variant::DetOne {
        let mut order: [usize; DIM] = std::array::from_fn(|i| i);
        order.sort_by(|&i, &j| cols[i].cmp(&cols[j]));
        for i in 0..DIM {
            for j in i + 1..DIM {
                if order[i] > order[j] {
                    det = -det;
                }
            }
        }
        let mut out: [[u64; DIM]; DIM] = std::array::from_fn(|p| cols[order[p]]);
        if det < 0 {
            out[DIM - 1] = ncols[order[DIM - 1]];
        }
        out
    } else {
        cols.sort_unstable();
        cols
    }
}

/// Orbit minimum by trying every left action.
pub fn naive_canon(u: &So6Matrix, variant: Variant) -> So6Matrix {
    let pos: [[u64; DIM]; DIM] = std::array::from_fn(|r| u.row(r).map(|x| x.sort_key()));
    let neg: [[u64; DIM]; DIM] = std::array::from_fn(|r| u.row(r).map(|x| (-x).sort_key()));
    let mut best: Option<([[u64; DIM]; DIM], SignedPerm)> = None;
    for l in SignedPerm::all() {
        if variant == Variant::DetOne && l.det() != 1 {
            continue;
        }
        let cand = right_min_packed(&pos, &neg, l, variant);
        if best.as_ref().is_none_or(|b| cand < b.0) {
            best = Some((cand, l));
        }
    }
    let (_, l) = best.expect("at least one action");
    from_keys(&right_min(&permute_rows(u, l), variant))
}

pub fn naive_equivalent(u: &So6Matrix, v: &So6Matrix, variant: Variant) -> bool {
    naive_canon(u, variant) == naive_canon(v, variant)
}

type Profile = [[u64; DIM]; DIM];

/// Each row's entries up to sign, sorted within the row. Rows keep their
/// positions; sorting the rows as well gives a class invariant.
fn row_profile(u: &So6Matrix) -> Profile {
    std::array::from_fn(|r| {
        let mut row = u.row(r).map(|x| x.sort_key().min((-x).sort_key()));
        row.sort_unstable();
        row
    })
}

fn packed_keys(u: &So6Matrix) -> ([[u64; DIM]; DIM], [[u64; DIM]; DIM]) {
    (
        std::array::from_fn(|r| u.row(r).map(|x| x.sort_key())),
        std::array::from_fn(|r| u.row(r).map(|x| (-x).sort_key())),
    )
}

/// A matrix already canonicalized by [`naive_canon`].
struct Rep {
    cols: [[u64; DIM]; DIM],
    profile: Profile,
}

type Ctx<'a> = (&'a [[u64; DIM]; DIM], &'a [[u64; DIM]; DIM], &'a Profile, &'a Rep, Variant);

/// Whether `L u R = rep` for some admissible `L`, `R`. Only row
/// permutations that match row profiles are tried; for each of them every
/// sign choice is.
fn matches(u: &So6Matrix, profile: &Profile, rep: &Rep, variant: Variant) -> bool {
    let (pos, neg) = packed_keys(u);
    let mut perm = [0u8; DIM];
    let mut used = [false; DIM];
    fn search(
        r: usize,
        perm: &mut [u8; DIM],
        used: &mut [bool; DIM],
        ctx: &Ctx<'_>,
    ) -> bool {
        let (pos, neg, profile, rep, variant) = *ctx;
        if r == DIM {
            for mask in 0..64u8 {
                let signs: [i8; DIM] = std::array::from_fn(|i| if mask >> i & 1 == 1 { -1 } else { 1 });
                let l = SignedPerm::new(*perm, signs);
                if variant == Variant::DetOne && l.det() != 1 {
                    continue;
                }
                if right_min_packed(pos, neg, l, variant) == rep.cols {
                    return true;
                }
            }
            return false;
        }
        for t in 0..DIM {
            if !used[t] && profile[r] == rep.profile[t] {
                used[t] = true;
                perm[r] = t as u8;
                if search(r + 1, perm, used, ctx) {
                    return true;
                }
                used[t] = false;
            }
        }
        false
    }
    search(0, &mut perm, &mut used, &(&pos, &neg, profile, rep, variant))
}

/// Classes by exact distance from `root`, from every word of up to `k`
/// involutive generators (`k ≤ 4`). Entry `d` lists the orbit minima at
/// distance `d`, sorted.
///
/// Word matrices are bucketed by their sorted row profiles, a class
/// invariant. Inside a bucket each matrix is compared against the classes
/// found so far by a search over left actions; a matrix matching none of
/// them starts a new class through [`naive_canon`].
pub fn naive_bfs(root: &So6Matrix, k: usize, variant: Variant) -> Result<Vec<Vec<So6Matrix>>> {
    if k > 4 {
        return Err(Error::Resource(format!("exhaustive enumeration is limited to 4 steps, asked for {k}")));
    }
    let gens: Vec<(GenIndex, So6Matrix)> = GenIndex::all_involutive().map(|g| (g, generator(g))).collect();
    let mut dist: HashMap<So6Matrix, usize> = HashMap::new();
    let mut frontier: Vec<(So6Matrix, Option<GenIndex>)> = vec![(root.clone(), None)];
    dist.insert(root.clone(), 0);
    for len in 1..=k {
        let mut next = Vec::new();
        for (m, last) in &frontier {
            for (g, gm) in &gens {
                if Some(*g) == *last {
                    continue;
                }
                let w = gm.mul(m)?;
                if !dist.contains_key(&w) {
                    dist.insert(w.clone(), len);
                    next.push((w, Some(*g)));
                }
            }
        }
        frontier = next;
    }

    let mut mats: Vec<(So6Matrix, usize)> = dist.into_iter().collect();
    // shallow first, so each class is seeded by a closest member
    mats.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp_keys(&b.0)));
    let mut buckets: HashMap<Profile, Vec<(Rep, So6Matrix, usize)>> = HashMap::new();
    for (m, d) in mats {
        let profile = row_profile(&m);
        let mut key = profile;
        key.sort_unstable();
        let bucket = buckets.entry(key).or_default();
        if bucket.iter().any(|(rep, _, _)| matches(&m, &profile, rep, variant)) {
            continue;
        }
        let canon = naive_canon(&m, variant);
        let (pos, _) = packed_keys(&canon);
        let cols = std::array::from_fn(|c| std::array::from_fn(|r| pos[r][c]));
        bucket.push((Rep { cols, profile: row_profile(&canon) }, canon, d));
    }
    let mut out = vec![Vec::new(); k + 1];
    for (_, canon, d) in buckets.into_values().flatten() {
        out[d].push(canon);
    }
    for layer in out.iter_mut() {
        layer.sort_by(|a, b| a.cmp_keys(b));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{gate_image, Gate};

    #[test]
    fn single_t_images_are_equivalent() {
        for v in [Variant::SignedPerms, Variant::DetOne] {
            assert!(naive_equivalent(&gate_image(Gate::T0), &gate_image(Gate::T1), v));
            assert!(!naive_equivalent(&gate_image(Gate::T0), &So6Matrix::identity(), v));
        }
    }

    #[test]
    fn orbit_invariance() {
        let u = gate_image(Gate::T0).mul(&gate_image(Gate::H1)).unwrap().mul(&gate_image(Gate::T1)).unwrap();
        let c = naive_canon(&u, Variant::SignedPerms);
        for (i, j) in [(3usize, 40000usize), (777, 12), (45000, 23456)] {
            let v = u.act_left(SignedPerm::from_index(i)).act_right(SignedPerm::from_index(j));
            assert_eq!(naive_canon(&v, Variant::SignedPerms), c);
        }
        let p = SignedPerm::all().find(|p| p.det() == 1 && p.index() > 30000).unwrap();
        let q = SignedPerm::all().find(|p| p.det() == 1 && p.index() > 1000).unwrap();
        let v = u.act_left(p).act_right(q);
        assert_eq!(naive_canon(&v, Variant::DetOne), naive_canon(&u, Variant::DetOne));
    }

    #[test]
    fn rejects_deep_enumeration() {
        assert!(naive_bfs(&So6Matrix::identity(), 5, Variant::SignedPerms).is_err());
    }
}
