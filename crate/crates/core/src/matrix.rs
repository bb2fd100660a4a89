//! Exact 6×6 matrices over Z[1/√2].

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

use crate::canon::{self, Signature};
use crate::dyadic::{Dyadic, DyadicError};
use crate::error::{Error, Result};
use crate::perm::{SignedPerm, DIM};

/// Entry count of a 6×6 matrix.
pub const LEN: usize = DIM * DIM;

/// Flat column-major entry index.
#[inline(always)]
pub const fn idx(row: usize, col: usize) -> usize {
    col * DIM + row
}

/// A 6×6 matrix with exact entries in column-major order.
///
/// Most constructors do not check orthogonality; [`So6Matrix::validate`]
/// does. The signature cache is ignored by equality, ordering and hashing.
#[derive(Clone)]
pub struct So6Matrix {
    entries: [Dyadic; LEN],
    sig: OnceLock<Signature>,
}

impl So6Matrix {
    pub fn identity() -> So6Matrix {
        So6Matrix::from_perm(SignedPerm::IDENTITY)
    }

    pub fn from_entries(entries: [Dyadic; LEN]) -> So6Matrix {
        So6Matrix { entries, sig: OnceLock::new() }
    }

    /// Builds a matrix from rows, which is how matrices are usually written.
    pub fn from_rows(rows: [[Dyadic; DIM]; DIM]) -> So6Matrix {
        let mut e = [Dyadic::ZERO; LEN];
        for (r, row) in rows.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                e[idx(r, c)] = x;
            }
        }
        So6Matrix::from_entries(e)
    }

    pub fn from_perm(p: SignedPerm) -> So6Matrix {
        let mut e = [Dyadic::ZERO; LEN];
        for c in 0..DIM {
            e[idx(p.image(c), c)] = if p.sign(c) > 0 { Dyadic::ONE } else { Dyadic::MINUS_ONE };
        }
        So6Matrix::from_entries(e)
    }

    #[inline]
    pub fn entries(&self) -> &[Dyadic; LEN] {
        &self.entries
    }

    /// Mutable access; drops the cached signature.
    #[inline]
    pub fn entries_mut(&mut self) -> &mut [Dyadic; LEN] {
        self.sig = OnceLock::new();
        &mut self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Dyadic {
        self.entries[idx(row, col)]
    }

    pub fn row(&self, r: usize) -> [Dyadic; DIM] {
        std::array::from_fn(|c| self.get(r, c))
    }

    pub fn col(&self, c: usize) -> [Dyadic; DIM] {
        std::array::from_fn(|r| self.get(r, c))
    }

    /// Lazily computed class signature.
    pub fn signature(&self) -> Signature {
        *self.sig.get_or_init(|| canon::signature(self))
    }

    /// Largest denominator exponent over all entries.
    pub fn max_exp(&self) -> u32 {
        self.entries.iter().map(|d| d.exp()).max().unwrap_or(0)
    }

    pub fn transpose(&self) -> So6Matrix {
        let mut e = [Dyadic::ZERO; LEN];
        for r in 0..DIM {
            for c in 0..DIM {
                e[idx(c, r)] = self.get(r, c);
            }
        }
        So6Matrix::from_entries(e)
    }

    pub fn mul(&self, rhs: &So6Matrix) -> Result<So6Matrix> {
        let mut e = [Dyadic::ZERO; LEN];
        for r in 0..DIM {
            for c in 0..DIM {
                let mut acc = Dyadic::ZERO;
                for k in 0..DIM {
                    let (x, y) = (self.get(r, k), rhs.get(k, c));
                    if !x.is_zero() && !y.is_zero() {
                        acc = acc.checked_add(x.checked_mul(y)?)?;
                    }
                }
                e[idx(r, c)] = acc;
            }
        }
        Ok(So6Matrix::from_entries(e))
    }

    /// `P · self`: row `i` moves to row `perm(i)` and picks up `sign_i`.
    pub fn act_left(&self, p: SignedPerm) -> So6Matrix {
        let mut e = [Dyadic::ZERO; LEN];
        for r in 0..DIM {
            let to = p.image(r);
            let neg = p.sign(r) < 0;
            for c in 0..DIM {
                let x = self.get(r, c);
                e[idx(to, c)] = if neg { -x } else { x };
            }
        }
        So6Matrix::from_entries(e)
    }

    /// `self · P`: column `i` of the result is `sign_i` times column `perm(i)`.
    pub fn act_right(&self, p: SignedPerm) -> So6Matrix {
        let mut e = [Dyadic::ZERO; LEN];
        for c in 0..DIM {
            let from = p.image(c);
            let neg = p.sign(c) < 0;
            for r in 0..DIM {
                let x = self.get(r, from);
                e[idx(r, c)] = if neg { -x } else { x };
            }
        }
        So6Matrix::from_entries(e)
    }

    pub fn neg(&self) -> So6Matrix {
        So6Matrix::from_entries(self.entries.map(|x| -x))
    }

    /// `U · Uᵀ == I`, exactly.
    pub fn is_orthogonal(&self) -> bool {
        self.orthogonality_defect().is_none()
    }

    /// First `(i, j)` where `<row_i, row_j> != δ_ij`, if any.
    fn orthogonality_defect(&self) -> Option<(usize, usize)> {
        for i in 0..DIM {
            for j in i..DIM {
                let mut acc = Dyadic::ZERO;
                for k in 0..DIM {
                    let t = match self.get(i, k).checked_mul(self.get(j, k)) {
                        Ok(t) => t,
                        Err(_) => return Some((i, j)),
                    };
                    acc = match acc.checked_add(t) {
                        Ok(a) => a,
                        Err(_) => return Some((i, j)),
                    };
                }
                let want = if i == j { Dyadic::ONE } else { Dyadic::ZERO };
                if acc != want {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Exact determinant by cofactor expansion over Z[√2].
    ///
    /// All entries are first scaled to a common denominator so the expansion
    /// runs over integer pairs. Only `±1` is a legal answer for the matrices
    /// this crate handles; anything else comes back as an error.
    pub fn det(&self) -> Result<i8> {
        let c = self.max_exp();
        let mut m = [[(0i128, 0i128); DIM]; DIM];
        for r in 0..DIM {
            for col in 0..DIM {
                let x = self.get(r, col);
                let (mut a, mut b) = (x.a() as i128, x.b() as i128);
                let gap = c - x.exp();
                if gap % 2 == 1 {
                    (a, b) = (2 * b, a);
                }
                let shift = gap / 2;
                if shift > 60 {
                    return Err(Error::Dyadic(DyadicError::CoefficientOverflow));
                }
                m[r][col] = (a << shift, b << shift);
            }
        }
        let (a, b) = leibniz(&m).ok_or(Error::Dyadic(DyadicError::CoefficientOverflow))?;
        // det(scaled) = det · √2^(6c) = det · 2^(3c)
        let scale = 3 * c;
        if b != 0 || scale > 120 {
            return Err(Error::Integrity(format!("determinant is not ±1 (√2 part {b})")));
        }
        let unit = 1i128 << scale;
        match a {
            x if x == unit => Ok(1),
            x if x == -unit => Ok(-1),
            _ => Err(Error::Integrity("determinant is not ±1".into())),
        }
    }

    /// Checks every structural invariant: reduced entries (by construction),
    /// the per-entry bound for the matrix and its twist, exact orthogonality,
    /// and `det ∈ {±1}`.
    pub fn validate(&self) -> Result<i8> {
        for c in 0..DIM {
            for r in 0..DIM {
                let x = self.get(r, c);
                if !x.is_bounded_by_one() {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({}, {}) = {} has |x| > 1 or |x•| > 1",
                        r + 1,
                        c + 1,
                        x
                    )));
                }
            }
        }
        if let Some((i, j)) = self.orthogonality_defect() {
            return Err(Error::InvalidMatrix(format!(
                "not orthogonal: rows {} and {} have the wrong inner product",
                i + 1,
                j + 1
            )));
        }
        self.det().map_err(|e| Error::InvalidMatrix(e.to_string()))
    }

    /// Galois conjugate of every entry.
    pub fn twist(&self) -> So6Matrix {
        So6Matrix::from_entries(self.entries.map(Dyadic::twist))
    }

    /// Returns the signed permutation this matrix equals, if it is one.
    pub fn to_signed_perm(&self) -> Option<SignedPerm> {
        let mut perm = [0u8; DIM];
        let mut signs = [1i8; DIM];
        for c in 0..DIM {
            let mut hit = None;
            for r in 0..DIM {
                let x = self.get(r, c);
                if x == Dyadic::ONE || x == Dyadic::MINUS_ONE {
                    if hit.is_some() {
                        return None;
                    }
                    hit = Some((r, if x == Dyadic::ONE { 1 } else { -1 }));
                } else if !x.is_zero() {
                    return None;
                }
            }
            let (r, s) = hit?;
            perm[c] = r as u8;
            signs[c] = s;
        }
        SignedPerm::try_new(perm, signs)
    }

    /// Lexicographic comparison of the column-major packed words; the order
    /// in which layers are written to disk.
    pub fn cmp_words(&self, other: &So6Matrix) -> std::cmp::Ordering {
        self.entries.iter().map(|d| d.to_bits()).cmp(other.entries.iter().map(|d| d.to_bits()))
    }

    /// Lexicographic comparison under [`Dyadic::order_key`], column-major.
    pub fn cmp_keys(&self, other: &So6Matrix) -> std::cmp::Ordering {
        self.entries.iter().cmp(other.entries.iter())
    }
}

fn leibniz(m: &[[(i128, i128); DIM]; DIM]) -> Option<(i128, i128)> {
    // Cofactor expansion along the first row, recursing on column subsets.
    fn minor(m: &[[(i128, i128); DIM]; DIM], row: usize, cols: u8) -> Option<(i128, i128)> {
        if row == DIM {
            return Some((1, 0));
        }
        let mut acc = (0i128, 0i128);
        let mut sign = 1i128;
        for c in 0..DIM {
            if cols & (1 << c) == 0 {
                continue;
            }
            let (x, y) = m[row][c];
            if x != 0 || y != 0 {
                let (p, q) = minor(m, row + 1, cols & !(1 << c))?;
                // (x + y√2)(p + q√2)
                let re = x.checked_mul(p)?.checked_add(y.checked_mul(q)?.checked_mul(2)?)?;
                let im = x.checked_mul(q)?.checked_add(y.checked_mul(p)?)?;
                acc.0 = acc.0.checked_add(sign * re)?;
                acc.1 = acc.1.checked_add(sign * im)?;
            }
            sign = -sign;
        }
        Some(acc)
    }
    minor(m, 0, (1 << DIM) - 1)
}

impl Default for So6Matrix {
    fn default() -> Self {
        So6Matrix::identity()
    }
}

impl PartialEq for So6Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for So6Matrix {}

impl Hash for So6Matrix {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.entries.hash(state);
    }
}

impl fmt::Debug for So6Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "So6Matrix [")?;
        for r in 0..DIM {
            let row: Vec<String> = self.row(r).iter().map(|x| format!("{x:>9}")).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Named single-gate images in SO(6). Qubit-0 forms are the `⊗ I` ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    H0,
    H1,
    S0,
    S1,
    T0,
    T1,
    CZ,
}

impl Gate {
    pub const ALL: [Gate; 7] = [Gate::H0, Gate::H1, Gate::S0, Gate::S1, Gate::T0, Gate::T1, Gate::CZ];
}

/// The SO(6) image of a named gate, entry for entry.
pub fn gate_image(g: Gate) -> So6Matrix {
    let z = Dyadic::ZERO;
    let o = Dyadic::ONE;
    let m = Dyadic::MINUS_ONE;
    let h = Dyadic::INV_SQRT2;
    let nh = -Dyadic::INV_SQRT2;
    let rows = match g {
        Gate::H0 => [
            [z, z, o, z, z, z],
            [z, m, z, z, z, z],
            [o, z, z, z, z, z],
            [z, z, z, o, z, z],
            [z, z, z, z, o, z],
            [z, z, z, z, z, o],
        ],
        Gate::S0 => [
            [z, m, z, z, z, z],
            [o, z, z, z, z, z],
            [z, z, o, z, z, z],
            [z, z, z, o, z, z],
            [z, z, z, z, o, z],
            [z, z, z, z, z, o],
        ],
        Gate::T0 => [
            [h, nh, z, z, z, z],
            [h, h, z, z, z, z],
            [z, z, o, z, z, z],
            [z, z, z, o, z, z],
            [z, z, z, z, o, z],
            [z, z, z, z, z, o],
        ],
        Gate::H1 => [
            [o, z, z, z, z, z],
            [z, o, z, z, z, z],
            [z, z, o, z, z, z],
            [z, z, z, z, z, o],
            [z, z, z, z, m, z],
            [z, z, z, o, z, z],
        ],
        Gate::S1 => [
            [o, z, z, z, z, z],
            [z, o, z, z, z, z],
            [z, z, o, z, z, z],
            [z, z, z, z, m, z],
            [z, z, z, o, z, z],
            [z, z, z, z, z, o],
        ],
        Gate::T1 => [
            [o, z, z, z, z, z],
            [z, o, z, z, z, z],
            [z, z, o, z, z, z],
            [z, z, z, h, nh, z],
            [z, z, z, h, h, z],
            [z, z, z, z, z, o],
        ],
        Gate::CZ => [
            [z, m, z, z, z, z],
            [o, z, z, z, z, z],
            [z, z, z, z, z, m],
            [z, z, z, z, m, z],
            [z, z, z, o, z, z],
            [z, z, o, z, z, z],
        ],
    };
    So6Matrix::from_rows(rows)
}
