//! Exact T-count optimal synthesis for two-qubit Clifford+T operators,
//! working on their 6×6 orthogonal images over Z[1/√2].
//!
//! The pieces, bottom up: packed [`dyadic`] scalars, [`matrix`] and
//! [`perm`] types, the T-step [`gens`], canonical forms under signed
//! permutations ([`canon`]), layered table generation ([`lut`]),
//! bidirectional search ([`mitm`]), persistence ([`store`]) and slow
//! reference implementations ([`oracle`]).

pub mod canon;
pub mod dyadic;
pub mod error;
pub mod gens;
pub mod lut;
pub mod matrix;
pub mod mitm;
pub mod oracle;
pub mod perm;
pub mod store;
pub mod word;

pub use canon::{canonicalize, equivalent, signature, CanonicalForm, Signature};
pub use dyadic::{Dyadic, DyadicError};
pub use error::{Error, Result};
pub use gens::{apply_gen, generator, GenIndex};
pub use lut::{generate_lut, init_lut, Lut, LutOptions, Node};
pub use matrix::{gate_image, Gate, So6Matrix};
pub use mitm::{mitm, MitmOptions, MitmResult};
pub use perm::SignedPerm;
pub use word::{evaluate_word, Word};
