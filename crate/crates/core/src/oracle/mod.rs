//! Slow reference implementations. They share types with the rest of the
//! crate but none of its optimized code paths.

pub mod big;
pub mod naive;

pub use big::BigDyadic;
pub use naive::{naive_bfs, naive_canon, naive_equivalent, Variant};
