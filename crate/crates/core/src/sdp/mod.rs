//! Semidefinite programming over complex Hermitian blocks.

mod program;
mod solver;

pub use program::*;
pub use solver::*;
