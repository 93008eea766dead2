//! Recoverability-based information quantities on finite-dimensional
//! multipartite density matrices.
//!
//! All logarithms are base 2. Subsystems are ordered with the first label as
//! the most significant index.

pub mod channels;
pub mod error;
pub mod infoquant;
pub mod linalg;
pub mod measrec;
pub mod qcore;
pub mod recopt;
pub mod rng;
pub mod sdp;
pub mod squash;

pub use error::{Error, Result};
pub use rng::StreamRng;
