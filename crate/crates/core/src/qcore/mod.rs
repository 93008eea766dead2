//! Multipartite states, pure vectors, sampling and norms.

pub mod norms;
pub mod pure_state;
pub mod random;
pub mod state;

pub use norms::{max_eigenvalue, schatten_norm};
pub use pure_state::{PureStateVector, Schmidt};
pub use random::{random_density, random_isometry, random_pure, random_unitary};
pub use state::{classical_copy, ghz, maximally_entangled, single, MultipartiteState};
