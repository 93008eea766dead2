//! Command-line front end for `recoverlib`: state files, single quantities
//! and randomized inequality sweeps.

pub mod compute;
pub mod make;
pub mod state_io;
pub mod sweep;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 1;
    pub const NON_CONVERGENCE: i32 = 2;
    pub const VIOLATION: i32 = 3;
}

/// Exit code for an error chain: solver non-convergence anywhere in the chain
/// maps to 2, everything else to 1.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    let stalled = err
        .chain()
        .any(|e| matches!(e.downcast_ref::<recoverlib::Error>(), Some(recoverlib::Error::NonConvergence { .. })));
    if stalled {
        exit::NON_CONVERGENCE
    } else {
        exit::INPUT
    }
}
