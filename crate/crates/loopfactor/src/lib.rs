//! Command-line plumbing for `loopfactor-core`: run configuration, loop JSON files, the
//! named invariant suite, limit studies and JSON job wrappers.

pub mod checks;
pub mod config;
pub mod io;
pub mod jobs;
pub mod study;
pub mod suite;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// A computation failed (bad domain, singular input).
    pub const RUNTIME: i32 = 1;
    pub const CHECK_FAILED: i32 = 2;
    /// Invalid configuration, flags or input file.
    pub const CONFIG: i32 = 3;
}
