//! Error type shared by the whole crate.

/// Errors surfaced by lattice construction, walk evolution and the oracles.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter combination that can never produce a valid run.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Two objects that must share the same lattice geometry do not.
    #[error("extent mismatch: {0}")]
    ExtentMismatch(String),

    /// A flip mask sized for a different basis than the state it is applied to.
    #[error("flip mask covers {got} basis states but the state has {want}")]
    MaskSizeMismatch { want: usize, got: usize },

    /// Nonzero amplitude would be shifted off the allocated lattice.
    #[error("amplitude would leave the allocated lattice at site ({x}, {y})")]
    EdgeOverflow { x: i32, y: i32 },

    /// `defect_reversal_check` called on a site that holds a Hadamard coin.
    #[error("site ({x}, {y}) is not a defect")]
    NotADefect { x: i32, y: i32 },

    /// Density-matrix evolution requested on a basis beyond the configured cap.
    #[error("basis size {basis} exceeds the density-matrix cap of {cap}")]
    CapacityExceeded { basis: usize, cap: usize },

    /// A matrix that fails the density-matrix invariants (symmetry, trace, positivity).
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    /// Distributions compared over different supports.
    #[error("distribution supports do not match")]
    SupportMismatch,

    /// `sweep` called with no configurations.
    #[error("sweep requires at least one configuration")]
    EmptySweep,

    /// A serialized lattice that cannot be decoded back into a `CoinLattice`.
    #[error("lattice decode failed: {0}")]
    LatticeDecode(String),
}

pub type Result<T> = std::result::Result<T, Error>;
