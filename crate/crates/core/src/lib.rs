//! Discrete-time coined quantum and classical random walks on congested
//! lattices.
//!
//! The simulator evolves a walker on a finite 1D or 2D lattice whose sites
//! hold either a Hadamard coin (open) or a bit-flip coin (defect, placed
//! i.i.d. with probability `1 - p`), applies per-step dephasing as random
//! sign flips with probability `p_d` per basis state, and averages
//! ensembles of such trajectories. Observables are the position
//! distribution, its variance, and the probability of escaping past a
//! boundary line. Exact small-scale oracles (density-matrix evolution and a
//! dynamic-programming classical walk) back every stochastic result.
//!
//! Quick tour:
//!
//! - [`geometry`]: dimensions, extents, positions, coin values.
//! - [`lattice`]: defect placement and the lattice JSON interchange format.
//! - [`walk`]: pure-state evolution (coin, shift, mask).
//! - [`dephasing`]: sign-flip masks and the equivalent measurement rate.
//! - [`metrics`]: distributions, variance, escape probability.
//! - [`montecarlo`]: seeded, reproducible, parallel ensembles.
//! - [`oracle`]: exact density-matrix and classical references.

pub mod dephasing;
pub mod error;
pub mod geometry;
pub mod lattice;
pub mod metrics;
pub mod montecarlo;
pub mod oracle;
pub mod rng;
pub mod walk;

pub use dephasing::{
    apply_mask, measurement_equivalent_rate, sample_mask, DephasingSpec, FlipMask,
};
pub use error::{Error, Result};
pub use geometry::{AxisRange, CoinPair, CoinValue, Dim, Extent, InitialState, Position};
pub use lattice::{defect_reversal_check, CoinKind, CoinLattice};
pub use metrics::{
    distribution, escape_probability, variance, Boundary, Distribution, MetricSeries, MetricsMeta,
};
pub use montecarlo::{
    estimate_density_at, run, sweep, EnsembleResult, ExperimentConfig, LatticeMode, TRIAL_CHUNK,
};
pub use oracle::{
    classical_dp, classical_walk, classical_walk_sampled, dephase_channel,
    dephase_channel_enumerated, evolve_density, evolve_density_capped, total_variation,
    unitary_step, DensityMatrix, DENSITY_BASIS_CAP, ENUMERATION_BASIS_CAP,
};
pub use rng::{batch_stream, derive_seed, trial_stream, RandomStream, RNG_ALGORITHM};
pub use walk::{evolve, WalkState, NORM_TOLERANCE};
