//! Exact, small-scale reference implementations.
//!
//! Two truth sources back the stochastic engine: density-matrix evolution
//! under the averaged dephasing channel (`ρ → dephase(U ρ Uᵀ)` per step,
//! with `U` the step·coin isometry applied column- and row-wise), and a
//! classical random walker computed exactly by dynamic programming over
//! `(position, coin)` occupancy. Both are deliberately slow and simple.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{Dim, Extent, Position};
use crate::lattice::{CoinKind, CoinLattice};
use crate::metrics::Distribution;
use crate::montecarlo::ExperimentConfig;
use crate::rng::trial_stream;
use crate::walk::{self, WalkState, NORM_TOLERANCE};

/// Default cap on the basis size of density-matrix evolution (`ρ` then has
/// at most 64 × 64 = 4096 entries). The oracle exists for small instances.
pub const DENSITY_BASIS_CAP: usize = 64;

/// Largest basis for which the explicit `2^m`-mask mixture is enumerable.
pub const ENUMERATION_BASIS_CAP: usize = 16;

/// Real symmetric density matrix over the same basis labeling as
/// [`WalkState`]. All coins and masks in this crate are real, so `ρ` stays
/// real through every operation.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    extent: Extent,
    time: u32,
    data: DMatrix<f64>,
}

impl DensityMatrix {
    /// `ρ = |ψ⟩⟨ψ|` of a pure state.
    pub fn from_pure(state: &WalkState) -> DensityMatrix {
        let amps = state.amplitudes();
        let m = amps.len();
        let data = DMatrix::from_fn(m, m, |i, j| amps[i] * amps[j]);
        DensityMatrix {
            extent: *state.extent(),
            time: state.time(),
            data,
        }
    }

    pub(crate) fn from_matrix(extent: Extent, time: u32, data: DMatrix<f64>) -> DensityMatrix {
        debug_assert_eq!(data.nrows(), extent.basis_len());
        DensityMatrix { extent, time, data }
    }

    /// Build from an explicit matrix, enforcing the density-matrix
    /// invariants (symmetry, unit trace, positivity).
    pub fn new(extent: Extent, time: u32, data: DMatrix<f64>) -> Result<DensityMatrix> {
        let rho = DensityMatrix { extent, time, data };
        rho.validate()?;
        Ok(rho)
    }

    pub fn extent(&self) -> &Extent {
        &self.extent
    }

    pub fn time(&self) -> u32 {
        self.time
    }

    pub fn basis_len(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }

    /// `Tr(ρ²)`; 1 for pure states.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        (&self.data - &other.data).norm()
    }

    /// Check the density-matrix invariants: symmetry and unit trace within
    /// 1e-9, eigenvalues above -1e-9.
    pub fn validate(&self) -> Result<()> {
        let m = self.data.nrows();
        if self.data.ncols() != m || m != self.extent.basis_len() {
            return Err(Error::InvalidDensityMatrix(format!(
                "shape {}×{} does not match the {}-element basis",
                self.data.nrows(),
                self.data.ncols(),
                self.extent.basis_len()
            )));
        }
        let asym = (&self.data - self.data.transpose()).amax();
        if asym > NORM_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("asymmetry {asym:.3e}")));
        }
        let trace = self.trace();
        if (trace - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace}")));
        }
        let eigen = nalgebra::SymmetricEigen::new(self.data.clone());
        let min = eigen.eigenvalues.min();
        if min < -NORM_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    /// `diag(ρ)` as a position distribution (coin degrees summed out).
    pub fn diagonal_distribution(&self) -> Distribution {
        let nc = self.extent.coin_states();
        let probs: Vec<f64> = (0..self.extent.n_sites())
            .map(|site| {
                (0..nc)
                    .map(|c| self.data[(site * nc + c, site * nc + c)].max(0.0))
                    .sum()
            })
            .collect();
        Distribution::from_parts(self.extent, self.time, probs)
    }
}

/// The averaged sign-flip channel: diagonal unchanged, every off-diagonal
/// element multiplied by `(1 - 2 p_d)²`.
pub fn dephase_channel(rho: &DensityMatrix, p_d: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p_d) {
        return Err(Error::InvalidConfig(format!(
            "dephasing probability must lie in [0, 1], got {p_d}"
        )));
    }
    rho.validate()?;
    let factor = (1.0 - 2.0 * p_d).powi(2);
    let m = rho.data.nrows();
    let data = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            rho.data[(i, j)]
        } else {
            rho.data[(i, j)] * factor
        }
    });
    Ok(DensityMatrix {
        extent: rho.extent,
        time: rho.time,
        data,
    })
}

/// The same channel by brute force: the explicit mixture
/// `Σ_j p_j F_j ρ F_j` over all `2^m` sign patterns, each weighted
/// `p_d^s (1 - p_d)^{m-s}`. Exponential in the basis size; capped at
/// [`ENUMERATION_BASIS_CAP`].
pub fn dephase_channel_enumerated(rho: &DensityMatrix, p_d: f64) -> Result<DensityMatrix> {
    let m = rho.data.nrows();
    if m > ENUMERATION_BASIS_CAP {
        return Err(Error::CapacityExceeded {
            basis: m,
            cap: ENUMERATION_BASIS_CAP,
        });
    }
    if !(0.0..=1.0).contains(&p_d) {
        return Err(Error::InvalidConfig(format!(
            "dephasing probability must lie in [0, 1], got {p_d}"
        )));
    }
    rho.validate()?;
    let mut out = DMatrix::zeros(m, m);
    let mut signs = vec![1.0f64; m];
    for mask in 0u64..(1 << m) {
        let s = mask.count_ones() as i32;
        let weight = p_d.powi(s) * (1.0 - p_d).powi(m as i32 - s);
        if weight == 0.0 {
            continue;
        }
        for (k, sign) in signs.iter_mut().enumerate() {
            *sign = if mask >> k & 1 == 1 { -1.0 } else { 1.0 };
        }
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] += weight * signs[i] * signs[j] * rho.data[(i, j)];
            }
        }
    }
    Ok(DensityMatrix {
        extent: rho.extent,
        time: rho.time,
        data: out,
    })
}

/// Apply the step·coin isometry to every column of `m` in place.
fn apply_walk_unitary(extent: Extent, lattice: &CoinLattice, m: &mut DMatrix<f64>) -> Result<()> {
    let dim = m.nrows();
    for j in 0..dim {
        let col: Vec<f64> = m.column(j).iter().copied().collect();
        let mut state = WalkState::from_amplitudes(extent, 0, col);
        state.apply_coin(lattice)?;
        state.apply_step()?;
        for (i, v) in state.amplitudes().iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    Ok(())
}

/// One coherent step of the mixed state: `ρ → U ρ Uᵀ` with `U` the
/// step·coin operator of `lattice`. No dephasing; time advances by one.
pub fn unitary_step(rho: &DensityMatrix, lattice: &CoinLattice) -> Result<DensityMatrix> {
    rho.extent
        .ensure_matches(lattice.extent(), "density matrix vs coin lattice")?;
    let mut out = rho.clone();
    apply_walk_unitary(out.extent, lattice, &mut out.data)?;
    out.data.transpose_mut();
    apply_walk_unitary(out.extent, lattice, &mut out.data)?;
    out.data.transpose_mut();
    out.time += 1;
    Ok(out)
}

/// Exact mixed-state trajectory: per step `ρ → dephase_channel(U ρ Uᵀ)`.
/// The diagonal of element `t` is the exact trajectory-averaged
/// distribution after `t + 1` steps.
pub fn evolve_density(
    config: &ExperimentConfig,
    lattice: &CoinLattice,
) -> Result<Vec<DensityMatrix>> {
    evolve_density_capped(config, lattice, DENSITY_BASIS_CAP)
}

/// [`evolve_density`] with an explicit basis cap.
pub fn evolve_density_capped(
    config: &ExperimentConfig,
    lattice: &CoinLattice,
    cap: usize,
) -> Result<Vec<DensityMatrix>> {
    let extent = *lattice.extent();
    let basis = extent.basis_len();
    if basis > cap {
        return Err(Error::CapacityExceeded { basis, cap });
    }
    walk::check_reach(&extent, config.x0, config.steps)?;
    let init = WalkState::new(extent, &config.initial_state())?;
    let mut rho = DensityMatrix::from_pure(&init);
    let mut trajectory = Vec::with_capacity(config.steps as usize);
    for _ in 0..config.steps {
        rho = dephase_channel(&unitary_step(&rho, lattice)?, config.p_d)?;
        trajectory.push(rho.clone());
    }
    Ok(trajectory)
}

/// Exact classical walk by dynamic programming over `(position, coin)`
/// occupancy: at open sites the coin re-randomizes uniformly per axis, at
/// defects it reverses deterministically; then the position shifts with the
/// coin. Returns the distribution after each step.
pub fn classical_dp(config: &ExperimentConfig, lattice: &CoinLattice) -> Result<Vec<Distribution>> {
    let extent = *lattice.extent();
    walk::check_reach(&extent, config.x0, config.steps)?;
    let nc = extent.coin_states();
    let init = config.initial_state();
    let mut occ = vec![0.0f64; extent.basis_len()];
    let start = extent
        .basis_index(init.x0, init.c0)
        .ok_or_else(|| Error::InvalidConfig("start position outside the lattice".into()))?;
    occ[start] = 1.0;

    let mut trajectory = Vec::with_capacity(config.steps as usize);
    for t in 1..=config.steps {
        let mut next = vec![0.0f64; occ.len()];
        for site in 0..extent.n_sites() {
            let pos = extent.position_of(site);
            let kind = lattice.kinds()[site];
            for c in 0..nc {
                let q = occ[site * nc + c];
                if q == 0.0 {
                    continue;
                }
                match kind {
                    CoinKind::Hadamard => {
                        let w = q / nc as f64;
                        for c_new in 0..nc {
                            deposit(&extent, &mut next, pos, c_new, w)?;
                        }
                    }
                    CoinKind::BitFlip => {
                        // X (X⊗X) maps coin index c to its bitwise complement.
                        let c_new = nc - 1 - c;
                        deposit(&extent, &mut next, pos, c_new, q)?;
                    }
                }
            }
        }
        occ = next;
        let probs: Vec<f64> = occ.chunks_exact(nc).map(|cell| cell.iter().sum()).collect();
        trajectory.push(Distribution::from_parts(extent, t, probs));
    }
    Ok(trajectory)
}

fn deposit(
    extent: &Extent,
    next: &mut [f64],
    pos: Position,
    coin_index: usize,
    weight: f64,
) -> Result<()> {
    let coins = extent.coins_of(coin_index);
    let target = Position::new(
        pos.x + coins[0].value(),
        pos.y
            + if extent.dim() == Dim::Two {
                coins[1].value()
            } else {
                0
            },
    );
    match extent.basis_index(target, coins) {
        Some(idx) => {
            next[idx] += weight;
            Ok(())
        }
        None => Err(Error::EdgeOverflow { x: pos.x, y: pos.y }),
    }
}

/// Final-step classical distribution, computed exactly (the truth source).
/// `steps = 0` is the point mass at the start.
pub fn classical_walk(config: &ExperimentConfig, lattice: &CoinLattice) -> Result<Distribution> {
    if config.steps == 0 {
        let extent = *lattice.extent();
        let site = extent
            .site_index(config.x0)
            .ok_or_else(|| Error::InvalidConfig("start position outside the lattice".into()))?;
        let mut probs = vec![0.0; extent.n_sites()];
        probs[site] = 1.0;
        return Ok(Distribution::from_parts(extent, 0, probs));
    }
    Ok(classical_dp(config, lattice)?.pop().expect("steps >= 1"))
}

/// Final-step classical distribution estimated by sampling
/// `config.trials` walkers (one RNG stream per walker; one uniform draw per
/// axis per step at open sites).
pub fn classical_walk_sampled(
    config: &ExperimentConfig,
    lattice: &CoinLattice,
) -> Result<Distribution> {
    use rand::Rng;
    let extent = *lattice.extent();
    walk::check_reach(&extent, config.x0, config.steps)?;
    if config.trials == 0 {
        return Err(Error::InvalidConfig("trials must be positive".into()));
    }
    let init = config.initial_state();
    let mut counts = vec![0u64; extent.n_sites()];
    for trial in 0..config.trials {
        let mut rng = trial_stream(config.master_seed, trial);
        let mut pos = init.x0;
        let mut coins = init.c0;
        for _ in 0..config.steps {
            match lattice.kind_at(pos).expect("walker stays on the lattice") {
                CoinKind::Hadamard => {
                    for coin in coins.iter_mut().take(extent.dim().axes()) {
                        *coin = if rng.random::<f64>() < 0.5 {
                            crate::geometry::CoinValue::Plus
                        } else {
                            crate::geometry::CoinValue::Minus
                        };
                    }
                }
                CoinKind::BitFlip => {
                    for coin in coins.iter_mut().take(extent.dim().axes()) {
                        *coin = coin.flipped();
                    }
                }
            }
            pos = Position::new(
                pos.x + coins[0].value(),
                pos.y
                    + if extent.dim() == Dim::Two {
                        coins[1].value()
                    } else {
                        0
                    },
            );
            if !extent.contains(pos) {
                return Err(Error::EdgeOverflow { x: pos.x, y: pos.y });
            }
        }
        counts[extent.site_index(pos).unwrap()] += 1;
    }
    let n = config.trials as f64;
    let probs: Vec<f64> = counts.iter().map(|c| *c as f64 / n).collect();
    Ok(Distribution::from_parts(extent, config.steps, probs))
}

/// Total variation distance `½ Σ |a - b|` between two distributions over
/// the same support.
pub fn total_variation(a: &Distribution, b: &Distribution) -> Result<f64> {
    if a.extent() != b.extent() {
        return Err(Error::SupportMismatch);
    }
    Ok(a.probs()
        .iter()
        .zip(b.probs())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / 2.0)
}
