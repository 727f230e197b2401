//! Pure-state walker representation and single-step evolution.
//!
//! One evolution step is coin, then shift, then (optionally) a dephasing
//! mask. The coin at each site is either the Hadamard coin
//!
//! ```text
//! H = 1/√2 [ 1  1 ]        C|x, +1⟩ = (|x, +1⟩ + |x, -1⟩)/√2
//!          [ 1 -1 ]        C|x, -1⟩ = (|x, +1⟩ - |x, -1⟩)/√2
//! ```
//!
//! or the bit-flip coin `X` at defect sites; 2D sites use `H⊗H` / `X⊗X`.
//! The shift then moves amplitude from `(x, c)` to `(x + c, c)`
//! independently per axis. All coins and masks are real, so amplitudes are
//! stored as `f64`.

use crate::dephasing::{self, DephasingSpec};
use crate::error::{Error, Result};
use crate::geometry::{CoinPair, Dim, Extent, InitialState, Position};
use crate::lattice::{CoinKind, CoinLattice};
use crate::metrics::Distribution;
use crate::rng::RandomStream;

/// Tolerance for norm and orthogonality checks across the crate: double
/// precision accumulated over at most ~10⁴ basis states.
pub const NORM_TOLERANCE: f64 = 1e-9;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Dense pure state over the `(position × coin)` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    extent: Extent,
    time: u32,
    amps: Vec<f64>,
}

impl WalkState {
    /// Point state `|x0, c0⟩` at time zero.
    pub fn new(extent: Extent, init: &InitialState) -> Result<WalkState> {
        let idx = extent.basis_index(init.x0, init.c0).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "start position ({}, {}) outside the allocated lattice",
                init.x0.x, init.x0.y
            ))
        })?;
        let mut amps = vec![0.0; extent.basis_len()];
        amps[idx] = 1.0;
        Ok(WalkState {
            extent,
            time: 0,
            amps,
        })
    }

    /// Wrap a raw amplitude vector (oracle column/row application).
    pub(crate) fn from_amplitudes(extent: Extent, time: u32, amps: Vec<f64>) -> WalkState {
        debug_assert_eq!(amps.len(), extent.basis_len());
        WalkState { extent, time, amps }
    }

    pub fn extent(&self) -> &Extent {
        &self.extent
    }

    pub fn time(&self) -> u32 {
        self.time
    }

    /// Amplitude of one basis element; zero outside the allocation.
    pub fn amplitude(&self, pos: Position, coins: CoinPair) -> f64 {
        self.extent
            .basis_index(pos, coins)
            .map_or(0.0, |i| self.amps[i])
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [f64] {
        &mut self.amps
    }

    /// Σ γ² over the whole basis.
    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum()
    }

    /// Apply the site-dependent coin: `H` (or `H⊗H`) at open sites, `X`
    /// (or `X⊗X`) at defects. Position support is unchanged.
    pub fn apply_coin(&mut self, lattice: &CoinLattice) -> Result<()> {
        self.extent
            .ensure_matches(lattice.extent(), "state vs coin lattice")?;
        let nc = self.extent.coin_states();
        match self.extent.dim() {
            Dim::One => {
                for (cell, kind) in self.amps.chunks_exact_mut(nc).zip(lattice.kinds()) {
                    let (a, b) = (cell[0], cell[1]);
                    match kind {
                        CoinKind::Hadamard => {
                            cell[0] = (a + b) * FRAC_1_SQRT_2;
                            cell[1] = (a - b) * FRAC_1_SQRT_2;
                        }
                        CoinKind::BitFlip => {
                            cell[0] = b;
                            cell[1] = a;
                        }
                    }
                }
            }
            Dim::Two => {
                for (cell, kind) in self.amps.chunks_exact_mut(nc).zip(lattice.kinds()) {
                    let (a, b, c, d) = (cell[0], cell[1], cell[2], cell[3]);
                    match kind {
                        CoinKind::Hadamard => {
                            // H⊗H in the (c_x, c_y) index ordering.
                            cell[0] = 0.5 * (a + b + c + d);
                            cell[1] = 0.5 * (a - b + c - d);
                            cell[2] = 0.5 * (a + b - c - d);
                            cell[3] = 0.5 * (a - b - c + d);
                        }
                        CoinKind::BitFlip => {
                            // X⊗X reverses both coin axes.
                            cell[0] = d;
                            cell[1] = c;
                            cell[2] = b;
                            cell[3] = a;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Shift amplitude from `(x, c)` to `(x + c, c)` along every axis.
    ///
    /// The allocation policy of [`Extent::for_walk`] guarantees amplitude
    /// never reaches the array edge; if it somehow does, this errors rather
    /// than dropping norm.
    pub fn apply_step(&mut self) -> Result<()> {
        self.check_edges()?;
        let ext = self.extent;
        let nc = ext.coin_states();
        let wx = ext.axis(0).len();
        let (xr, yr) = (ext.axis(0), ext.axis(1));
        let old = &self.amps;
        let mut new = Vec::with_capacity(old.len());
        match ext.dim() {
            Dim::One => {
                for x in xr.lo..=xr.hi {
                    let site = (x - xr.lo) as usize;
                    // target (x, +1) came from x-1; target (x, -1) from x+1.
                    new.push(if x > xr.lo { old[2 * (site - 1)] } else { 0.0 });
                    new.push(if x < xr.hi {
                        old[2 * (site + 1) + 1]
                    } else {
                        0.0
                    });
                }
            }
            Dim::Two => {
                for y in yr.lo..=yr.hi {
                    for x in xr.lo..=xr.hi {
                        for c in 0..nc {
                            let coins = ext.coins_of(c);
                            let sx = x - coins[0].value();
                            let sy = y - coins[1].value();
                            let amp = if xr.contains(sx) && yr.contains(sy) {
                                let src =
                                    ((sy - yr.lo) as usize * wx + (sx - xr.lo) as usize) * nc + c;
                                old[src]
                            } else {
                                0.0
                            };
                            new.push(amp);
                        }
                    }
                }
            }
        }
        self.amps = new;
        Ok(())
    }

    /// Error if any outward-pointing amplitude sits on the array edge.
    fn check_edges(&self) -> Result<()> {
        let ext = self.extent;
        let nc = ext.coin_states();
        for site in 0..ext.n_sites() {
            let pos = ext.position_of(site);
            let on_edge = pos.x == ext.axis(0).lo
                || pos.x == ext.axis(0).hi
                || (ext.dim() == Dim::Two && (pos.y == ext.axis(1).lo || pos.y == ext.axis(1).hi));
            if !on_edge {
                continue;
            }
            for c in 0..nc {
                if self.amps[site * nc + c] == 0.0 {
                    continue;
                }
                let coins = ext.coins_of(c);
                let tx = pos.x + coins[0].value();
                let ty = pos.y
                    + if ext.dim() == Dim::Two {
                        coins[1].value()
                    } else {
                        0
                    };
                if !ext.contains(Position::new(tx, ty)) {
                    return Err(Error::EdgeOverflow { x: pos.x, y: pos.y });
                }
            }
        }
        Ok(())
    }

    /// One full evolution step: coin, shift, dephasing mask; advances time.
    pub fn evolve_step(
        &mut self,
        lattice: &CoinLattice,
        deph: &DephasingSpec,
        rng: &mut RandomStream,
    ) -> Result<()> {
        self.apply_coin(lattice)?;
        self.apply_step()?;
        if deph.p_d() > 0.0 {
            let mask = dephasing::sample_mask(self.extent.basis_len(), deph.p_d(), rng)?;
            dephasing::apply_mask(self, &mask)?;
        }
        self.time += 1;
        debug_assert!((self.norm_sq() - 1.0).abs() < NORM_TOLERANCE);
        Ok(())
    }

    /// Probability-over-positions snapshot of this state.
    pub fn distribution(&self) -> Distribution {
        let nc = self.extent.coin_states();
        let probs = self
            .amps
            .chunks_exact(nc)
            .map(|cell| cell.iter().map(|a| a * a).sum())
            .collect();
        Distribution::from_parts(self.extent, self.time, probs)
    }
}

/// Evolve `init` for `steps` steps on `lattice`, returning the state after
/// each step (element `t-1` has time `t`). `steps = 0` yields an empty
/// trajectory; the caller keeps the initial point state as its `t = 0`
/// snapshot.
pub fn evolve(
    init: &InitialState,
    lattice: &CoinLattice,
    deph: &DephasingSpec,
    steps: u32,
    rng: &mut RandomStream,
) -> Result<Vec<WalkState>> {
    let ext = lattice.extent();
    check_reach(ext, init.x0, steps)?;
    let mut state = WalkState::new(*ext, init)?;
    let mut trajectory = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        state.evolve_step(lattice, deph, rng)?;
        trajectory.push(state.clone());
    }
    Ok(trajectory)
}

/// Verify the light cone of `steps` steps from `x0` stays inside `ext`.
pub(crate) fn check_reach(ext: &Extent, x0: Position, steps: u32) -> Result<()> {
    let s = steps as i32;
    for k in 0..ext.dim().axes() {
        let c = x0.axis(k);
        if !ext.axis(k).contains(c) {
            return Err(Error::InvalidConfig(format!(
                "start coordinate {c} outside the allocated lattice"
            )));
        }
        if c - s < ext.axis(k).lo || c + s > ext.axis(k).hi {
            return Err(Error::InvalidConfig(format!(
                "{steps} steps from coordinate {c} would need sites beyond the \
                 allocated lattice [{}, {}]",
                ext.axis(k).lo,
                ext.axis(k).hi
            )));
        }
    }
    Ok(())
}
