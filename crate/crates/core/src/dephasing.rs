//! Per-step random sign flips on basis states.
//!
//! After every step each basis element independently acquires a π phase
//! (sign) flip with probability `p_d`. One sampled pattern is a diagonal
//! ±1 unitary; averaging trajectories over patterns realizes a dephasing
//! channel that multiplies every off-diagonal density-matrix element by
//! `(1 - 2 p_d)²` (see the `oracle` module for the exact channel). A single
//! trajectory's position distribution is untouched — signs only matter to
//! interference in later steps.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::walk::WalkState;

/// Dephasing strength: per-step, per-basis-state flip probability.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DephasingSpec {
    p_d: f64,
}

impl DephasingSpec {
    pub fn new(p_d: f64) -> Result<DephasingSpec> {
        if !(0.0..=1.0).contains(&p_d) {
            return Err(Error::InvalidConfig(format!(
                "dephasing probability must lie in [0, 1], got {p_d}"
            )));
        }
        Ok(DephasingSpec { p_d })
    }

    pub fn p_d(&self) -> f64 {
        self.p_d
    }
}

impl TryFrom<f64> for DephasingSpec {
    type Error = Error;
    fn try_from(v: f64) -> Result<DephasingSpec> {
        DephasingSpec::new(v)
    }
}

impl From<DephasingSpec> for f64 {
    fn from(d: DephasingSpec) -> f64 {
        d.p_d
    }
}

/// One sampled sign-flip pattern over a basis of `m` elements: a diagonal
/// ±1 unitary with `flip_count` entries equal to −1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipMask {
    flips: Vec<bool>,
    flip_count: usize,
}

impl FlipMask {
    pub fn from_flips(flips: Vec<bool>) -> FlipMask {
        let flip_count = flips.iter().filter(|f| **f).count();
        FlipMask { flips, flip_count }
    }

    /// Basis dimension the mask covers.
    pub fn len(&self) -> usize {
        self.flips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flips.is_empty()
    }

    /// Number of −1 entries on the diagonal.
    pub fn flip_count(&self) -> usize {
        self.flip_count
    }

    pub fn flips(&self) -> &[bool] {
        &self.flips
    }
}

/// Sample a mask over `m` basis elements: each entry independently flips
/// with probability `p_d` (one uniform draw per entry, in basis order).
/// This realizes exactly the weight `p_d^s (1-p_d)^{m-s}` on each of the
/// `2^m` possible patterns.
pub fn sample_mask(m: usize, p_d: f64, rng: &mut RandomStream) -> Result<FlipMask> {
    if m == 0 {
        return Err(Error::InvalidConfig("mask over an empty basis".into()));
    }
    if !(0.0..=1.0).contains(&p_d) {
        return Err(Error::InvalidConfig(format!(
            "dephasing probability must lie in [0, 1], got {p_d}"
        )));
    }
    let flips: Vec<bool> = (0..m).map(|_| rng.random::<f64>() < p_d).collect();
    Ok(FlipMask::from_flips(flips))
}

/// Negate the amplitude of every flipped basis element. Magnitudes — and
/// therefore the position distribution — are unchanged.
pub fn apply_mask(state: &mut WalkState, mask: &FlipMask) -> Result<()> {
    let amps = state.amplitudes_mut();
    if amps.len() != mask.len() {
        return Err(Error::MaskSizeMismatch {
            want: amps.len(),
            got: mask.len(),
        });
    }
    for (a, flip) in amps.iter_mut().zip(mask.flips()) {
        if *flip {
            *a = -*a;
        }
    }
    Ok(())
}

/// The inefficient-measurement rate this dephasing strength is equivalent
/// to: `p_m = 4 (1 - p_d) p_d`.
pub fn measurement_equivalent_rate(p_d: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p_d));
    4.0 * (1.0 - p_d) * p_d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CoinValue::{Minus, Plus};
    use crate::geometry::{Dim, Extent, InitialState, Position};
    use crate::lattice::tests::all_hadamard;
    use crate::rng::trial_stream;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_probability_never_flips() {
        let mut rng = trial_stream(5, 0);
        for _ in 0..32 {
            let mask = sample_mask(16, 0.0, &mut rng).unwrap();
            assert_eq!(mask.flip_count(), 0);
        }
    }

    #[test]
    fn unit_probability_always_flips() {
        let mut rng = trial_stream(5, 0);
        for _ in 0..32 {
            let mask = sample_mask(16, 1.0, &mut rng).unwrap();
            assert_eq!(mask.flip_count(), 16);
        }
    }

    #[test]
    fn flip_count_matches_binomial_statistics() {
        // p_d = 0.5, m = 8, 10⁵ samples: mean s = 4 with σ = √(8·0.25)/√10⁵.
        let mut rng = trial_stream(7, 0);
        let samples = 100_000;
        let mut total = 0usize;
        for _ in 0..samples {
            total += sample_mask(8, 0.5, &mut rng).unwrap().flip_count();
        }
        let mean = total as f64 / samples as f64;
        let sigma = (8.0_f64 * 0.25).sqrt() / (samples as f64).sqrt();
        assert!(
            (mean - 4.0).abs() < 3.0 * sigma,
            "mean flips {mean} vs 4 ± {:.2e}",
            3.0 * sigma
        );
    }

    #[test]
    fn empty_basis_is_rejected() {
        let mut rng = trial_stream(0, 0);
        assert!(sample_mask(0, 0.5, &mut rng).is_err());
    }

    #[test]
    fn global_flip_preserves_the_distribution() {
        let ext = Extent::nominal(Dim::One, 3);
        let lat = all_hadamard(ext);
        let mut rng = trial_stream(0, 0);
        let mut st = crate::walk::evolve(
            &InitialState::new_1d(0, Plus),
            &lat,
            &DephasingSpec::new(0.0).unwrap(),
            2,
            &mut rng,
        )
        .unwrap()
        .pop()
        .unwrap();
        let before = st.distribution();
        let mask = FlipMask::from_flips(vec![true; ext.basis_len()]);
        apply_mask(&mut st, &mask).unwrap();
        let after = st.distribution();
        for (p, prob) in before.iter() {
            assert_abs_diff_eq!(after.prob_at(p), prob, epsilon = 1e-15);
        }
    }

    #[test]
    fn empty_mask_is_the_identity() {
        let ext = Extent::nominal(Dim::One, 2);
        let mut st = crate::walk::WalkState::new(ext, &InitialState::new_1d(0, Plus)).unwrap();
        let amps = st.amplitudes().to_vec();
        let mask = FlipMask::from_flips(vec![false; ext.basis_len()]);
        apply_mask(&mut st, &mask).unwrap();
        assert_eq!(st.amplitudes(), &amps[..]);
    }

    #[test]
    fn single_flip_negates_one_amplitude() {
        let ext = Extent::nominal(Dim::One, 1);
        let lat = all_hadamard(ext);
        let mut st = crate::walk::WalkState::new(ext, &InitialState::new_1d(0, Plus)).unwrap();
        st.apply_coin(&lat).unwrap();
        // state is (|0,+1> + |0,-1>)/√2; flip exactly |0,-1>.
        let mut flips = vec![false; ext.basis_len()];
        let idx = ext.basis_index(Position::origin(), [Minus, Plus]).unwrap();
        flips[idx] = true;
        apply_mask(&mut st, &FlipMask::from_flips(flips)).unwrap();
        assert_abs_diff_eq!(
            st.amplitude(Position::origin(), [Minus, Plus]),
            -std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            st.amplitude(Position::origin(), [Plus, Plus]),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn mismatched_mask_size_is_rejected() {
        let ext = Extent::nominal(Dim::One, 2);
        let mut st = crate::walk::WalkState::new(ext, &InitialState::new_1d(0, Plus)).unwrap();
        let mask = FlipMask::from_flips(vec![true; 3]);
        assert!(matches!(
            apply_mask(&mut st, &mask),
            Err(Error::MaskSizeMismatch { .. })
        ));
    }

    #[test]
    fn measurement_rate_formula() {
        assert_abs_diff_eq!(measurement_equivalent_rate(0.5), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(measurement_equivalent_rate(0.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            measurement_equivalent_rate(0.00015),
            5.9991e-4,
            epsilon = 1e-12
        );
    }
}
