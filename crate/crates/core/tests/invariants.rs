//! Property tests for the structural invariants of the walk: norm
//! preservation, parity, light cone, mask invisibility, unitarity of the
//! step·coin operator, and serialization round trips.

use proptest::prelude::*;
use qwalk_core::{
    apply_mask, evolve, sample_mask, trial_stream, Boundary, CoinLattice, CoinValue, DephasingSpec,
    Dim, Extent, InitialState, Position, WalkState, NORM_TOLERANCE,
};

fn dim_strategy() -> impl Strategy<Value = Dim> {
    prop_oneof![Just(Dim::One), Just(Dim::Two)]
}

fn coin_strategy() -> impl Strategy<Value = CoinValue> {
    prop_oneof![Just(CoinValue::Plus), Just(CoinValue::Minus)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Norm, per-axis parity and the light cone hold along any trajectory,
    /// for any congestion, dephasing strength and start site.
    #[test]
    fn trajectories_preserve_norm_parity_and_light_cone(
        dim in dim_strategy(),
        t_max in 2u32..=4,
        p in 0.0f64..=1.0,
        p_d in 0.0f64..=1.0,
        cx in coin_strategy(),
        cy in coin_strategy(),
        on_edge in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let steps = t_max;
        let x0 = if on_edge {
            Position::new(-(t_max as i32), 0)
        } else {
            Position::origin()
        };
        let init = InitialState { x0, c0: [cx, cy] };
        let extent = Extent::for_walk(dim, t_max, x0, steps).unwrap();
        let mut rng = trial_stream(seed, 0);
        let lattice = CoinLattice::generate(extent, p, &[x0], &mut rng).unwrap();
        let deph = DephasingSpec::new(p_d).unwrap();
        let trajectory = evolve(&init, &lattice, &deph, steps, &mut rng).unwrap();
        for state in &trajectory {
            prop_assert!((state.norm_sq() - 1.0).abs() < NORM_TOLERANCE);
            let t = state.time() as i32;
            let dist = state.distribution();
            for (pos, prob) in dist.iter() {
                if prob == 0.0 {
                    continue;
                }
                // light cone: Chebyshev distance at most t from the start
                prop_assert!((pos.x - x0.x).abs() <= t);
                prop_assert!((pos.y - x0.y).abs() <= t);
                // parity: each axis moves by ±1 every step
                prop_assert_eq!((pos.x - x0.x + t) % 2, 0);
                if dim == Dim::Two {
                    prop_assert_eq!((pos.y - x0.y + t) % 2, 0);
                }
            }
        }
    }

    /// Sign flips never change the position distribution of the state they
    /// are applied to.
    #[test]
    fn masks_are_invisible_to_the_distribution(
        dim in dim_strategy(),
        p_d in 0.0f64..=1.0,
        steps in 1u32..=3,
        seed in any::<u64>(),
    ) {
        let t_max = 3;
        let extent = Extent::nominal(dim, t_max);
        let lattice = CoinLattice::all_hadamard(extent);
        let mut rng = trial_stream(seed, 0);
        let deph = DephasingSpec::new(0.0).unwrap();
        let init = InitialState { x0: Position::origin(), c0: [CoinValue::Plus, CoinValue::Plus] };
        let mut state = evolve(&init, &lattice, &deph, steps, &mut rng)
            .unwrap()
            .pop()
            .unwrap();
        let before = state.distribution();
        let mask = sample_mask(extent.basis_len(), p_d, &mut rng).unwrap();
        apply_mask(&mut state, &mask).unwrap();
        let after = state.distribution();
        for ((_, a), (_, b)) in before.iter().zip(after.iter()) {
            prop_assert!((a - b).abs() < 1e-15);
        }
    }

    /// Escape probability stays within [0, 1] and is exactly zero until the
    /// light cone reaches the boundary for an edge start.
    #[test]
    fn escape_probability_is_a_probability(
        t_b in 0u32..=4,
        p in 0.3f64..=1.0,
        seed in any::<u64>(),
    ) {
        let t_max = 5u32;
        let x0 = Position::new(-(t_max as i32), 0);
        let init = InitialState { x0, c0: [CoinValue::Plus, CoinValue::Plus] };
        let extent = Extent::for_walk(Dim::Two, t_max, x0, t_max).unwrap();
        let mut rng = trial_stream(seed, 0);
        let lattice = CoinLattice::generate(extent, p, &[x0], &mut rng).unwrap();
        let deph = DephasingSpec::new(0.0).unwrap();
        let trajectory = evolve(&init, &lattice, &deph, t_max, &mut rng).unwrap();
        for state in &trajectory {
            let p_esc =
                qwalk_core::escape_probability(&state.distribution(), Boundary::new(t_b)).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&p_esc));
            if state.time() <= t_b {
                prop_assert_eq!(p_esc, 0.0);
            }
        }
    }

    /// Lattice JSON round trip is lossless for arbitrary geometry and seeds.
    #[test]
    fn lattice_json_round_trips(
        dim in dim_strategy(),
        t_max in 1u32..=6,
        p in 0.0f64..=1.0,
        seed in any::<u64>(),
        edge in any::<bool>(),
    ) {
        let x0 = if edge { Position::new(-(t_max as i32), 0) } else { Position::origin() };
        let extent = Extent::for_walk(dim, t_max, x0, t_max).unwrap();
        let lattice = CoinLattice::generate_seeded(extent, p, &[x0], seed).unwrap();
        let text = lattice.to_json_string();
        let back = CoinLattice::from_json_str(&text).unwrap();
        prop_assert_eq!(lattice, back);
    }
}

/// Feed every nominal-lattice basis state through coin∘shift and check the
/// assembled matrix is an isometry (columns orthonormal: MᵀM = I). Runs on
/// defect-free and congested lattices, 1D and 2D, for t_max ≤ 3.
#[test]
fn step_coin_operator_is_an_isometry_on_small_lattices() {
    for dim in [Dim::One, Dim::Two] {
        for t_max in 1u32..=3 {
            for (label, p) in [("open", 1.0), ("congested", 0.5)] {
                // one-step margin so edge columns stay representable
                let nominal = Extent::nominal(dim, t_max);
                let padded = Extent::for_walk(dim, t_max + 1, Position::origin(), 0).unwrap();
                let mut rng = trial_stream(97, t_max as u64);
                let lattice = CoinLattice::generate(padded, p, &[], &mut rng).unwrap();
                let nc = nominal.coin_states();
                let mut columns: Vec<Vec<f64>> = Vec::new();
                for pos in nominal.sites() {
                    for c in 0..nc {
                        let coins = nominal.coins_of(c);
                        let init = InitialState { x0: pos, c0: coins };
                        let mut state = WalkState::new(padded, &init).unwrap();
                        state.apply_coin(&lattice).unwrap();
                        state.apply_step().unwrap();
                        columns.push(state.amplitudes().to_vec());
                    }
                }
                for (i, a) in columns.iter().enumerate() {
                    for (j, b) in columns.iter().enumerate() {
                        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!(
                            (dot - expect).abs() < NORM_TOLERANCE,
                            "{label} {dim:?} t_max={t_max}: M^T M[{i},{j}] = {dot}"
                        );
                    }
                }
            }
        }
    }
}

/// Trajectory-level dephasing averages to the exact channel: after one
/// masked step, every mean off-diagonal of |ψ⟩⟨ψ| lands within 5σ of
/// (1-2p_d)² times its unmasked value, and diagonals are untouched.
#[test]
fn averaged_masks_realize_the_dephasing_channel() {
    let t_max = 2u32;
    let extent = Extent::nominal(Dim::One, t_max);
    let lattice = CoinLattice::all_hadamard(extent);
    let deph0 = DephasingSpec::new(0.0).unwrap();
    let init = InitialState::new_1d(0, CoinValue::Plus);
    // ψ after one noiseless step; the masked step is the second one.
    let base = evolve(&init, &lattice, &deph0, 1, &mut trial_stream(0, 0))
        .unwrap()
        .pop()
        .unwrap();
    let mut unmasked = base.clone();
    unmasked.apply_coin(&lattice).unwrap();
    unmasked.apply_step().unwrap();
    let psi = unmasked.amplitudes().to_vec();
    let m = psi.len();

    let p_d = 0.15f64;
    let factor = (1.0 - 2.0 * p_d) * (1.0 - 2.0 * p_d);
    let n = 100_000u64;
    let mut mean = vec![0.0f64; m * m];
    let mut rng = trial_stream(42, 0);
    for _ in 0..n {
        let mask = sample_mask(m, p_d, &mut rng).unwrap();
        let mut masked = unmasked.clone();
        apply_mask(&mut masked, &mask).unwrap();
        let a = masked.amplitudes();
        for i in 0..m {
            for j in 0..m {
                mean[i * m + j] += a[i] * a[j];
            }
        }
    }
    for v in &mut mean {
        *v /= n as f64;
    }
    // var of f_i f_j ψ_i ψ_j over masks: (1 - factor²) (ψ_i ψ_j)²
    let spread = (1.0 - factor * factor).sqrt();
    for i in 0..m {
        for j in 0..m {
            let exact = psi[i] * psi[j];
            if i == j {
                assert!((mean[i * m + j] - exact).abs() < 1e-12, "diagonal moved");
                continue;
            }
            let sigma = spread * exact.abs() / (n as f64).sqrt();
            let diff = (mean[i * m + j] - factor * exact).abs();
            assert!(
                diff <= 5.0 * sigma + 1e-12,
                "off-diagonal ({i},{j}): |{:.3e}| > 5σ = {:.3e}",
                diff,
                5.0 * sigma
            );
        }
    }
}

/// p_d = 0 and p_d = 1 give trajectories distributionally identical to the
/// noiseless walk (a global sign flip is invisible).
#[test]
fn extreme_dephasing_reproduces_the_ideal_walk() {
    let extent = Extent::nominal(Dim::One, 6);
    let lattice = CoinLattice::all_hadamard(extent);
    let init = InitialState::new_1d(0, CoinValue::Plus);
    let run = |p_d: f64| {
        let deph = DephasingSpec::new(p_d).unwrap();
        evolve(&init, &lattice, &deph, 6, &mut trial_stream(9, 0)).unwrap()
    };
    let ideal = run(0.0);
    let flipped = run(1.0);
    for (a, b) in ideal.iter().zip(&flipped) {
        let (da, db) = (a.distribution(), b.distribution());
        for ((_, x), (_, y)) in da.iter().zip(db.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

/// Complete dephasing behaves like the direct classical walk.
#[test]
fn half_dephasing_matches_the_classical_walk() {
    use qwalk_core::{classical_walk, total_variation, ExperimentConfig, LatticeMode};
    let config = ExperimentConfig {
        dim: Dim::One,
        t_max: 6,
        steps: 6,
        x0: Position::origin(),
        c0: [CoinValue::Plus, CoinValue::Plus],
        p: 1.0,
        p_d: 0.5,
        t_b: None,
        trials: 20_000,
        lattice_mode: LatticeMode::ResamplePerTrial,
        master_seed: 3,
    };
    let ensemble = qwalk_core::run(&config).unwrap();
    let lattice = CoinLattice::all_hadamard(config.extent().unwrap());
    let exact = classical_walk(&config, &lattice).unwrap();
    let tv = total_variation(ensemble.final_distribution(), &exact).unwrap();
    assert!(tv < 0.03, "total variation {tv}");
}
