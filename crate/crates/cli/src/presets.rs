//! Canned experiment grids: escape and variance curves, congestion grids,
//! and the dephasing-sensitivity snapshots.

use qwalk_core::{CoinValue, Dim, ExperimentConfig, LatticeMode, Position};

#[derive(Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
pub enum Preset {
    /// Variance and escape curves, quantum vs classical, t_max = 20, t_b = 4.
    Fig1,
    /// Escape vs time for p in {1.0, 0.9, 0.8, 0.7} plus a classical
    /// baseline at p = 0.7; t_max = 15, t_b = 4, edge start.
    Fig2,
    /// Final distributions at t_max = 10 from |0,0,+1,+1> for
    /// p_d in {0, 1.5e-4, 5e-4}.
    Fig3,
    /// Final-step variance over a (p, p_d) grid, t_max = 10.
    Fig4,
    /// Escape past t_b = 2 over a (p, p_d) grid, t_max = 10, edge start.
    Fig5,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        }
    }
}

fn base(t_max: u32, master_seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        dim: Dim::Two,
        t_max,
        steps: t_max,
        x0: Position::origin(),
        c0: [CoinValue::Plus, CoinValue::Plus],
        p: 1.0,
        p_d: 0.0,
        t_b: None,
        trials: 1000,
        lattice_mode: LatticeMode::ResamplePerTrial,
        master_seed,
    }
}

fn edge(config: &mut ExperimentConfig) {
    config.x0 = Position::new(-(config.t_max as i32), 0);
}

/// The labeled configurations of a preset. Every config carries the same
/// master seed; `sweep` derives independent per-run seeds from it.
pub fn configs(
    preset: Preset,
    master_seed: u64,
    trials: Option<u64>,
) -> Vec<(String, ExperimentConfig)> {
    let mut runs: Vec<(String, ExperimentConfig)> = Vec::new();
    match preset {
        Preset::Fig1 => {
            // The escape setup launches the walker from the left edge; with
            // p = 1 the variance curve is translation-invariant, so one
            // start position serves both metrics.
            let mut quantum = base(20, master_seed);
            edge(&mut quantum);
            quantum.t_b = Some(4);
            quantum.trials = 1;
            let mut classical = quantum.clone();
            classical.p_d = 0.5;
            classical.trials = 1000;
            runs.push(("quantum".into(), quantum));
            runs.push(("classical".into(), classical));
        }
        Preset::Fig2 => {
            for p in [1.0, 0.9, 0.8, 0.7] {
                let mut cfg = base(15, master_seed);
                edge(&mut cfg);
                cfg.t_b = Some(4);
                cfg.p = p;
                if p == 1.0 {
                    cfg.trials = 1;
                }
                runs.push((format!("p{p:.2}"), cfg));
            }
            let mut classical = base(15, master_seed);
            edge(&mut classical);
            classical.t_b = Some(4);
            classical.p = 0.7;
            classical.p_d = 0.5;
            runs.push(("p0.70_classical".into(), classical));
        }
        Preset::Fig3 => {
            for p_d in [0.0, 0.00015, 0.0005] {
                let mut cfg = base(10, master_seed);
                cfg.p_d = p_d;
                if p_d == 0.0 {
                    cfg.trials = 1;
                }
                runs.push((format!("pd{p_d}"), cfg));
            }
        }
        Preset::Fig4 => {
            for p in [1.0, 0.9, 0.8, 0.7, 0.6] {
                for p_d in [0.0, 0.0002, 0.001, 0.01, 0.5] {
                    let mut cfg = base(10, master_seed);
                    cfg.p = p;
                    cfg.p_d = p_d;
                    runs.push((format!("p{p:.2}_pd{p_d}"), cfg));
                }
            }
        }
        Preset::Fig5 => {
            for p in (1..=10).rev().map(|k| k as f64 / 10.0) {
                for p_d in [0.0, 0.0002, 0.001, 0.01, 0.5] {
                    let mut cfg = base(10, master_seed);
                    edge(&mut cfg);
                    cfg.t_b = Some(2);
                    cfg.p = p;
                    cfg.p_d = p_d;
                    runs.push((format!("p{p:.2}_pd{p_d}"), cfg));
                }
            }
        }
    }
    if let Some(n) = trials {
        for (_, cfg) in &mut runs {
            cfg.trials = n;
        }
    }
    runs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escape_presets_use_edge_starts_and_their_boundaries() {
        let fig1 = configs(Preset::Fig1, 0, None);
        assert_eq!(fig1.len(), 2);
        for (_, cfg) in &fig1 {
            assert_eq!(cfg.t_max, 20);
            assert_eq!(cfg.x0, Position::new(-20, 0));
            assert_eq!(cfg.t_b, Some(4));
        }
        assert_eq!(fig1[0].1.p_d, 0.0);
        assert_eq!(fig1[1].1.p_d, 0.5);

        let fig2 = configs(Preset::Fig2, 0, None);
        let ps: Vec<f64> = fig2.iter().map(|(_, c)| c.p).collect();
        assert_eq!(ps, vec![1.0, 0.9, 0.8, 0.7, 0.7]);
        assert!(fig2.iter().all(|(_, c)| c.t_max == 15 && c.t_b == Some(4)));
        assert_eq!(fig2.last().unwrap().1.p_d, 0.5);

        let fig5 = configs(Preset::Fig5, 0, None);
        assert_eq!(fig5.len(), 50);
        assert!(fig5
            .iter()
            .all(|(_, c)| c.t_b == Some(2) && c.t_max == 10 && c.x0 == Position::new(-10, 0)));
    }

    #[test]
    fn distribution_presets_start_from_the_asymmetric_origin_state() {
        for preset in [Preset::Fig3, Preset::Fig4] {
            for (_, cfg) in configs(preset, 0, None) {
                assert_eq!(cfg.t_max, 10);
                assert_eq!(cfg.x0, Position::origin());
                assert_eq!(cfg.c0, [CoinValue::Plus, CoinValue::Plus]);
            }
        }
        assert_eq!(configs(Preset::Fig3, 0, None).len(), 3);
        assert_eq!(configs(Preset::Fig4, 0, None).len(), 25);
    }

    #[test]
    fn trials_override_applies_everywhere() {
        for (_, cfg) in configs(Preset::Fig4, 0, Some(77)) {
            assert_eq!(cfg.trials, 77);
        }
    }

    #[test]
    fn every_preset_config_validates() {
        for preset in [
            Preset::Fig1,
            Preset::Fig2,
            Preset::Fig3,
            Preset::Fig4,
            Preset::Fig5,
        ] {
            for (label, cfg) in configs(preset, 9, None) {
                cfg.validate().unwrap_or_else(|e| panic!("{label}: {e}"));
            }
        }
    }
}
