//! Ensembles of stochastic trajectories over random lattices and dephasing
//! masks.
//!
//! Trials are embarrassingly parallel. Trial `k` owns RNG stream `k` of the
//! master seed and draws, in order: the lattice (one uniform per site, when
//! resampling per trial), then one mask per step. Aggregation is chunked
//! compensated summation merged in fixed chunk order, so ensemble results
//! are bit-identical for every thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dephasing::DephasingSpec;
use crate::error::{Error, Result};
use crate::geometry::{CoinPair, CoinValue, Dim, Extent, InitialState, Position};
use crate::lattice::CoinLattice;
use crate::metrics::{self, Boundary, Distribution, MetricSeries, MetricsMeta};
use crate::oracle::DensityMatrix;
use crate::rng::{batch_stream, derive_seed, trial_stream};
use crate::walk::WalkState;

/// Trials per accumulation chunk. Fixed so the reduction tree never depends
/// on the thread count.
pub const TRIAL_CHUNK: u64 = 50;

/// Whether ensemble trials share one lattice or draw a fresh one each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeMode {
    /// Every trial samples its own lattice (the default: ensembles average
    /// over many random lattices).
    ResamplePerTrial,
    /// One lattice, drawn from the batch stream, shared by every trial.
    FixedPerBatch,
}

/// Full description of one ensemble run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: Dim,
    pub t_max: u32,
    pub steps: u32,
    /// Start site; defaults to the origin.
    #[serde(default = "Position::origin")]
    pub x0: Position,
    /// Start coin per axis; defaults to `(+1, +1)`.
    #[serde(default = "default_coins")]
    pub c0: CoinPair,
    /// Site-open probability (congestion is `1 - p`).
    #[serde(default = "one")]
    pub p: f64,
    /// Per-step, per-basis-state sign-flip probability.
    #[serde(default)]
    pub p_d: f64,
    /// Escape boundary offset from the left lattice edge, if escape
    /// probability is wanted.
    #[serde(default)]
    pub t_b: Option<u32>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_lattice_mode")]
    pub lattice_mode: LatticeMode,
    #[serde(default)]
    pub master_seed: u64,
}

fn one() -> f64 {
    1.0
}

fn default_coins() -> CoinPair {
    [CoinValue::Plus, CoinValue::Plus]
}

fn default_trials() -> u64 {
    1000
}

fn default_lattice_mode() -> LatticeMode {
    LatticeMode::ResamplePerTrial
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_max == 0 || self.t_max > 1 << 20 {
            return Err(Error::InvalidConfig(format!(
                "t_max out of range: {}",
                self.t_max
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be positive".into()));
        }
        for (name, v) in [("p", self.p), ("p_d", self.p_d)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        if let Some(t_b) = self.t_b {
            if t_b > 2 * self.t_max {
                return Err(Error::InvalidConfig(format!(
                    "boundary offset {t_b} beyond the lattice width {}",
                    2 * self.t_max
                )));
            }
        }
        self.extent()?;
        Ok(())
    }

    /// The allocated state space for this run.
    pub fn extent(&self) -> Result<Extent> {
        Extent::for_walk(self.dim, self.t_max, self.x0, self.steps)
    }

    pub fn initial_state(&self) -> InitialState {
        let mut c0 = self.c0;
        if self.dim == Dim::One {
            c0[1] = CoinValue::Plus;
        }
        InitialState { x0: self.x0, c0 }
    }

    pub fn dephasing(&self) -> Result<DephasingSpec> {
        DephasingSpec::new(self.p_d)
    }

    pub fn boundary(&self) -> Option<Boundary> {
        self.t_b.map(Boundary::new)
    }

    /// Sites that are never defects: the start site.
    pub fn protected(&self) -> Vec<Position> {
        vec![self.x0]
    }

    pub fn metrics_meta(&self) -> MetricsMeta {
        MetricsMeta {
            p: self.p,
            p_d: self.p_d,
            t_max: self.t_max,
            t_b: self.t_b,
            trials: self.trials,
        }
    }
}

/// Ensemble averages: per-step mean distributions and metric curves with
/// standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub config: ExperimentConfig,
    /// Mean distribution after steps 1..=steps.
    pub distributions: Vec<Distribution>,
    pub series: MetricSeries,
}

impl EnsembleResult {
    /// Mean distribution at the final step.
    pub fn final_distribution(&self) -> &Distribution {
        self.distributions.last().expect("steps >= 1")
    }
}

/// Compensated (Kahan) accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    fn merge(&mut self, other: &Kahan) {
        self.add(other.sum);
        self.add(other.c);
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

struct ChunkAccum {
    trials: u64,
    /// steps × n_sites mean-distribution sums.
    dist: Vec<Kahan>,
    var_sum: Vec<Kahan>,
    var_sq: Vec<Kahan>,
    esc_sum: Vec<Kahan>,
    esc_sq: Vec<Kahan>,
}

impl ChunkAccum {
    fn new(steps: usize, n_sites: usize, with_escape: bool) -> ChunkAccum {
        let esc_len = if with_escape { steps } else { 0 };
        ChunkAccum {
            trials: 0,
            dist: vec![Kahan::default(); steps * n_sites],
            var_sum: vec![Kahan::default(); steps],
            var_sq: vec![Kahan::default(); steps],
            esc_sum: vec![Kahan::default(); esc_len],
            esc_sq: vec![Kahan::default(); esc_len],
        }
    }

    fn record(&mut self, step: usize, dist: &Distribution, var: f64, esc: Option<f64>) {
        let n_sites = dist.probs().len();
        let base = step * n_sites;
        for (i, p) in dist.probs().iter().enumerate() {
            self.dist[base + i].add(*p);
        }
        self.var_sum[step].add(var);
        self.var_sq[step].add(var * var);
        if let Some(e) = esc {
            self.esc_sum[step].add(e);
            self.esc_sq[step].add(e * e);
        }
    }

    fn merge(&mut self, other: &ChunkAccum) {
        self.trials += other.trials;
        for (a, b) in self.dist.iter_mut().zip(&other.dist) {
            a.merge(b);
        }
        for (dst, src) in [
            (&mut self.var_sum, &other.var_sum),
            (&mut self.var_sq, &other.var_sq),
            (&mut self.esc_sum, &other.esc_sum),
            (&mut self.esc_sq, &other.esc_sq),
        ] {
            for (a, b) in dst.iter_mut().zip(src) {
                a.merge(b);
            }
        }
    }
}

fn mean_and_stderr(sum: &[Kahan], sq: &[Kahan], n: u64) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let means: Vec<f64> = sum.iter().map(|k| k.value() / nf).collect();
    let stderrs: Vec<f64> = sum
        .iter()
        .zip(sq)
        .map(|(s, q)| {
            if n < 2 {
                return 0.0;
            }
            let mean = s.value() / nf;
            let var = ((q.value() / nf) - mean * mean).max(0.0) * nf / (nf - 1.0);
            (var / nf).sqrt()
        })
        .collect();
    (means, stderrs)
}

/// Run one trajectory of `config` on the stream of trial `k`, recording its
/// per-step distribution into `out`. The caller provides the lattice for
/// fixed-batch mode.
fn run_trial(
    config: &ExperimentConfig,
    extent: Extent,
    fixed: Option<&CoinLattice>,
    trial: u64,
    mut on_step: impl FnMut(usize, &Distribution) -> Result<()>,
) -> Result<()> {
    let mut rng = trial_stream(config.master_seed, trial);
    let owned;
    let lattice = match fixed {
        Some(l) => l,
        None => {
            owned = CoinLattice::generate(extent, config.p, &config.protected(), &mut rng)?;
            &owned
        }
    };
    let deph = config.dephasing()?;
    let mut state = WalkState::new(extent, &config.initial_state())?;
    for t in 0..config.steps as usize {
        state.evolve_step(lattice, &deph, &mut rng)?;
        let dist = state.distribution();
        on_step(t, &dist)?;
    }
    Ok(())
}

/// Execute `config.trials` independent trajectories and average them.
pub fn run(config: &ExperimentConfig) -> Result<EnsembleResult> {
    config.validate()?;
    let extent = config.extent()?;
    let steps = config.steps as usize;
    let n_sites = extent.n_sites();
    let boundary = config.boundary();

    let fixed = match config.lattice_mode {
        LatticeMode::ResamplePerTrial => None,
        LatticeMode::FixedPerBatch => Some(CoinLattice::generate(
            extent,
            config.p,
            &config.protected(),
            &mut batch_stream(config.master_seed),
        )?),
    };

    let n_chunks = config.trials.div_ceil(TRIAL_CHUNK);
    let chunks: Vec<ChunkAccum> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * TRIAL_CHUNK;
            let hi = (lo + TRIAL_CHUNK).min(config.trials);
            let mut acc = ChunkAccum::new(steps, n_sites, boundary.is_some());
            for trial in lo..hi {
                run_trial(config, extent, fixed.as_ref(), trial, |t, dist| {
                    let var = metrics::variance(dist);
                    let esc = match boundary {
                        Some(b) => Some(metrics::escape_probability(dist, b)?),
                        None => None,
                    };
                    acc.record(t, dist, var, esc);
                    Ok(())
                })?;
                acc.trials += 1;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut total = ChunkAccum::new(steps, n_sites, boundary.is_some());
    for chunk in &chunks {
        total.merge(chunk);
    }
    debug_assert_eq!(total.trials, config.trials);

    let nf = total.trials as f64;
    let mut distributions = Vec::with_capacity(steps);
    for t in 0..steps {
        let probs: Vec<f64> = total.dist[t * n_sites..(t + 1) * n_sites]
            .iter()
            .map(|k| k.value() / nf)
            .collect();
        distributions.push(Distribution::new(extent, (t + 1) as u32, probs)?);
    }
    let (variance, stderr_variance) = mean_and_stderr(&total.var_sum, &total.var_sq, total.trials);
    let (p_esc, stderr_p_esc) = mean_and_stderr(&total.esc_sum, &total.esc_sq, total.trials);
    Ok(EnsembleResult {
        config: config.clone(),
        distributions,
        series: MetricSeries {
            meta: config.metrics_meta(),
            variance,
            stderr_variance,
            p_esc,
            stderr_p_esc,
        },
    })
}

/// Run every configuration of a parameter grid. Grid point `i` runs under
/// the derived seed `derive_seed(master_seed, i)`, so points are
/// statistically independent even when configured with one master seed.
pub fn sweep(configs: &[ExperimentConfig]) -> Result<Vec<EnsembleResult>> {
    if configs.is_empty() {
        return Err(Error::EmptySweep);
    }
    configs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut derived = c.clone();
            derived.master_seed = derive_seed(c.master_seed, i as u64);
            run(&derived)
        })
        .collect()
}

/// Trajectory-averaged estimate of the final mixed state: the mean of
/// `|ψ⟩⟨ψ|` over trials, snapshot at each requested trial count.
///
/// Checkpoints must be ascending multiples of [`TRIAL_CHUNK`]; the run
/// executes `max(checkpoints)` trials regardless of `config.trials`.
pub fn estimate_density_at(
    config: &ExperimentConfig,
    checkpoints: &[u64],
) -> Result<Vec<DensityMatrix>> {
    config.validate()?;
    if checkpoints.is_empty() {
        return Err(Error::InvalidConfig("no density checkpoints".into()));
    }
    for w in checkpoints.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidConfig(
                "density checkpoints must be ascending".into(),
            ));
        }
    }
    for ck in checkpoints {
        if *ck == 0 || ck % TRIAL_CHUNK != 0 {
            return Err(Error::InvalidConfig(format!(
                "density checkpoints must be positive multiples of {TRIAL_CHUNK}"
            )));
        }
    }
    let extent = config.extent()?;
    let m = extent.basis_len();
    let total_trials = *checkpoints.last().unwrap();

    let fixed = match config.lattice_mode {
        LatticeMode::ResamplePerTrial => None,
        LatticeMode::FixedPerBatch => Some(CoinLattice::generate(
            extent,
            config.p,
            &config.protected(),
            &mut batch_stream(config.master_seed),
        )?),
    };

    let deph = config.dephasing()?;
    let n_chunks = total_trials / TRIAL_CHUNK;
    let chunks: Vec<Vec<Kahan>> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let mut acc = vec![Kahan::default(); m * m];
            for trial in ci * TRIAL_CHUNK..(ci + 1) * TRIAL_CHUNK {
                let mut rng = trial_stream(config.master_seed, trial);
                let owned;
                let lattice = match fixed.as_ref() {
                    Some(l) => l,
                    None => {
                        owned =
                            CoinLattice::generate(extent, config.p, &config.protected(), &mut rng)?;
                        &owned
                    }
                };
                let mut state = WalkState::new(extent, &config.initial_state())?;
                for _ in 0..config.steps {
                    state.evolve_step(lattice, &deph, &mut rng)?;
                }
                let amps = state.amplitudes();
                for i in 0..m {
                    let ai = amps[i];
                    if ai == 0.0 {
                        continue;
                    }
                    for j in 0..m {
                        acc[i * m + j].add(ai * amps[j]);
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut snapshots = Vec::with_capacity(checkpoints.len());
    let mut total = vec![Kahan::default(); m * m];
    let mut next = 0;
    for (ci, chunk) in chunks.iter().enumerate() {
        for (a, b) in total.iter_mut().zip(chunk) {
            a.merge(b);
        }
        let done = (ci as u64 + 1) * TRIAL_CHUNK;
        if next < checkpoints.len() && done == checkpoints[next] {
            let nf = done as f64;
            let data = nalgebra::DMatrix::from_fn(m, m, |i, j| total[i * m + j].value() / nf);
            snapshots.push(DensityMatrix::from_matrix(extent, config.steps, data));
            next += 1;
        }
    }
    Ok(snapshots)
}
