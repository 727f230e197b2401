//! Position distributions and the two walk metrics: variance and escape
//! probability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Dim, Extent, Position};
use crate::walk::NORM_TOLERANCE;

/// Probability over lattice sites at one time step, `P(x)` or `P(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    extent: Extent,
    time: u32,
    probs: Vec<f64>,
}

impl Distribution {
    pub(crate) fn from_parts(extent: Extent, time: u32, probs: Vec<f64>) -> Distribution {
        debug_assert_eq!(probs.len(), extent.n_sites());
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < NORM_TOLERANCE);
        Distribution {
            extent,
            time,
            probs,
        }
    }

    /// Build from explicit per-site probabilities; must sum to one.
    pub fn new(extent: Extent, time: u32, probs: Vec<f64>) -> Result<Distribution> {
        if probs.len() != extent.n_sites() {
            return Err(Error::ExtentMismatch(format!(
                "{} probabilities for {} sites",
                probs.len(),
                extent.n_sites()
            )));
        }
        if probs.iter().any(|p| *p < 0.0) {
            return Err(Error::InvalidConfig(
                "negative probability in distribution".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidConfig(format!(
                "distribution sums to {total}, expected 1"
            )));
        }
        Ok(Distribution {
            extent,
            time,
            probs,
        })
    }

    pub fn extent(&self) -> &Extent {
        &self.extent
    }

    pub fn time(&self) -> u32 {
        self.time
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob_at(&self, pos: Position) -> f64 {
        self.extent.site_index(pos).map_or(0.0, |i| self.probs[i])
    }

    /// `(position, probability)` pairs in site order.
    pub fn iter(&self) -> impl Iterator<Item = (Position, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| (self.extent.position_of(i), *p))
    }

    /// Site of maximum probability (first in site order on ties).
    pub fn argmax(&self) -> Position {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        self.extent.position_of(best)
    }

    /// Marginal over one axis (`0 = x`, `1 = y`), as `(coordinate, mass)`.
    pub fn marginal(&self, axis: usize) -> Vec<(i32, f64)> {
        let range = self.extent.axis(axis);
        let mut out: Vec<(i32, f64)> = (range.lo..=range.hi).map(|c| (c, 0.0)).collect();
        for (pos, p) in self.iter() {
            out[(pos.axis(axis) - range.lo) as usize].1 += p;
        }
        out
    }
}

/// Escape boundary, expressed as an offset from the left edge of the
/// nominal lattice: the line sits at `x = -t_max + t_b`, and a walker has
/// escaped when strictly beyond it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Boundary {
    pub t_b: u32,
}

impl Boundary {
    pub fn new(t_b: u32) -> Boundary {
        Boundary { t_b }
    }

    /// Boundary coordinate on the x axis for a lattice of half-width `t_max`.
    pub fn threshold(&self, t_max: u32) -> i32 {
        -(t_max as i32) + self.t_b as i32
    }
}

/// Extract `P(x) = Σ_c γ²` per site. Equivalent to
/// [`crate::walk::WalkState::distribution`]; provided as a free function to
/// mirror the metric names.
pub fn distribution(state: &crate::walk::WalkState) -> Distribution {
    state.distribution()
}

/// Spread of the walker: `σ² = Σ p_i (i - μ)²` over physical coordinates in
/// 1D; the sum of the marginal variances `Var(x) + Var(y)` (trace of the
/// covariance) in 2D.
pub fn variance(dist: &Distribution) -> f64 {
    match dist.extent().dim() {
        Dim::One => marginal_variance(&dist.marginal(0)),
        Dim::Two => marginal_variance(&dist.marginal(0)) + marginal_variance(&dist.marginal(1)),
    }
}

fn marginal_variance(masses: &[(i32, f64)]) -> f64 {
    let mean: f64 = masses.iter().map(|(c, p)| *c as f64 * p).sum();
    masses
        .iter()
        .map(|(c, p)| {
            let d = *c as f64 - mean;
            p * d * d
        })
        .sum()
}

/// Probability mass strictly beyond the boundary: `Σ_{x > -t_max + t_b} Σ_y
/// P(x, y)`. Errors if the boundary lies outside the nominal lattice.
pub fn escape_probability(dist: &Distribution, boundary: Boundary) -> Result<f64> {
    let t_max = dist.extent().t_max();
    if boundary.t_b > 2 * t_max {
        return Err(Error::InvalidConfig(format!(
            "boundary offset {} beyond the lattice width {}",
            boundary.t_b,
            2 * t_max
        )));
    }
    let threshold = boundary.threshold(t_max);
    Ok(dist
        .iter()
        .filter(|(pos, _)| pos.x > threshold)
        .map(|(_, p)| p)
        .sum())
}

/// Experiment metadata attached to metric time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsMeta {
    pub p: f64,
    pub p_d: f64,
    pub t_max: u32,
    pub t_b: Option<u32>,
    pub trials: u64,
}

/// Per-time-step metric curves for one run or ensemble. `p_esc` arrays are
/// empty when no boundary was configured; standard errors are zero for a
/// single trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub meta: MetricsMeta,
    /// σ² after steps 1..=n.
    pub variance: Vec<f64>,
    pub stderr_variance: Vec<f64>,
    /// Escape probability after steps 1..=n (empty without a boundary).
    pub p_esc: Vec<f64>,
    pub stderr_p_esc: Vec<f64>,
}

impl MetricSeries {
    /// Number of recorded steps.
    pub fn len(&self) -> usize {
        self.variance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variance.is_empty()
    }

    /// Metrics of a single deterministic trajectory (zero standard errors).
    pub fn from_trajectory(
        meta: MetricsMeta,
        dists: &[Distribution],
        boundary: Option<Boundary>,
    ) -> Result<MetricSeries> {
        let variance_series: Vec<f64> = dists.iter().map(variance).collect();
        let mut p_esc = Vec::new();
        if let Some(b) = boundary {
            for d in dists {
                p_esc.push(escape_probability(d, b)?);
            }
        }
        let n = variance_series.len();
        Ok(MetricSeries {
            meta,
            stderr_variance: vec![0.0; n],
            stderr_p_esc: vec![0.0; p_esc.len()],
            variance: variance_series,
            p_esc,
        })
    }
}
