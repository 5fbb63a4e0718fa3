//! Soft-constraint scoring and selection of the best surviving lattice.

use crate::lattice::{Trajectory, TrajectorySamples};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("cannot score an empty sample series")]
    EmptySamples,
    #[error("no trajectory survived the hard constraints")]
    NoFeasibleTrajectory,
    #[error("cost weights must be nonnegative and not all zero")]
    InvalidWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostWeights {
    /// Lateral offset to the target lane.
    pub offset: f64,
    /// Speed error.
    pub speed: f64,
    pub accel: f64,
    pub jerk: f64,
    pub yaw_rate: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self { offset: 1.0, speed: 0.5, accel: 0.1, jerk: 0.05, yaw_rate: 0.1 }
    }
}

impl CostWeights {
    pub fn validate(&self) -> Result<(), CostError> {
        let w = [self.offset, self.speed, self.accel, self.jerk, self.yaw_rate];
        if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) || w.iter().all(|x| *x == 0.0) {
            return Err(CostError::InvalidWeights);
        }
        Ok(())
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            offset: self.offset * k,
            speed: self.speed * k,
            accel: self.accel * k,
            jerk: self.jerk * k,
            yaw_rate: self.yaw_rate * k,
        }
    }
}

/// Unweighted per-term means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostTerms {
    pub offset: f64,
    pub speed: f64,
    pub accel: f64,
    pub jerk: f64,
    pub yaw_rate: f64,
}

impl CostTerms {
    pub fn weighted(&self, w: &CostWeights) -> f64 {
        w.offset * self.offset + w.speed * self.speed + w.accel * self.accel + w.jerk * self.jerk + w.yaw_rate * self.yaw_rate
    }
}

fn mean_sq(xs: impl Iterator<Item = f64>, n: usize) -> f64 {
    xs.map(|x| x * x).sum::<f64>() / n as f64
}

pub fn cost_terms(samples: &TrajectorySamples, d_des: f64, v_des: f64) -> Result<CostTerms, CostError> {
    let n = samples.len();
    if n == 0 {
        return Err(CostError::EmptySamples);
    }
    Ok(CostTerms {
        offset: mean_sq(samples.d.iter().map(|d| d - d_des), n),
        speed: mean_sq(samples.v.iter().map(|v| v - v_des), n),
        accel: mean_sq(samples.a.iter().copied(), n),
        jerk: mean_sq(samples.jerk.iter().copied(), n),
        yaw_rate: mean_sq(samples.yaw_rate.iter().copied(), n),
    })
}

/// Weighted sum of mean squared residuals over the samples.
pub fn trajectory_cost(samples: &TrajectorySamples, weights: &CostWeights, d_des: f64, v_des: f64) -> Result<f64, CostError> {
    Ok(cost_terms(samples, d_des, v_des)?.weighted(weights))
}

const TIE_EPS: f64 = 1e-12;

/// Index of the minimum-cost entry. Near-equal costs are ordered by shorter
/// arrival time, then by terminal distance to `d_des`, then by position.
pub fn select_optimal_index(scored: &[(&Trajectory, f64)], d_des: f64) -> Result<usize, CostError> {
    let key_cmp = |a: &(&Trajectory, f64), b: &(&Trajectory, f64)| -> Ordering {
        let scale = a.1.abs().max(b.1.abs()).max(1.0);
        if (a.1 - b.1).abs() > TIE_EPS * scale {
            return a.1.total_cmp(&b.1);
        }
        a.0.terminal
            .t_f
            .total_cmp(&b.0.terminal.t_f)
            .then_with(|| (a.0.terminal.d_f - d_des).abs().total_cmp(&(b.0.terminal.d_f - d_des).abs()))
    };
    let mut best: Option<usize> = None;
    for i in 0..scored.len() {
        match best {
            Some(b) if key_cmp(&scored[i], &scored[b]) != Ordering::Less => {}
            _ => best = Some(i),
        }
    }
    best.ok_or(CostError::NoFeasibleTrajectory)
}

pub fn select_optimal(scored: &[(Trajectory, f64)], d_des: f64) -> Result<Trajectory, CostError> {
    let refs: Vec<(&Trajectory, f64)> = scored.iter().map(|(t, c)| (t, *c)).collect();
    select_optimal_index(&refs, d_des).map(|i| scored[i].0.clone())
}
