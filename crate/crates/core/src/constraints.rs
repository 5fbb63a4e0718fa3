//! Hard-constraint filtering of candidate lattices.
//!
//! Collision checks work on the clearance polynomial
//! `D(t) = ((s - s_o) / k)^2 + (d - d_o)^2 - r_c^2`, whose roots are the
//! instants the obstacle enters or leaves the collision region around the
//! ego. `k = 1` gives a disc; `k > 1` stretches the region along the road.

use crate::geometry::{golden_section_min, FrenetState};
use crate::lattice::{Polynomial, Trajectory, TrajectorySamples};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstraintError {
    #[error("obstacle {id} is predicted for {available} s but the trajectory lasts {required} s")]
    HorizonMismatch { id: usize, available: f64, required: f64 },
    #[error("invalid limits: {0}")]
    InvalidLimits(&'static str),
}

/// Lateral speeds below this are treated as measurement drift, m/s.
pub const LATERAL_DRIFT_CLAMP: f64 = 0.1;
/// Fallback sampling step for ambiguous clearance polynomials, s.
pub const FALLBACK_STEP: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstaclePrediction {
    pub id: usize,
    pub s_poly: Polynomial,
    pub d_poly: Polynomial,
    /// Time span over which the prediction is valid, s.
    pub horizon: f64,
}

/// Constant-velocity Frenet extrapolation of each obstacle.
pub fn predict_obstacles(obstacles: &[(usize, FrenetState)], horizon: f64) -> Vec<ObstaclePrediction> {
    obstacles
        .iter()
        .map(|(id, st)| {
            let d_rate = if st.d_dot.abs() < LATERAL_DRIFT_CLAMP { 0.0 } else { st.d_dot };
            ObstaclePrediction {
                id: *id,
                s_poly: Polynomial::linear(st.s, st.s_dot),
                d_poly: Polynomial::linear(st.d, d_rate),
                horizon,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HardLimits {
    pub v_min: f64,
    pub v_max: f64,
    pub a_max: f64,
    /// Collision radius, m.
    pub r_c: f64,
    /// Stretch of the collision region along the road.
    pub longitudinal_scale: f64,
}

impl Default for HardLimits {
    fn default() -> Self {
        Self { v_min: 0.0, v_max: 30.0, a_max: 6.0, r_c: 3.0, longitudinal_scale: 1.0 }
    }
}

impl HardLimits {
    pub fn validate(&self) -> Result<(), ConstraintError> {
        if !(self.v_min >= 0.0 && self.v_min < self.v_max) {
            return Err(ConstraintError::InvalidLimits("need 0 <= v_min < v_max"));
        }
        if !(self.a_max > 0.0) {
            return Err(ConstraintError::InvalidLimits("a_max must be positive"));
        }
        if !(self.r_c > 0.0) {
            return Err(ConstraintError::InvalidLimits("r_c must be positive"));
        }
        if !(self.longitudinal_scale >= 1.0) {
            return Err(ConstraintError::InvalidLimits("longitudinal_scale must be at least 1"));
        }
        Ok(())
    }
}

/// Clearance polynomial between a trajectory and an obstacle prediction.
pub fn clearance_polynomial(traj: &Trajectory, obs: &ObstaclePrediction, r_c: f64, longitudinal_scale: f64) -> Polynomial {
    let ds = (&traj.s_poly - &obs.s_poly).scale(1.0 / longitudinal_scale);
    let dd = &traj.d_poly - &obs.d_poly;
    &(&ds.square() + &dd.square()) - &Polynomial::constant(r_c * r_c)
}

/// How a collision verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Overlapping at t = 0.
    InitialOverlap,
    /// No sign change in the clearance coefficients.
    Certified,
    /// Decided by sampling and local refinement.
    Sampled { collision: bool },
}

impl Verdict {
    pub fn is_free(self) -> bool {
        matches!(self, Verdict::Certified | Verdict::Sampled { collision: false })
    }
}

/// Full collision check with the reason for the answer.
pub fn collision_verdict(
    traj: &Trajectory,
    obs: &ObstaclePrediction,
    r_c: f64,
    longitudinal_scale: f64,
) -> Result<Verdict, ConstraintError> {
    if obs.horizon + 1e-9 < traj.horizon {
        return Err(ConstraintError::HorizonMismatch { id: obs.id, available: obs.horizon, required: traj.horizon });
    }
    let clearance = clearance_polynomial(traj, obs, r_c, longitudinal_scale);
    if clearance.eval(0.0) <= 0.0 {
        return Ok(Verdict::InitialOverlap);
    }
    if clearance.sign_changes() == 0 {
        return Ok(Verdict::Certified);
    }
    Ok(Verdict::Sampled { collision: sampled_collision(&clearance, traj.horizon) })
}

/// Samples `D` every [`FALLBACK_STEP`] and refines each discrete local
/// minimum, so dips narrower than the grid are still found.
fn sampled_collision(clearance: &Polynomial, horizon: f64) -> bool {
    let n = (horizon / FALLBACK_STEP).ceil().max(1.0) as usize;
    let step = horizon / n as f64;
    let values: Vec<f64> = (0..=n).map(|i| clearance.eval(i as f64 * step)).collect();
    if values.iter().any(|v| *v <= 0.0) {
        return true;
    }
    for i in 1..n {
        if values[i] <= values[i - 1] && values[i] <= values[i + 1] {
            let lo = (i - 1) as f64 * step;
            let hi = (i + 1) as f64 * step;
            let t = golden_section_min(|t| clearance.eval(t), lo, hi, 1e-7);
            if clearance.eval(t) <= 0.0 {
                return true;
            }
        }
    }
    false
}

/// Disc collision check; `true` means no collision over the horizon.
pub fn collision_free(traj: &Trajectory, obs: &ObstaclePrediction, r_c: f64) -> Result<bool, ConstraintError> {
    Ok(collision_verdict(traj, obs, r_c, 1.0)?.is_free())
}

/// A lattice together with its sampled series.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub trajectory: Trajectory,
    pub samples: TrajectorySamples,
}

/// Whether every sample respects the speed and acceleration bounds.
pub fn within_dynamic_limits(samples: &TrajectorySamples, limits: &HardLimits) -> bool {
    samples.v.iter().all(|v| *v >= limits.v_min - 1e-9 && *v <= limits.v_max + 1e-9)
        && samples.a.iter().all(|a| *a <= limits.a_max)
}

pub fn passes_hard_constraints(
    candidate: &Candidate,
    predictions: &[ObstaclePrediction],
    limits: &HardLimits,
) -> Result<bool, ConstraintError> {
    if !within_dynamic_limits(&candidate.samples, limits) {
        return Ok(false);
    }
    for obs in predictions {
        if !collision_verdict(&candidate.trajectory, obs, limits.r_c, limits.longitudinal_scale)?.is_free() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Keeps candidates that are collision-free against every prediction and
/// within the dynamic limits. Input order is preserved.
pub fn filter_hard_constraints(
    candidates: Vec<Candidate>,
    predictions: &[ObstaclePrediction],
    limits: &HardLimits,
) -> Result<Vec<Candidate>, ConstraintError> {
    let mut out = Vec::with_capacity(candidates.len());
    for c in candidates {
        if passes_hard_constraints(&c, predictions, limits)? {
            out.push(c);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Terminal;

    fn poly_trajectory(s: Vec<f64>, d: Vec<f64>, horizon: f64) -> Trajectory {
        Trajectory {
            s_poly: Polynomial::new(s),
            d_poly: Polynomial::new(d),
            horizon,
            terminal: Terminal { t_f: horizon, d_f: 0.0, v_f: 0.0 },
        }
    }

    fn obstacle(s0: f64, v: f64, d0: f64, horizon: f64) -> ObstaclePrediction {
        predict_obstacles(&[(7, FrenetState { s: s0, s_dot: v, d: d0, ..Default::default() })], horizon).remove(0)
    }

    #[test]
    fn linear_extrapolation_and_drift_clamp() {
        let p = obstacle(100.0, 10.0, 1.75, 5.0);
        assert_eq!(p.s_poly.eval(3.0), 130.0);
        let st = FrenetState { s: 50.0, d: 5.25, d_dot: 0.05, ..Default::default() };
        let p = predict_obstacles(&[(1, st)], 5.0).remove(0);
        assert_eq!(p.s_poly.eval(4.0), 50.0);
        assert_eq!(p.d_poly.eval(4.0), 5.25);
    }

    #[test]
    fn parallel_lanes_are_certified_free() {
        let traj = poly_trajectory(vec![0.0, 25.0], vec![0.0], 5.0);
        let obs = obstacle(-20.0, 25.0, 5.0, 5.0);
        assert_eq!(collision_verdict(&traj, &obs, 2.0, 1.0).unwrap(), Verdict::Certified);
        // Different speeds are ambiguous for the sign rule but still clear.
        let obs = obstacle(-20.0, 30.0, 5.0, 5.0);
        assert_eq!(collision_verdict(&traj, &obs, 2.0, 1.0).unwrap(), Verdict::Sampled { collision: false });
    }

    #[test]
    fn identical_start_collides() {
        let traj = poly_trajectory(vec![10.0, 20.0], vec![1.0], 5.0);
        let obs = obstacle(10.0, 20.0, 1.0, 5.0);
        assert!(!collision_free(&traj, &obs, 3.0).unwrap());
    }

    #[test]
    fn rear_end_in_same_lane_is_found() {
        let traj = poly_trajectory(vec![0.0, 20.0], vec![0.0], 6.0);
        let obs = obstacle(50.0, 10.0, 0.0, 6.0);
        assert!(!collision_free(&traj, &obs, 2.0).unwrap());
    }

    #[test]
    fn narrow_dip_between_samples_is_refined() {
        // Closest approach at t = 1.005 s, barely inside the radius.
        let traj = poly_trajectory(vec![-40.0 * 1.005, 40.0], vec![0.0], 2.0);
        let obs = obstacle(0.0, 0.0, 0.99, 2.0);
        assert!(!collision_free(&traj, &obs, 1.0).unwrap());
    }

    #[test]
    fn prediction_must_cover_horizon() {
        let traj = poly_trajectory(vec![0.0, 20.0], vec![0.0], 5.0);
        let obs = obstacle(50.0, 10.0, 0.0, 4.0);
        assert!(matches!(collision_free(&traj, &obs, 2.0), Err(ConstraintError::HorizonMismatch { .. })));
    }

    #[test]
    fn limits_validation() {
        assert!(HardLimits::default().validate().is_ok());
        assert!(HardLimits { v_min: 31.0, ..Default::default() }.validate().is_err());
        assert!(HardLimits { r_c: 0.0, ..Default::default() }.validate().is_err());
        assert!(HardLimits { longitudinal_scale: 0.5, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn speed_bound_removes_candidate() {
        let samples = TrajectorySamples { v: vec![28.0, 33.0], a: vec![0.0, 0.0], ..Default::default() };
        assert!(!within_dynamic_limits(&samples, &HardLimits::default()));
        let samples = TrajectorySamples { v: vec![28.0, 29.0], a: vec![0.0, 7.0], ..Default::default() };
        assert!(!within_dynamic_limits(&samples, &HardLimits::default()));
    }
}
