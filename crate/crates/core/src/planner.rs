//! One motion-planning cycle: generate, sample, filter, score, select.

use crate::behavior::{ManeuverCommand, WorldView};
use crate::constraints::{
    clearance_polynomial, collision_verdict, filter_hard_constraints, predict_obstacles, Candidate, ConstraintError, HardLimits,
    ObstaclePrediction,
};
use crate::cost::{select_optimal_index, trajectory_cost, CostError, CostWeights};
use crate::geometry::{FrenetState, ReferencePath};
use crate::lattice::{generate_lattices, sample_trajectory, LatticeError, TerminalGrid, Terminal, Trajectory, TrajectorySamples};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub grid: TerminalGrid,
    pub limits: HardLimits,
    pub weights: CostWeights,
    /// Deceleration of the in-lane fallback when nothing is feasible, m/s^2.
    pub fallback_decel: f64,
    /// Horizon of the fallback, s.
    pub fallback_horizon: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            grid: TerminalGrid::default(),
            limits: HardLimits::default(),
            weights: CostWeights::default(),
            fallback_decel: 2.0,
            fallback_horizon: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub trajectory: Trajectory,
    pub samples: TrajectorySamples,
    pub cost: Option<f64>,
    /// Lattices generated this cycle.
    pub candidates: usize,
    /// Lattices that passed the hard constraints.
    pub feasible: usize,
    pub fallback: bool,
}

/// Brakes at `decel` toward the current lane center.
pub fn fallback_trajectory(start: &FrenetState, view: &WorldView, cfg: &PlannerConfig, decel: f64) -> Result<Trajectory, LatticeError> {
    let t_f = cfg.fallback_horizon;
    let d_f = view.layout.lane_center(view.layout.lane_of(start.d));
    let v_f = (start.s_dot - decel * t_f).max(0.0);
    Trajectory::new(start, Terminal { t_f, d_f, v_f })
}

fn min_clearance(traj: &Trajectory, obs: &ObstaclePrediction, limits: &HardLimits, dt: f64) -> f64 {
    let poly = clearance_polynomial(traj, obs, limits.r_c, limits.longitudinal_scale);
    let n = (traj.horizon / dt).ceil() as usize;
    (0..=n).map(|i| poly.eval((i as f64 * dt).min(traj.horizon))).fold(f64::INFINITY, f64::min)
}

/// Braking levels tried in order: the nominal fallback deceleration,
/// doubling up to the acceleration limit.
fn fallback_decels(cfg: &PlannerConfig) -> Vec<f64> {
    let top = cfg.limits.a_max.max(cfg.fallback_decel);
    let mut out = vec![cfg.fallback_decel];
    while *out.last().expect("nonempty") < top {
        out.push((out.last().expect("nonempty") * 2.0).min(top));
    }
    out
}

/// Plans from `start` (the state the new trajectory must continue from)
/// against the obstacles in `view`.
pub fn plan(
    start: &FrenetState,
    command: &ManeuverCommand,
    view: &WorldView,
    path: &ReferencePath,
    cfg: &PlannerConfig,
    dt: f64,
) -> Result<Plan, PlanError> {
    let lattices = generate_lattices(start, command, &cfg.grid, &view.layout, cfg.limits.v_max)?;
    let candidates_n = lattices.len();
    let mut candidates = Vec::with_capacity(candidates_n);
    for traj in lattices {
        // Lattices that run off the mapped route are simply not candidates.
        if let Ok(samples) = sample_trajectory(&traj, path, dt) {
            candidates.push(Candidate { trajectory: traj, samples });
        }
    }
    let horizon = cfg.grid.max_arrival_time().max(cfg.fallback_horizon);
    let obstacles: Vec<(usize, FrenetState)> = view.others.iter().map(|o| (o.id, o.state)).collect();
    let predictions = predict_obstacles(&obstacles, horizon);
    let survivors = filter_hard_constraints(candidates, &predictions, &cfg.limits)?;
    let feasible = survivors.len();

    let mut scored = Vec::with_capacity(feasible);
    for c in &survivors {
        scored.push((&c.trajectory, trajectory_cost(&c.samples, &cfg.weights, command.d_des, command.v_des)?));
    }
    let best = match select_optimal_index(&scored, command.d_des) {
        Ok(i) => Some((i, scored[i].1)),
        Err(CostError::NoFeasibleTrajectory) => None,
        Err(e) => return Err(e.into()),
    };

    match best {
        Some((i, j)) => {
            let c = survivors.into_iter().nth(i).expect("index from enumeration");
            Ok(Plan { trajectory: c.trajectory, samples: c.samples, cost: Some(j), candidates: candidates_n, feasible, fallback: false })
        }
        None => {
            // The gentlest braking that clears every obstacle. When none
            // does (a threat from behind), the level keeping the most room,
            // holding speed included.
            let mut best: Option<(Trajectory, f64)> = None;
            let mut chosen = None;
            for decel in fallback_decels(cfg).into_iter().chain([0.0]) {
                let trajectory = fallback_trajectory(start, view, cfg, decel)?;
                let mut room = f64::INFINITY;
                let mut clear = true;
                for obs in &predictions {
                    clear &= collision_verdict(&trajectory, obs, cfg.limits.r_c, cfg.limits.longitudinal_scale)?.is_free();
                    room = room.min(min_clearance(&trajectory, obs, &cfg.limits, dt));
                }
                if clear && decel > 0.0 {
                    chosen = Some(trajectory);
                    break;
                }
                if best.as_ref().is_none_or(|(_, r)| room > *r) {
                    best = Some((trajectory, room));
                }
            }
            let trajectory = chosen.or(best.map(|(t, _)| t)).expect("at least one braking level");
            let samples = sample_trajectory(&trajectory, path, dt)?;
            Ok(Plan { trajectory, samples, cost: None, candidates: candidates_n, feasible, fallback: true })
        }
    }
}
