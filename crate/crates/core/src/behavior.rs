//! Long-term maneuver decisions: IDM as adaptive cruise control, MOBIL for
//! lane-change decisions, and the cruising/lane-changing state machine.

use crate::geometry::FrenetState;
use crate::road::LaneLayout;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BehaviorError {
    #[error("gap must be positive, got {0}")]
    NonPositiveGap(f64),
    #[error("lane {lane} is outside the road (1..={lane_count})")]
    InvalidLane { lane: i64, lane_count: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

/// Intelligent Driver Model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IdmParams {
    /// v0, m/s.
    pub desired_speed: f64,
    /// Safe time headway T, s.
    pub time_headway: f64,
    /// Jam distance s0, m.
    pub min_gap: f64,
    /// Maximum acceleration a, m/s^2.
    pub max_accel: f64,
    /// Comfortable deceleration b, m/s^2.
    pub comfort_decel: f64,
    /// Acceleration exponent delta.
    pub accel_exponent: f64,
    /// Output is clamped to `[-emergency_decel, max_accel]`.
    pub emergency_decel: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        Self {
            desired_speed: 30.0,
            time_headway: 1.5,
            min_gap: 2.0,
            max_accel: 1.4,
            comfort_decel: 2.0,
            accel_exponent: 4.0,
            emergency_decel: 8.0,
        }
    }
}

impl IdmParams {
    pub fn validate(&self) -> Result<(), BehaviorError> {
        let positive = [
            ("desired_speed", self.desired_speed),
            ("time_headway", self.time_headway),
            ("min_gap", self.min_gap),
            ("max_accel", self.max_accel),
            ("comfort_decel", self.comfort_decel),
            ("emergency_decel", self.emergency_decel),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(BehaviorError::InvalidParams(format!("idm.{name} must be positive, got {v}")));
            }
        }
        if !(self.accel_exponent >= 1.0) {
            return Err(BehaviorError::InvalidParams(format!(
                "idm.accel_exponent must be >= 1, got {}",
                self.accel_exponent
            )));
        }
        Ok(())
    }

    /// Desired dynamic gap s*.
    pub fn desired_gap(&self, v: f64, closing_speed: f64) -> f64 {
        self.min_gap
            + v * self.time_headway
            + v * closing_speed / (2.0 * (self.max_accel * self.comfort_decel).sqrt())
    }

    /// Steady-state gap behind a leader at the same speed `v` (closed form).
    pub fn equilibrium_gap(&self, v: f64) -> f64 {
        let free = 1.0 - (v / self.desired_speed).powf(self.accel_exponent);
        self.desired_gap(v, 0.0) / free.sqrt()
    }
}

/// IDM acceleration. Pass `f64::INFINITY` as `gap` when there is no leader.
pub fn idm_acceleration(v: f64, gap: f64, lead_v: f64, params: &IdmParams) -> Result<f64, BehaviorError> {
    if !(gap > 0.0) {
        return Err(BehaviorError::NonPositiveGap(gap));
    }
    let v = v.max(0.0);
    let free = (v / params.desired_speed).powf(params.accel_exponent);
    let interaction = if gap.is_infinite() {
        0.0
    } else {
        (params.desired_gap(v, v - lead_v).max(0.0) / gap).powi(2)
    };
    let a = params.max_accel * (1.0 - free - interaction);
    Ok(a.clamp(-params.emergency_decel, params.max_accel))
}

/// IDM with overlapping vehicles mapped to full emergency braking.
fn idm_or_emergency(v: f64, gap: f64, lead_v: f64, params: &IdmParams) -> f64 {
    idm_acceleration(v, gap, lead_v, params).unwrap_or(-params.emergency_decel)
}

/// MOBIL lane-change parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MobilParams {
    pub politeness: f64,
    /// b_safe, m/s^2.
    pub safe_braking: f64,
    /// Delta a_th, m/s^2.
    pub accel_threshold: f64,
    /// Keep-right bias: extra incentive a change to the left must overcome, m/s^2.
    pub bias_right: f64,
}

impl Default for MobilParams {
    fn default() -> Self {
        Self { politeness: 0.5, safe_braking: 4.0, accel_threshold: 0.1, bias_right: 0.3 }
    }
}

impl MobilParams {
    pub fn validate(&self) -> Result<(), BehaviorError> {
        if !(0.0..=1.0).contains(&self.politeness) {
            return Err(BehaviorError::InvalidParams(format!(
                "mobil.politeness must be in [0, 1], got {}",
                self.politeness
            )));
        }
        if !(self.safe_braking > 0.0) {
            return Err(BehaviorError::InvalidParams("mobil.safe_braking must be positive".into()));
        }
        if !(self.accel_threshold >= 0.0) {
            return Err(BehaviorError::InvalidParams("mobil.accel_threshold must be >= 0".into()));
        }
        Ok(())
    }
}

/// A vehicle seen by the ego in road coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackedVehicle {
    pub id: usize,
    pub state: FrenetState,
    pub length: f64,
}

/// Ego state plus surrounding traffic as perceived at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldView {
    pub ego: FrenetState,
    pub ego_length: f64,
    pub others: Vec<TrackedVehicle>,
    pub layout: LaneLayout,
}

impl WorldView {
    pub fn ego_lane(&self) -> usize {
        self.layout.lane_of(self.ego.d)
    }

    /// Leader and follower of the ego among vehicles occupying `lane`.
    pub fn neighbors(&self, lane: usize) -> LaneNeighbors {
        let mut out = LaneNeighbors::default();
        for o in &self.others {
            if !self.layout.occupies(o.state.d, lane) {
                continue;
            }
            let n = Neighbor { s: o.state.s, v: o.state.s_dot, length: o.length };
            if o.state.s >= self.ego.s {
                if out.leader.is_none_or(|l| n.s < l.s) {
                    out.leader = Some(n);
                }
            } else if out.follower.is_none_or(|f| n.s > f.s) {
                out.follower = Some(n);
            }
        }
        out
    }

    pub fn surroundings(&self) -> Surroundings {
        let lanes = (1..=self.layout.lane_count).map(|l| self.neighbors(l)).collect();
        Surroundings {
            layout: self.layout,
            ego_lane: self.ego_lane(),
            ego_length: self.ego_length,
            lanes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    /// Center position along the route, m.
    pub s: f64,
    pub v: f64,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LaneNeighbors {
    pub leader: Option<Neighbor>,
    pub follower: Option<Neighbor>,
}

/// Per-lane leader/follower of the ego.
#[derive(Debug, Clone, PartialEq)]
pub struct Surroundings {
    pub layout: LaneLayout,
    pub ego_lane: usize,
    pub ego_length: f64,
    /// Index 0 is lane 1.
    pub lanes: Vec<LaneNeighbors>,
}

impl Surroundings {
    pub fn empty(layout: LaneLayout, ego_lane: usize, ego_length: f64) -> Self {
        Self { layout, ego_lane, ego_length, lanes: vec![LaneNeighbors::default(); layout.lane_count] }
    }

    pub fn lane(&self, lane: usize) -> Result<&LaneNeighbors, BehaviorError> {
        if !self.layout.is_valid_lane(lane) {
            return Err(BehaviorError::InvalidLane { lane: lane as i64, lane_count: self.layout.lane_count });
        }
        Ok(&self.lanes[lane - 1])
    }

    pub fn set_lane(&mut self, lane: usize, neighbors: LaneNeighbors) {
        self.lanes[lane - 1] = neighbors;
    }
}

/// Bumper-to-bumper gap between a rear and a front vehicle.
fn bumper_gap(rear_s: f64, rear_len: f64, front: &Neighbor) -> f64 {
    front.s - rear_s - 0.5 * (rear_len + front.length)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LaneDecision {
    None,
    Left,
    Right,
}

/// Outcome of the MOBIL criteria for one candidate lane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilAssessment {
    pub safe: bool,
    pub incentive: f64,
    /// Predicted acceleration of the prospective new follower.
    pub new_follower_accel: f64,
}

impl MobilAssessment {
    pub fn passes(&self, mobil: &MobilParams) -> bool {
        self.safe && self.incentive > mobil.accel_threshold
    }
}

/// Evaluates the MOBIL safety and incentive criteria for moving from the
/// ego's current lane to `target_lane`. All predicted accelerations use the
/// ego's own IDM parameters as its model of the surrounding drivers.
pub fn mobil_evaluate(
    ego: &FrenetState,
    surroundings: &Surroundings,
    target_lane: i64,
    idm: &IdmParams,
    mobil: &MobilParams,
) -> Result<MobilAssessment, BehaviorError> {
    let invalid = || BehaviorError::InvalidLane { lane: target_lane, lane_count: surroundings.layout.lane_count };
    if target_lane < 1 || !surroundings.layout.is_valid_lane(target_lane as usize) {
        return Err(invalid());
    }
    let target = *surroundings.lane(target_lane as usize)?;
    let current = *surroundings.lane(surroundings.ego_lane)?;
    let (s_e, v_e, len_e) = (ego.s, ego.s_dot, surroundings.ego_length);

    let accel_behind = |lead: Option<Neighbor>, rear_s: f64, rear_v: f64, rear_len: f64| match lead {
        Some(l) => idm_or_emergency(rear_v, bumper_gap(rear_s, rear_len, &l), l.v, idm),
        None => idm_or_emergency(rear_v, f64::INFINITY, 0.0, idm),
    };
    let ego_as_leader = Neighbor { s: s_e, v: v_e, length: len_e };

    let a_ego = accel_behind(current.leader, s_e, v_e, len_e);
    let a_ego_new = accel_behind(target.leader, s_e, v_e, len_e);
    let mut safe = target.leader.is_none_or(|l| bumper_gap(s_e, len_e, &l) > 0.0);

    let (nf_gain, new_follower_accel) = match target.follower {
        Some(f) => {
            let before = accel_behind(target.leader, f.s, f.v, f.length);
            let gap = bumper_gap(f.s, f.length, &ego_as_leader);
            let after = idm_or_emergency(f.v, gap, v_e, idm);
            safe &= gap > 0.0;
            (after - before, after)
        }
        None => (0.0, 0.0),
    };
    safe &= new_follower_accel >= -mobil.safe_braking;

    let of_gain = match current.follower {
        Some(f) => {
            let before = idm_or_emergency(f.v, bumper_gap(f.s, f.length, &ego_as_leader), v_e, idm);
            let after = accel_behind(current.leader, f.s, f.v, f.length);
            after - before
        }
        None => 0.0,
    };

    let mut incentive = (a_ego_new - a_ego) + mobil.politeness * (nf_gain + of_gain);
    // Keep-right asymmetry: a move to the left must beat the threshold by
    // the bias. Unforced moves to the right are not encouraged, so an empty
    // road never triggers a change.
    if target_lane > surroundings.ego_lane as i64 {
        incentive -= mobil.bias_right;
    }
    Ok(MobilAssessment { safe, incentive, new_follower_accel })
}

/// Returns the side passing both MOBIL criteria with the larger incentive.
pub fn mobil_decide(
    ego: &FrenetState,
    surroundings: &Surroundings,
    idm: &IdmParams,
    mobil: &MobilParams,
) -> Result<LaneDecision, BehaviorError> {
    surroundings.lane(surroundings.ego_lane)?;
    let lane = surroundings.ego_lane as i64;
    let mut best: Option<(LaneDecision, f64)> = None;
    for (decision, target) in [(LaneDecision::Left, lane + 1), (LaneDecision::Right, lane - 1)] {
        if target < 1 || target > surroundings.layout.lane_count as i64 {
            continue;
        }
        let a = mobil_evaluate(ego, surroundings, target, idm, mobil)?;
        if a.passes(mobil) && best.is_none_or(|(_, inc)| a.incentive > inc) {
            best = Some((decision, a.incentive));
        }
    }
    Ok(best.map_or(LaneDecision::None, |(d, _)| d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ManeuverMode {
    StayOnLane,
    LaneChangeLeft,
    LaneChangeRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManeuverCommand {
    pub mode: ManeuverMode,
    pub target_lane: usize,
    /// Target lane center, m.
    pub d_des: f64,
    /// Desired speed, m/s.
    pub v_des: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FsmState {
    Cruising,
    LaneChanging,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BpState {
    pub fsm: FsmState,
    pub active_target_lane: usize,
    /// Time spent in the current lane change, s.
    pub maneuver_time: f64,
}

impl BpState {
    pub fn cruising(lane: usize) -> Self {
        Self { fsm: FsmState::Cruising, active_target_lane: lane, maneuver_time: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BpConfig {
    /// Execution period, s.
    pub period: f64,
    /// Lateral distance to the target center that ends a lane change, m.
    pub completion_threshold: f64,
    /// A lane change not completed after this long is abandoned, s.
    pub abort_after: f64,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self { period: 1.0, completion_threshold: 0.3, abort_after: 10.0 }
    }
}

/// Speed command from IDM toward the leader in `lane`, one BP period ahead.
fn idm_speed_command(view: &WorldView, lane: usize, idm: &IdmParams, cfg: &BpConfig) -> f64 {
    let ego = &view.ego;
    let a = match view.neighbors(lane).leader {
        Some(l) => idm_or_emergency(ego.s_dot, bumper_gap(ego.s, view.ego_length, &l), l.v, idm),
        None => idm_or_emergency(ego.s_dot, f64::INFINITY, 0.0, idm),
    };
    let limit = idm.desired_speed.min(view.layout.speed_limit);
    (ego.s_dot + a * cfg.period).clamp(0.0, limit)
}

/// One behavior-planner tick.
pub fn bp_step(
    view: &WorldView,
    state: &BpState,
    idm: &IdmParams,
    mobil: &MobilParams,
    cfg: &BpConfig,
) -> (ManeuverCommand, BpState) {
    let layout = view.layout;
    let lane = view.ego_lane();
    // While still in its lane the ego keeps respecting the leader there.
    let maneuver_speed = |target: usize| {
        let v = idm_speed_command(view, target, idm, cfg);
        if target == lane { v } else { v.min(idm_speed_command(view, lane, idm, cfg)) }
    };
    let stay = |target: usize| {
        let cmd = ManeuverCommand {
            mode: ManeuverMode::StayOnLane,
            target_lane: target,
            d_des: layout.lane_center(target),
            v_des: idm_speed_command(view, target, idm, cfg),
        };
        (cmd, BpState::cruising(target))
    };

    match state.fsm {
        FsmState::LaneChanging => {
            let target = state.active_target_lane;
            let d_des = layout.lane_center(target);
            if (view.ego.d - d_des).abs() < cfg.completion_threshold {
                return stay(target);
            }
            if state.maneuver_time + cfg.period > cfg.abort_after {
                return stay(lane);
            }
            let mode = if target > lane || (target == lane && d_des > view.ego.d) {
                ManeuverMode::LaneChangeLeft
            } else {
                ManeuverMode::LaneChangeRight
            };
            let cmd = ManeuverCommand { mode, target_lane: target, d_des, v_des: maneuver_speed(target) };
            let next = BpState { maneuver_time: state.maneuver_time + cfg.period, ..*state };
            (cmd, next)
        }
        FsmState::Cruising => {
            let surroundings = view.surroundings();
            let decision = mobil_decide(&view.ego, &surroundings, idm, mobil).unwrap_or(LaneDecision::None);
            let (mode, target) = match decision {
                LaneDecision::None => return stay(lane),
                LaneDecision::Left => (ManeuverMode::LaneChangeLeft, lane + 1),
                LaneDecision::Right => (ManeuverMode::LaneChangeRight, lane - 1),
            };
            let cmd = ManeuverCommand {
                mode,
                target_lane: target,
                d_des: layout.lane_center(target),
                v_des: maneuver_speed(target),
            };
            (cmd, BpState { fsm: FsmState::LaneChanging, active_target_lane: target, maneuver_time: 0.0 })
        }
    }
}
