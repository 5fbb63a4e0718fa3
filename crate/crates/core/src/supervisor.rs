//! Safety watchdog running at the simulation rate.
//!
//! The supervisor watches time-to-collision against the leader and follower
//! in the ego's target lane and the speed limit along the active plan. It
//! never actuates the vehicle; it requests replanning or a speed override.

use crate::behavior::{IdmParams, WorldView};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SupervisorError {
    #[error("gap must be positive, got {0}")]
    NonPositiveGap(f64),
}

/// `gap / closing_speed`, or infinity when the gap is not closing.
pub fn compute_ttc(gap: f64, closing_speed: f64) -> Result<f64, SupervisorError> {
    if !(gap > 0.0) {
        return Err(SupervisorError::NonPositiveGap(gap));
    }
    Ok(if closing_speed > 0.0 { gap / closing_speed } else { f64::INFINITY })
}

fn ttc_or_zero(gap: f64, closing: f64) -> f64 {
    compute_ttc(gap, closing).unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SupervisorConfig {
    pub enabled: bool,
    /// Replan when either TTC drops below this, s.
    pub ttc_threshold: f64,
    /// Headway multiplier of the conservative IDM copy.
    pub headway_scale: f64,
    /// Minimum time between supervisor-triggered replans, s.
    pub replan_cooldown: f64,
}

impl Default for SupervisorConfig {
    fn default() -> Self {
        Self { enabled: true, ttc_threshold: 2.5, headway_scale: 1.5, replan_cooldown: 0.5 }
    }
}

impl SupervisorConfig {
    /// IDM copy with a longer headway, used to cap speed on replans.
    pub fn conservative_idm(&self, idm: &IdmParams) -> IdmParams {
        IdmParams { time_headway: idm.time_headway * self.headway_scale, ..*idm }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "speed")]
pub enum SupervisorAction {
    NoAction,
    ReplanLP,
    OverrideSpeed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cause")]
pub enum VerdictReason {
    Nominal,
    LeaderTtc { ttc: f64 },
    FollowerTtc { ttc: f64 },
    SpeedLimit { speed: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupervisorVerdict {
    pub action: SupervisorAction,
    pub reason: VerdictReason,
}

impl SupervisorVerdict {
    pub const NOMINAL: Self = Self { action: SupervisorAction::NoAction, reason: VerdictReason::Nominal };
}

/// TTC to the leader and follower in `lane`; infinite when absent.
pub fn lane_ttcs(view: &WorldView, lane: usize) -> (f64, f64) {
    let ego = &view.ego;
    let nb = view.neighbors(lane);
    let lead = nb.leader.map_or(f64::INFINITY, |l| {
        ttc_or_zero(l.s - ego.s - 0.5 * (l.length + view.ego_length), ego.s_dot - l.v)
    });
    let follow = nb.follower.map_or(f64::INFINITY, |f| {
        ttc_or_zero(ego.s - f.s - 0.5 * (f.length + view.ego_length), f.v - ego.s_dot)
    });
    (lead, follow)
}

/// Verdict for one simulation step. `remaining_speeds` are the commanded
/// speeds of the active plan from now on.
pub fn supervise(
    view: &WorldView,
    target_lane: usize,
    remaining_speeds: &[f64],
    ttc_threshold: f64,
    v_max: f64,
) -> SupervisorVerdict {
    let (lead, follow) = lane_ttcs(view, target_lane);
    if lead.min(follow) < ttc_threshold {
        let reason = if lead <= follow { VerdictReason::LeaderTtc { ttc: lead } } else { VerdictReason::FollowerTtc { ttc: follow } };
        return SupervisorVerdict { action: SupervisorAction::ReplanLP, reason };
    }
    let peak = remaining_speeds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak > v_max + 1e-9 {
        return SupervisorVerdict { action: SupervisorAction::OverrideSpeed(v_max), reason: VerdictReason::SpeedLimit { speed: peak } };
    }
    SupervisorVerdict::NOMINAL
}
