//! Closed-loop episode: behavior planner, motion planner, supervisor and
//! controller around the simulated world.

use crate::behavior::{bp_step, idm_acceleration, BpState, ManeuverCommand, WorldView};
use crate::control::{track_step, ControlError, TrackerState, WaypointQueue};
use crate::geometry::{wrap_angle, FrenetState, GeometryError};
use crate::lattice::Trajectory;
use crate::log::{EpisodeLog, EpisodeSummary, Event, EventRecord, LogHeader, Outcome, ReplanReason, RestartSource, StepRecord, SCHEMA_VERSION};
use crate::metrics::MetricConfig;
use crate::planner::{plan, PlanError, PlannerConfig};
use crate::scenario::{ConfigError, DriverProfile, Scenario};
use crate::supervisor::{compute_ttc, supervise, SupervisorAction, VerdictReason};
use crate::vehicle::{ControlOutput, VehicleState};
use crate::world::{LateralMotion, TrafficVehicle, World};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("ego left the mapped route: {0}")]
    Geometry(#[from] GeometryError),
    #[error("planning failed: {0}")]
    Plan(#[from] PlanError),
    #[error("control failed: {0}")]
    Control(#[from] ControlError),
}

/// Route length needed past the finish line for planning horizons.
const ROUTE_MARGIN: f64 = 200.0;
/// Distance to a lane center that counts as having arrived in the lane, m.
const LANE_ARRIVAL: f64 = 1.0;
/// Closing speeds below this are measurement noise, m/s.
const MIN_CLOSING_SPEED: f64 = 1e-3;

/// Builds the initial world for a concrete scenario.
pub fn build_world(scenario: &Scenario, profile: &DriverProfile) -> Result<World, EpisodeError> {
    let path = scenario.road.route.build(scenario.base_dir.as_deref())?;
    let layout = scenario.road.layout();
    let needed = scenario.ego.s + scenario.track_length + ROUTE_MARGIN;
    if path.total_length() < needed {
        return Err(ConfigError::Invalid(format!(
            "route is {:.1} m long but the episode needs {needed:.1} m",
            path.total_length()
        ))
        .into());
    }
    let start = FrenetState::at(scenario.ego.s, layout.lane_center(scenario.ego.lane));
    let p = path.to_cartesian(&start)?;
    let [tx, ty] = path.tangent(start.s);
    let ego = VehicleState::new(p.x, p.y, ty.atan2(tx), scenario.ego.speed, scenario.ego.lane, Default::default());
    let mut traffic: Vec<TrafficVehicle> = scenario
        .vehicles
        .iter()
        .enumerate()
        .map(|(i, v)| TrafficVehicle {
            id: i,
            lane: v.lane,
            s: v.s,
            d: layout.lane_center(v.lane),
            d_dot: 0.0,
            v: v.speed,
            a: 0.0,
            dims: v.dims(),
            idm: crate::behavior::IdmParams { desired_speed: v.target_speed.unwrap_or(v.speed).max(0.1), ..Default::default() },
            lateral: None,
        })
        .collect();
    for c in &scenario.cut_ins {
        let veh = &mut traffic[c.vehicle];
        veh.lateral = Some(LateralMotion::new(c.start_time, c.duration, veh.d, c.to_lane, &layout));
    }
    Ok(World { path: Arc::new(path), layout, time: 0.0, ego, ego_model: profile.vehicle, traffic })
}

fn front_ttc(view: &WorldView) -> Option<f64> {
    let lane = view.ego_lane();
    let leader = view.neighbors(lane).leader?;
    let gap = leader.s - view.ego.s - 0.5 * (leader.length + view.ego_length);
    let closing = view.ego.s_dot - leader.v;
    if closing < MIN_CLOSING_SPEED && gap > 0.0 {
        return None;
    }
    // Overlap counts as an immediate collision course.
    let ttc = compute_ttc(gap, closing).unwrap_or(0.0);
    ttc.is_finite().then_some(ttc)
}

/// Speed cap from the conservative IDM copy toward the target-lane leader.
fn conservative_speed(view: &WorldView, lane: usize, profile: &DriverProfile) -> f64 {
    let idm2 = profile.supervisor.conservative_idm(&profile.idm);
    let ego = &view.ego;
    let a = match view.neighbors(lane).leader {
        Some(l) => {
            let gap = l.s - ego.s - 0.5 * (l.length + view.ego_length);
            idm_acceleration(ego.s_dot, gap, l.v, &idm2).unwrap_or(-idm2.emergency_decel)
        }
        None => idm_acceleration(ego.s_dot, f64::INFINITY, 0.0, &idm2).unwrap_or(0.0),
    };
    (ego.s_dot + a * profile.behavior.period).max(0.0)
}

struct ActivePlan {
    trajectory: Trajectory,
    start_time: f64,
}

/// Runs a concrete (already instantiated) scenario to completion.
pub fn run_episode(scenario: &Scenario, profile: &DriverProfile, seed: u64, metric_cfg: &MetricConfig) -> Result<EpisodeLog, EpisodeError> {
    profile.validate()?;
    scenario.validate()?;
    let dt = scenario.dt;
    let mut world = build_world(scenario, profile)?;
    let layout = world.layout;
    let path = Arc::clone(&world.path);
    let mut idm = profile.idm;
    idm.desired_speed = idm.desired_speed.min(layout.speed_limit);
    let v_max = profile.planner.limits.v_max.min(layout.speed_limit);
    let mut planner_cfg = profile.planner.clone();
    planner_cfg.limits.v_max = v_max;

    let every = |period: f64| ((period / dt).round() as u64).max(1);
    let lp_every = every(profile.lp_period);
    let bp_every = every(profile.behavior.period);
    let cooldown = every(profile.supervisor.replan_cooldown);
    let max_steps = (scenario.timeout / dt).ceil() as u64;
    let start_s = scenario.ego.s;

    let header = LogHeader {
        schema: SCHEMA_VERSION,
        scenario: scenario.name.clone(),
        profile: profile.name.clone(),
        seed,
        dt,
        track_length: scenario.track_length,
        supervisor_enabled: profile.supervisor.enabled,
    };
    let mut steps: Vec<StepRecord> = Vec::with_capacity(max_steps as usize + 1);
    let mut events: Vec<EventRecord> = Vec::new();

    let mut bp_state = BpState::cruising(scenario.ego.lane);
    let mut command: Option<ManeuverCommand> = None;
    let mut active: Option<ActivePlan> = None;
    let mut urgent: Option<f64> = None;
    let mut queue: Option<WaypointQueue> = None;
    let mut tracker = TrackerState::default();
    let mut last_supervisor_replan: Option<u64> = None;
    let mut last_action = SupervisorAction::NoAction;
    let mut committed_lane = scenario.ego.lane;
    let mut prev: Option<(VehicleState, [f64; 2], Option<[f64; 2]>)> = None;
    let (mut replans, mut supervisor_replans, mut fallbacks) = (0usize, 0usize, 0usize);
    let (mut left, mut right) = (0usize, 0usize);
    let mut min_ttc: Option<f64> = None;
    let outcome;

    let mut k: u64 = 0;
    loop {
        let t = k as f64 * dt;
        let ego_f = world.ego_frenet()?;
        let view = world.view(ego_f, profile.perception_range);
        let lane = layout.lane_of(ego_f.d);

        // Kinematics for the log.
        let velocity = world.ego_model.velocity(&world.ego);
        let (yaw_rate, accel_vec, jerk) = match &prev {
            Some((pv, pvel, pacc)) => {
                let yaw = wrap_angle(world.ego.heading - pv.heading) / dt;
                let acc = [(velocity[0] - pvel[0]) / dt, (velocity[1] - pvel[1]) / dt];
                let jerk = pacc.map_or(0.0, |pa| (acc[0] - pa[0]).hypot(acc[1] - pa[1]) / dt);
                (yaw, Some(acc), jerk)
            }
            None => (0.0, None, 0.0),
        };
        let ttc = front_ttc(&view);
        if let Some(x) = ttc {
            min_ttc = Some(min_ttc.map_or(x, |m: f64| m.min(x)));
        }
        steps.push(StepRecord {
            k,
            t,
            s: ego_f.s,
            d: ego_f.d,
            x: world.ego.x,
            y: world.ego.y,
            heading: world.ego.heading,
            speed: world.ego.speed,
            accel: world.ego.accel,
            jerk,
            yaw_rate,
            front_ttc: ttc,
            lane,
            fsm: bp_state.fsm,
        });
        prev = Some((world.ego, velocity, accel_vec));

        if lane != committed_lane && (ego_f.d - layout.lane_center(lane)).abs() < LANE_ARRIVAL {
            events.push(EventRecord { k, t, event: Event::LaneChange { from: committed_lane, to: lane } });
            if lane > committed_lane {
                left += 1;
            } else {
                right += 1;
            }
            committed_lane = lane;
        }

        let hits = world.collisions(&ego_f);
        if !hits.is_empty() {
            events.push(EventRecord { k, t, event: Event::Collision { with: hits } });
            outcome = Outcome::Collision;
            break;
        }
        if ego_f.s - start_s >= scenario.track_length {
            outcome = Outcome::Completed;
            break;
        }
        if k >= max_steps {
            outcome = Outcome::Timeout;
            break;
        }

        // Behavior layer.
        if k % bp_every == 0 {
            let (cmd, next) = bp_step(&view, &bp_state, &idm, &profile.mobil, &profile.behavior);
            bp_state = next;
            command = Some(cmd);
            events.push(EventRecord { k, t, event: Event::Behavior { mode: cmd.mode, target_lane: cmd.target_lane, v_des: cmd.v_des } });
        }
        let mut cmd = command.expect("behavior runs at step 0");

        // Supervisor.
        let mut reason = (k % lp_every == 0).then_some(ReplanReason::Scheduled);
        if profile.supervisor.enabled {
            if let Some(q) = &queue {
                let speeds: Vec<f64> = q.speeds().collect();
                let verdict = supervise(&view, cmd.target_lane, &speeds, profile.supervisor.ttc_threshold, v_max);
                let ready = last_supervisor_replan.is_none_or(|j| k - j >= cooldown);
                urgent = None;
                match verdict.action {
                    SupervisorAction::NoAction => {}
                    SupervisorAction::ReplanLP if ready => {
                        let (c, next) = bp_step(&view, &bp_state, &idm, &profile.mobil, &profile.behavior);
                        bp_state = next;
                        cmd = ManeuverCommand { v_des: c.v_des.min(conservative_speed(&view, c.target_lane, profile)), ..c };
                        command = Some(cmd);
                        reason = Some(ReplanReason::Supervisor);
                        last_supervisor_replan = Some(k);
                        // A closing leader: only maneuvers that settle
                        // before the predicted impact.
                        if let VerdictReason::LeaderTtc { ttc } = verdict.reason {
                            urgent = Some(ttc);
                        }
                    }
                    SupervisorAction::OverrideSpeed(v) if ready => {
                        cmd.v_des = cmd.v_des.min(v);
                        command = Some(cmd);
                        reason = Some(reason.unwrap_or(ReplanReason::SpeedOverride));
                        last_supervisor_replan = Some(k);
                    }
                    _ => {}
                }
                if verdict.action != last_action || (verdict.action != SupervisorAction::NoAction && last_supervisor_replan == Some(k)) {
                    events.push(EventRecord { k, t, event: Event::Supervisor { action: verdict.action, reason: verdict.reason } });
                }
                last_action = verdict.action;
            }
        }
        if queue.as_ref().is_none_or(|q| q.len() < 2) {
            reason = Some(reason.unwrap_or(ReplanReason::Exhausted));
        }

        // Motion planning.
        if let Some(reason) = reason {
            let measured = FrenetState { s_ddot: world.ego.accel, ..ego_f };
            let (start, restart) = match &active {
                Some(a) => {
                    let tau = (t - a.start_time).min(a.trajectory.horizon);
                    let p = a.trajectory.state_at(tau);
                    let tol = profile.replan_tolerance;
                    if (p.s - ego_f.s).abs() > tol.s || (p.d - ego_f.d).abs() > tol.d || (p.s_dot - ego_f.s_dot).abs() > tol.v {
                        (measured, RestartSource::Measured)
                    } else {
                        (p, RestartSource::Plan)
                    }
                }
                None => (FrenetState { s_ddot: 0.0, d_dot: 0.0, ..ego_f }, RestartSource::Measured),
            };
            let result = match urgent.take() {
                Some(ttc) => {
                    let cfg = PlannerConfig { grid: planner_cfg.grid.arriving_within(ttc), ..planner_cfg.clone() };
                    plan(&start, &cmd, &view, &path, &cfg, dt)?
                }
                None => plan(&start, &cmd, &view, &path, &planner_cfg, dt)?,
            };
            replans += 1;
            if reason == ReplanReason::Supervisor {
                supervisor_replans += 1;
            }
            if result.fallback {
                fallbacks += 1;
            }
            let term = result.trajectory.terminal;
            events.push(EventRecord {
                k,
                t,
                event: Event::Replan {
                    reason,
                    restart,
                    candidates: result.candidates,
                    feasible: result.feasible,
                    cost: result.cost,
                    fallback: result.fallback,
                    t_f: term.t_f,
                    d_f: term.d_f,
                    v_f: term.v_f,
                },
            });
            queue = Some(WaypointQueue::from_samples(&result.samples, t)?);
            active = Some(ActivePlan { trajectory: result.trajectory, start_time: t });
        }

        // Control and world update.
        let q = queue.as_mut().expect("a plan exists after step 0");
        let control = match track_step(&world.ego, q, &profile.tracker, &mut tracker, &world.ego_model, t, dt) {
            Ok(c) => c,
            Err(ControlError::EmptyQueue) => ControlOutput { throttle: -0.25, steering: world.ego.steering },
            Err(e) => return Err(e.into()),
        };
        world.step(&control, Some(ego_f), dt);
        k += 1;
    }

    let last = steps.last().expect("at least one step");
    let (tk, tt) = (last.k, last.t);
    events.push(EventRecord { k: tk, t: tt, event: Event::End { outcome } });
    let metrics = crate::log::episode_metrics(&steps, metric_cfg).expect("non-empty steps");
    let summary = EpisodeSummary {
        outcome,
        duration: tt,
        distance: last.s - start_s,
        final_speed: last.speed,
        final_lane: last.lane,
        lane_changes: left + right,
        left_lane_changes: left,
        right_lane_changes: right,
        replans,
        supervisor_replans,
        fallbacks,
        min_front_ttc: min_ttc,
        metrics,
    };
    Ok(EpisodeLog { header, steps, events, summary })
}
