//! Fixed-step multi-vehicle world: the ego on a kinematic bicycle, traffic
//! following IDM along fixed lanes, and scripted lateral cut-ins.

use crate::behavior::{idm_acceleration, IdmParams, TrackedVehicle, WorldView};
use crate::geometry::{FrenetState, GeometryError, ReferencePath};
use crate::lattice::solve_quintic;
use crate::polynomial::Polynomial;
use crate::road::LaneLayout;
use crate::vehicle::{BicycleModel, ControlOutput, Dimensions, VehicleState};
use std::sync::Arc;

/// Lateral move of a traffic vehicle from its lane center to another.
#[derive(Debug, Clone, PartialEq)]
pub struct LateralMotion {
    pub start_time: f64,
    pub duration: f64,
    pub to_lane: usize,
    profile: Polynomial,
}

impl LateralMotion {
    pub fn new(start_time: f64, duration: f64, from_d: f64, to_lane: usize, layout: &LaneLayout) -> Self {
        let profile = solve_quintic(from_d, 0.0, 0.0, layout.lane_center(to_lane), duration.max(1e-3))
            .expect("positive duration");
        Self { start_time, duration: duration.max(1e-3), to_lane, profile }
    }

    fn offset_at(&self, t: f64) -> (f64, f64) {
        let u = (t - self.start_time).clamp(0.0, self.duration);
        (self.profile.eval(u), if t > self.start_time && t < self.start_time + self.duration { self.profile.eval_derivative(1, u) } else { 0.0 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficVehicle {
    pub id: usize,
    /// Lane used for car following.
    pub lane: usize,
    pub s: f64,
    pub d: f64,
    pub d_dot: f64,
    pub v: f64,
    pub a: f64,
    pub dims: Dimensions,
    pub idm: IdmParams,
    pub lateral: Option<LateralMotion>,
}

impl TrafficVehicle {
    pub fn frenet(&self) -> FrenetState {
        FrenetState { s: self.s, s_dot: self.v, s_ddot: self.a, d: self.d, d_dot: self.d_dot, d_ddot: 0.0 }
    }
}

/// Something a traffic vehicle can follow.
#[derive(Debug, Clone, Copy)]
struct Body {
    s: f64,
    d: f64,
    v: f64,
    length: f64,
}

fn traffic_accel(me: &TrafficVehicle, bodies: &[(usize, Body)], layout: &LaneLayout) -> f64 {
    let mut leader: Option<Body> = None;
    for (id, b) in bodies {
        if *id == me.id || b.s <= me.s {
            continue;
        }
        let in_lane = layout.occupies(b.d, me.lane) || layout.occupies(b.d, layout.lane_of(me.d));
        if in_lane && leader.is_none_or(|l| b.s < l.s) {
            leader = Some(*b);
        }
    }
    match leader {
        Some(l) => {
            let gap = l.s - me.s - 0.5 * (l.length + me.dims.length);
            idm_acceleration(me.v, gap, l.v, &me.idm).unwrap_or(-me.idm.emergency_decel)
        }
        None => idm_acceleration(me.v, f64::INFINITY, 0.0, &me.idm).unwrap_or(0.0),
    }
}

/// Advances traffic by one step. The ego, if given, is followed like any
/// other vehicle. Accelerations are computed from the state at step start.
pub fn step_traffic(traffic: &mut [TrafficVehicle], ego: Option<(FrenetState, Dimensions)>, layout: &LaneLayout, now: f64, dt: f64) {
    const EGO_ID: usize = usize::MAX;
    let mut bodies: Vec<(usize, Body)> = traffic
        .iter()
        .map(|t| (t.id, Body { s: t.s, d: t.d, v: t.v, length: t.dims.length }))
        .collect();
    if let Some((e, dims)) = ego {
        bodies.push((EGO_ID, Body { s: e.s, d: e.d, v: e.s_dot, length: dims.length }));
    }
    let accels: Vec<f64> = traffic.iter().map(|t| traffic_accel(t, &bodies, layout)).collect();
    let t_next = now + dt;
    for (veh, a) in traffic.iter_mut().zip(accels) {
        let v_next = (veh.v + a * dt).max(0.0);
        veh.a = (v_next - veh.v) / dt;
        veh.v = v_next;
        veh.s += v_next * dt;
        if let Some(m) = &veh.lateral {
            if t_next >= m.start_time {
                veh.lane = m.to_lane;
                let (d, d_dot) = m.offset_at(t_next);
                veh.d = d;
                veh.d_dot = d_dot;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct World {
    pub path: Arc<ReferencePath>,
    pub layout: LaneLayout,
    pub time: f64,
    pub ego: VehicleState,
    pub ego_model: BicycleModel,
    pub traffic: Vec<TrafficVehicle>,
}

impl World {
    pub fn ego_frenet(&self) -> Result<FrenetState, GeometryError> {
        let p = crate::Waypoint3::new(self.ego.x, self.ego.y, 0.0);
        self.path.to_frenet(&p, self.ego_model.velocity(&self.ego))
    }

    /// Perceived surroundings: traffic within `range` of the ego along the road.
    pub fn view(&self, ego: FrenetState, range: f64) -> WorldView {
        let others = self
            .traffic
            .iter()
            .filter(|t| (t.s - ego.s).abs() <= range)
            .map(|t| TrackedVehicle { id: t.id, state: t.frenet(), length: t.dims.length })
            .collect();
        WorldView { ego, ego_length: self.ego.dims.length, others, layout: self.layout }
    }

    /// Ids of traffic vehicles whose footprint overlaps the ego's.
    pub fn collisions(&self, ego: &FrenetState) -> Vec<usize> {
        let e = self.ego.dims;
        self.traffic
            .iter()
            .filter(|t| {
                (t.s - ego.s).abs() < 0.5 * (t.dims.length + e.length) && (t.d - ego.d).abs() < 0.5 * (t.dims.width + e.width)
            })
            .map(|t| t.id)
            .collect()
    }

    /// One step of the whole world under the ego's `control`.
    pub fn step(&mut self, control: &ControlOutput, ego_frenet: Option<FrenetState>, dt: f64) {
        let ego = ego_frenet.map(|f| (f, self.ego.dims));
        step_traffic(&mut self.traffic, ego, &self.layout, self.time, dt);
        self.ego = self.ego_model.step(&self.ego, control, dt);
        if let Ok(f) = self.ego_frenet() {
            self.ego.lane_hint = self.layout.lane_of(f.d);
        }
        self.time += dt;
    }
}
