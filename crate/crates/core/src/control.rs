//! Waypoint-queue tracking: a two-point visual steering controller and a
//! longitudinal speed/position controller, both PID.

use crate::geometry::wrap_angle;
use crate::lattice::TrajectorySamples;
use crate::vehicle::{BicycleModel, ControlOutput, VehicleState};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("waypoint queue is empty")]
    EmptyQueue,
    #[error("waypoint times must be strictly increasing")]
    NonMonotonicTimes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    /// Simulation time at which the vehicle should be here, s.
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub v: f64,
    /// Signed rate of change of speed, m/s^2.
    pub a: f64,
    pub curvature: f64,
}

/// Time-labeled reference points. `anchor` is the last consumed point and
/// bounds interpolation from below.
#[derive(Debug, Clone, PartialEq)]
pub struct WaypointQueue {
    anchor: Waypoint,
    points: VecDeque<Waypoint>,
}

impl WaypointQueue {
    pub fn new(anchor: Waypoint, points: Vec<Waypoint>) -> Result<Self, ControlError> {
        let mut prev = anchor.t;
        for p in &points {
            if !(p.t > prev) {
                return Err(ControlError::NonMonotonicTimes);
            }
            prev = p.t;
        }
        Ok(Self { anchor, points: points.into() })
    }

    /// Queue for a sampled trajectory starting at simulation time `t0`. The
    /// first sample is the anchor, the rest are queued.
    pub fn from_samples(samples: &TrajectorySamples, t0: f64) -> Result<Self, ControlError> {
        let wp = |i: usize| Waypoint {
            t: t0 + samples.times[i],
            x: samples.x[i],
            y: samples.y[i],
            v: samples.v[i],
            a: samples.a_long[i],
            curvature: samples.curvature[i],
        };
        if samples.len() < 2 {
            return Err(ControlError::EmptyQueue);
        }
        Self::new(wp(0), (1..samples.len()).map(wp).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn front(&self) -> Option<&Waypoint> {
        self.points.front()
    }

    pub fn points(&self) -> impl Iterator<Item = &Waypoint> {
        self.points.iter()
    }

    /// Drops waypoints whose time has come.
    pub fn consume_until(&mut self, now: f64) {
        while let Some(p) = self.points.front() {
            if p.t <= now + 1e-9 {
                self.anchor = *p;
                self.points.pop_front();
            } else {
                break;
            }
        }
    }

    /// Linearly interpolated reference at `now`.
    pub fn reference_at(&self, now: f64) -> Waypoint {
        let Some(next) = self.points.front() else { return self.anchor };
        let a = &self.anchor;
        let u = ((now - a.t) / (next.t - a.t)).clamp(0.0, 1.0);
        let lerp = |p: f64, q: f64| p + (q - p) * u;
        Waypoint {
            t: now,
            x: lerp(a.x, next.x),
            y: lerp(a.y, next.y),
            v: lerp(a.v, next.v),
            a: lerp(a.a, next.a),
            curvature: lerp(a.curvature, next.curvature),
        }
    }

    /// Remaining commanded speeds.
    pub fn speeds(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.v)
    }

    fn polyline(&self) -> Vec<[f64; 2]> {
        std::iter::once(&self.anchor).chain(self.points.iter()).map(|p| [p.x, p.y]).collect()
    }
}

/// Point at arc distance `ahead` past the projection of `(px, py)` onto the
/// polyline, extrapolating along the last segment if needed.
fn preview_point(line: &[[f64; 2]], px: f64, py: f64, ahead: f64) -> [f64; 2] {
    if line.len() == 1 {
        return line[0];
    }
    let mut best = (f64::INFINITY, 0usize, 0.0f64);
    for i in 0..line.len() - 1 {
        let [ax, ay] = line[i];
        let [bx, by] = line[i + 1];
        let (dx, dy) = (bx - ax, by - ay);
        let len2 = dx * dx + dy * dy;
        let u = if len2 > 0.0 { (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
        let (qx, qy) = (ax + u * dx, ay + u * dy);
        let dist2 = (px - qx).powi(2) + (py - qy).powi(2);
        if dist2 < best.0 {
            best = (dist2, i, u);
        }
    }
    let (_, mut i, u) = best;
    let seg_len = |i: usize| (line[i + 1][0] - line[i][0]).hypot(line[i + 1][1] - line[i][1]);
    let mut remaining = ahead + u * seg_len(i);
    loop {
        let l = seg_len(i);
        if remaining <= l || i + 2 == line.len() {
            let [ax, ay] = line[i];
            let [bx, by] = line[i + 1];
            if l <= 0.0 {
                return [bx, by];
            }
            let f = remaining / l;
            return [ax + f * (bx - ax), ay + f * (by - ay)];
        }
        remaining -= l;
        i += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerGains {
    /// Weight of the near-point angle in the steering error.
    pub near_weight: f64,
    /// Near preview, s of travel.
    pub near_time: f64,
    /// Far preview, s of travel.
    pub far_time: f64,
    pub min_near_distance: f64,
    pub min_far_distance: f64,
    /// Steering PID, output in yaw rate (rad/s per rad).
    pub steer_kp: f64,
    pub steer_ki: f64,
    pub steer_kd: f64,
    /// Speed error gain, 1/s.
    pub speed_kp: f64,
    pub speed_ki: f64,
    /// Along-track position error gain, 1/s^2.
    pub position_kp: f64,
    pub integral_limit: f64,
}

impl Default for TrackerGains {
    fn default() -> Self {
        Self {
            near_weight: 0.3,
            near_time: 0.3,
            far_time: 1.5,
            min_near_distance: 2.0,
            min_far_distance: 8.0,
            steer_kp: 4.0,
            steer_ki: 0.5,
            steer_kd: 0.0,
            speed_kp: 1.2,
            speed_ki: 0.05,
            position_kp: 0.4,
            integral_limit: 2.0,
        }
    }
}

/// Controller memory carried between steps.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrackerState {
    pub steer_integral: f64,
    pub steer_prev_error: Option<f64>,
    pub speed_integral: f64,
}

/// Blended near/far angular error seen from the vehicle.
/// Weighted bearing of the near and far preview points, less the bearing a
/// vehicle exactly on an arc of curvature `curvature` would see (half the
/// subtended angle).
pub fn preview_error(vehicle: &VehicleState, queue: &WaypointQueue, gains: &TrackerGains, curvature: f64) -> f64 {
    let line = queue.polyline();
    let near = (gains.near_time * vehicle.speed).max(gains.min_near_distance);
    let far = (gains.far_time * vehicle.speed).max(gains.min_far_distance).max(near + 1.0);
    let angle = |d: f64| {
        let [qx, qy] = preview_point(&line, vehicle.x, vehicle.y, d);
        wrap_angle((qy - vehicle.y).atan2(qx - vehicle.x) - vehicle.heading)
    };
    let w = gains.near_weight;
    let on_arc = 0.5 * curvature * (w * near + (1.0 - w) * far);
    w * angle(near) + (1.0 - w) * angle(far) - on_arc
}

/// One control step. Consumes waypoints up to `now` first.
pub fn track_step(
    vehicle: &VehicleState,
    queue: &mut WaypointQueue,
    gains: &TrackerGains,
    state: &mut TrackerState,
    model: &BicycleModel,
    now: f64,
    dt: f64,
) -> Result<ControlOutput, ControlError> {
    queue.consume_until(now);
    if queue.is_empty() {
        return Err(ControlError::EmptyQueue);
    }
    let reference = queue.reference_at(now);
    let lim = gains.integral_limit;

    let e = preview_error(vehicle, queue, gains, reference.curvature);
    state.steer_integral = (state.steer_integral + e * dt).clamp(-lim, lim);
    let de = state.steer_prev_error.map_or(0.0, |p| (e - p) / dt);
    state.steer_prev_error = Some(e);
    let omega = gains.steer_kp * e + gains.steer_ki * state.steer_integral + gains.steer_kd * de
        + reference.v * reference.curvature;
    let steering = (model.wheelbase * omega / vehicle.speed.max(1.0)).atan();

    let speed_error = reference.v - vehicle.speed;
    let (hx, hy) = (vehicle.heading.cos(), vehicle.heading.sin());
    let along = (reference.x - vehicle.x) * hx + (reference.y - vehicle.y) * hy;
    state.speed_integral = (state.speed_integral + speed_error * dt).clamp(-lim, lim);
    let accel = reference.a + gains.speed_kp * speed_error + gains.speed_ki * state.speed_integral + gains.position_kp * along;

    Ok(ControlOutput {
        throttle: model.throttle_for(accel),
        steering: steering.clamp(-model.max_steering, model.max_steering),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vehicle::Dimensions;

    fn straight_queue(v: f64, y: f64) -> WaypointQueue {
        let pts: Vec<Waypoint> = (0..=100)
            .map(|i| {
                let t = i as f64 * 0.05;
                Waypoint { t, x: v * t, y, v, a: 0.0, curvature: 0.0 }
            })
            .collect();
        WaypointQueue::new(pts[0], pts[1..].to_vec()).unwrap()
    }

    #[test]
    fn on_path_needs_no_correction() {
        let mut q = straight_queue(20.0, 0.0);
        let v = VehicleState::new(0.0, 0.0, 0.0, 20.0, 1, Dimensions::default());
        let out = track_step(&v, &mut q, &TrackerGains::default(), &mut TrackerState::default(), &BicycleModel::default(), 0.0, 0.05).unwrap();
        assert!(out.steering.abs() < 1e-6 && out.throttle.abs() < 1e-6, "{out:?}");
    }

    #[test]
    fn left_offset_steers_right() {
        let mut q = straight_queue(20.0, 0.0);
        let v = VehicleState::new(0.0, 1.0, 0.0, 20.0, 1, Dimensions::default());
        let out = track_step(&v, &mut q, &TrackerGains::default(), &mut TrackerState::default(), &BicycleModel::default(), 0.0, 0.05).unwrap();
        assert!(out.steering < 0.0);
    }

    #[test]
    fn slow_vehicle_accelerates() {
        let mut q = straight_queue(20.0, 0.0);
        let v = VehicleState::new(0.0, 0.0, 0.0, 18.0, 1, Dimensions::default());
        let out = track_step(&v, &mut q, &TrackerGains::default(), &mut TrackerState::default(), &BicycleModel::default(), 0.0, 0.05).unwrap();
        assert!(out.throttle > 0.0);
    }

    #[test]
    fn exhausted_queue_is_an_error() {
        let mut q = straight_queue(20.0, 0.0);
        let v = VehicleState::new(0.0, 0.0, 0.0, 20.0, 1, Dimensions::default());
        let r = track_step(&v, &mut q, &TrackerGains::default(), &mut TrackerState::default(), &BicycleModel::default(), 10.0, 0.05);
        assert_eq!(r, Err(ControlError::EmptyQueue));
    }

    #[test]
    fn consumption_and_interpolation() {
        let mut q = straight_queue(20.0, 0.0);
        assert_eq!(q.len(), 100);
        q.consume_until(0.12);
        assert_eq!(q.len(), 98);
        let r = q.reference_at(0.125);
        assert!((r.x - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_unordered_times() {
        let w = Waypoint { t: 1.0, x: 0.0, y: 0.0, v: 0.0, a: 0.0, curvature: 0.0 };
        assert_eq!(WaypointQueue::new(w, vec![w]), Err(ControlError::NonMonotonicTimes));
    }

    #[test]
    fn preview_walks_along_polyline() {
        let line = [[0.0, 0.0], [10.0, 0.0], [10.0, 10.0]];
        assert_eq!(preview_point(&line, 0.0, 1.0, 5.0), [5.0, 0.0]);
        assert_eq!(preview_point(&line, 0.0, 0.0, 15.0), [10.0, 5.0]);
        assert_eq!(preview_point(&line, 0.0, 0.0, 25.0), [10.0, 15.0]);
    }

    #[test]
    fn closed_loop_converges_to_offset_path() {
        let model = BicycleModel::default();
        let gains = TrackerGains::default();
        let mut q = straight_queue(20.0, 0.5);
        let mut st = TrackerState::default();
        let mut v = VehicleState::new(0.0, 0.0, 0.0, 20.0, 1, Dimensions::default());
        let dt = 0.05;
        for k in 0..90 {
            let out = track_step(&v, &mut q, &gains, &mut st, &model, k as f64 * dt, dt).unwrap();
            v = model.step(&v, &out, dt);
        }
        assert!((v.y - 0.5).abs() < 0.05, "{}", v.y);
        assert!((v.speed - 20.0).abs() < 0.2);
    }
}
