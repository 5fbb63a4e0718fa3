//! Planar vehicle state and the ego's kinematic bicycle plant.

use crate::geometry::wrap_angle;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dimensions {
    pub length: f64,
    pub width: f64,
}

impl Default for Dimensions {
    fn default() -> Self {
        Self { length: 4.7, width: 1.9 }
    }
}

/// Vehicle center pose and motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Yaw, normalized to (-pi, pi].
    pub heading: f64,
    pub speed: f64,
    /// Longitudinal acceleration, m/s^2.
    pub accel: f64,
    /// Front-wheel angle, rad.
    pub steering: f64,
    pub lane_hint: usize,
    pub dims: Dimensions,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, heading: f64, speed: f64, lane_hint: usize, dims: Dimensions) -> Self {
        Self { x, y, heading: wrap_angle(heading), speed: speed.max(0.0), accel: 0.0, steering: 0.0, lane_hint, dims }
    }
}

/// Actuator command. Negative throttle brakes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlOutput {
    pub throttle: f64,
    pub steering: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BicycleModel {
    pub wheelbase: f64,
    /// Distance from the rear axle to the center of gravity.
    pub rear_to_cg: f64,
    pub max_steering: f64,
    /// rad/s.
    pub max_steering_rate: f64,
    /// Acceleration at full throttle, m/s^2.
    pub drive_accel: f64,
    /// Deceleration at full brake, m/s^2.
    pub brake_decel: f64,
    /// Time constant of the acceleration response, s.
    pub accel_lag: f64,
    pub accel_limit: f64,
}

impl Default for BicycleModel {
    fn default() -> Self {
        Self {
            wheelbase: 2.9,
            rear_to_cg: 1.45,
            max_steering: 0.6,
            max_steering_rate: 0.8,
            drive_accel: 4.0,
            brake_decel: 8.0,
            accel_lag: 0.2,
            accel_limit: 8.0,
        }
    }
}

impl BicycleModel {
    /// Acceleration requested by a throttle value.
    pub fn accel_command(&self, throttle: f64) -> f64 {
        let u = throttle.clamp(-1.0, 1.0);
        if u >= 0.0 {
            u * self.drive_accel
        } else {
            u * self.brake_decel
        }
    }

    /// Throttle that requests `accel`.
    pub fn throttle_for(&self, accel: f64) -> f64 {
        let u = if accel >= 0.0 { accel / self.drive_accel } else { accel / self.brake_decel };
        u.clamp(-1.0, 1.0)
    }

    /// Slip angle of the center of gravity for a front-wheel angle.
    pub fn slip(&self, steering: f64) -> f64 {
        (self.rear_to_cg / self.wheelbase * steering.tan()).atan()
    }

    /// Direction of travel of the vehicle center.
    pub fn course(&self, v: &VehicleState) -> f64 {
        v.heading + self.slip(v.steering)
    }

    pub fn velocity(&self, v: &VehicleState) -> [f64; 2] {
        let c = self.course(v);
        [v.speed * c.cos(), v.speed * c.sin()]
    }

    /// Yaw rate for the current steering and speed.
    pub fn yaw_rate(&self, v: &VehicleState) -> f64 {
        let beta = self.slip(v.steering);
        v.speed * beta.cos() * v.steering.tan() / self.wheelbase
    }

    /// Advances the vehicle by `dt`. Position moves with the speed at the
    /// start of the step.
    pub fn step(&self, v: &VehicleState, control: &ControlOutput, dt: f64) -> VehicleState {
        let mut next = *v;
        let delta_cmd = control.steering.clamp(-self.max_steering, self.max_steering);
        let max_step = self.max_steering_rate * dt;
        next.steering = (v.steering + (delta_cmd - v.steering).clamp(-max_step, max_step)).clamp(-self.max_steering, self.max_steering);

        let course = self.course(v);
        next.x = v.x + v.speed * course.cos() * dt;
        next.y = v.y + v.speed * course.sin() * dt;
        next.heading = wrap_angle(v.heading + self.yaw_rate(v) * dt);

        let target = self.accel_command(control.throttle);
        let blend = 1.0 - (-dt / self.accel_lag).exp();
        let mut accel = (v.accel + (target - v.accel) * blend).clamp(-self.accel_limit, self.accel_limit);
        // A stopped vehicle does not roll backwards.
        if v.speed + accel * dt < 0.0 {
            accel = -v.speed / dt;
        }
        next.accel = accel;
        next.speed = (v.speed + accel * dt).max(0.0);
        next
    }
}
